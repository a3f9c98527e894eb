#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

namespace fedcell {

// System, optimization and learning parameters. Radio quantities are held in
// linear SI units (W, W/Hz, Hz, bit/s); the config file boundary uses dBm,
// dBm/Hz, MHz and kbit/s instead.
struct SystemConfig {
  // Geometry and radio.
  int num_cells = 7;
  int num_rbs = 5;
  int total_users = 100;
  double cell_radius = 500.0;    // m
  double area_side = 0.0;        // m, side of the user square; 0 => 5 * cell_radius
  double min_distance = 1.0;     // m, floor on user/base-station distance
  double center_freq = 2450e6;   // Hz
  double bandwidth = 180e3;      // Hz per resource block
  double noise_psd = 3.981071705534952e-21;  // W/Hz (-174 dBm/Hz)
  double p_max = 0.01;           // W (10 dBm)
  double r_min = 100e3;          // bit/s

  // Scheduling / DP-noise optimization.
  double v_max = 12.0;
  double n_min = 100.0;
  double gamma = 1e6;
  int sweeps = 1;  // passes of the per-cell scheduler over all cells

  // Federated learning.
  int rounds = 200;
  double step = 0.05;
  double clip = 10.0;  // gradient-norm bound used by the accountant

  // Convergence-bound diagnostics.
  double lipschitz = 10.0;
  double mu = 1.0;
  double xi1 = 0.0;
  double xi2 = 1.0;

  std::uint64_t seed = 1;

  // Data.
  int total_samples = 6000;
  double lognormal_mu = 0.0;
  double lognormal_sigma = 1.0;
  int test_samples = 1000;
  int hidden_layers = 2;
  int hidden_units = 256;  // per hidden layer
  std::string dataset_dir;  // IDX files; empty => synthetic data
  int num_classes = 10;     // synthetic data only
  int num_features = 64;    // synthetic data only
  double class_separation = 0.5;  // synthetic data only

  double effective_area_side() const {
    return area_side > 0.0 ? area_side : 5.0 * cell_radius;
  }
};

// Throws std::invalid_argument naming the first violated constraint.
void validate(const SystemConfig& config);

// Parses the flat JSON document described in the README. Unknown keys are
// rejected so that typos do not silently fall back to defaults.
SystemConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const SystemConfig& config);
SystemConfig load_config(const std::filesystem::path& path);

}  // namespace fedcell
