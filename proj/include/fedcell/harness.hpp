#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedcell/analysis.hpp"
#include "fedcell/config.hpp"
#include "fedcell/dp.hpp"

namespace fedcell {

enum class Algorithm { kRnd, kOpt, kOptDp };

std::string to_string(Algorithm algorithm);
// Accepts "rnd", "opt" and "opt+dp".
Algorithm parse_algorithm(std::string_view name);
std::vector<Algorithm> parse_algorithms(std::string_view comma_list);

struct ExperimentSpec {
  SystemConfig base;
  std::vector<Algorithm> algorithms{Algorithm::kRnd, Algorithm::kOpt, Algorithm::kOptDp};
  int replicas = 100;
  std::uint64_t seed_base = 1;  // replica r uses seed_base + r
  std::filesystem::path output_dir;
  bool train = false;
  int jobs = 1;
  std::optional<int> num_rbs;   // overrides base.num_rbs
  std::optional<double> gamma;  // overrides base.gamma

  SystemConfig effective_config() const;
};

void validate(const ExperimentSpec& spec);

struct MetricsRow {
  Algorithm algorithm = Algorithm::kRnd;
  int replica = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;  // set when !ok
  double normalized_objective = 0.0;
  int scheduled = 0;
  std::vector<double> accuracy;  // per round, index 0 = initial model
  std::vector<double> loss;
  std::vector<UserLeakage> leakage;
  BoundConstants bounds;
};

// Rows ordered by replica, then by the algorithm order of the spec.
struct MetricsTable {
  std::vector<Algorithm> algorithms;
  int replicas = 0;
  std::vector<MetricsRow> rows;

  const MetricsRow& at(int replica, Algorithm algorithm) const;
};

// Runs every (replica, algorithm) pair, up to spec.jobs replicas at a time.
// A failing pair is recorded in its row and does not stop the experiment.
MetricsTable run_experiment(const ExperimentSpec& spec);

// Right-continuous empirical CDF: each distinct value with the fraction of
// samples <= it. Throws std::invalid_argument on empty input.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values);

// Writes objective_cdf.csv, accuracy.csv, loss.csv, leakage_cdf.csv,
// bounds.csv and, if any pair failed, failures.csv.
void emit_csv(const MetricsTable& table, const std::filesystem::path& dir);

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace fedcell
