#include "fedcell/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "fedcell/units.hpp"

namespace fedcell {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate(const SystemConfig& c) {
  require(c.num_cells >= 1, "num_cells must be >= 1");
  require(c.num_rbs >= 1, "num_rbs must be >= 1");
  require(c.total_users >= 1, "total_users must be >= 1");
  require(positive_finite(c.cell_radius), "cell_radius must be > 0");
  require(std::isfinite(c.area_side) && c.area_side >= 0.0, "area_side must be >= 0");
  require(positive_finite(c.min_distance), "min_distance must be > 0");
  require(positive_finite(c.center_freq), "center_freq must be > 0");
  require(positive_finite(c.bandwidth), "bandwidth must be > 0");
  require(positive_finite(c.noise_psd), "noise_psd must be > 0");
  require(positive_finite(c.p_max), "p_max must be > 0");
  require(positive_finite(c.r_min), "r_min must be > 0");
  require(positive_finite(c.v_max), "v_max must be > 0");
  require(positive_finite(c.n_min), "n_min must be > 0");
  require(positive_finite(c.gamma), "gamma must be > 0");
  require(c.sweeps >= 1, "sweeps must be >= 1");
  require(c.rounds >= 0, "rounds must be >= 0");
  require(std::isfinite(c.step) && c.step >= 0.0, "step must be >= 0");
  require(positive_finite(c.clip), "clip must be > 0");
  require(positive_finite(c.lipschitz), "lipschitz must be > 0");
  require(positive_finite(c.mu) && c.mu <= c.lipschitz, "need 0 < mu <= lipschitz");
  require(std::isfinite(c.xi1) && c.xi1 >= 0.0, "xi1 must be >= 0");
  require(std::isfinite(c.xi2) && c.xi2 >= 1.0, "xi2 must be >= 1");
  require(c.total_samples >= c.total_users, "total_samples must be >= total_users");
  require(std::isfinite(c.lognormal_mu), "lognormal_mu must be finite");
  require(std::isfinite(c.lognormal_sigma) && c.lognormal_sigma >= 0.0,
          "lognormal_sigma must be >= 0");
  require(c.test_samples >= 1, "test_samples must be >= 1");
  require(c.hidden_layers >= 0, "hidden_layers must be >= 0");
  require(c.hidden_units >= 1, "hidden_units must be >= 1");
  require(c.num_classes >= 2, "num_classes must be >= 2");
  require(c.num_features >= 1, "num_features must be >= 1");
  require(std::isfinite(c.class_separation) && c.class_separation >= 0.0,
          "class_separation must be >= 0");
}

SystemConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  SystemConfig c;
  for (const auto& [key, value] : doc.items()) {
    auto num = [&]() -> double {
      if (!value.is_number())
        throw std::invalid_argument("config key '" + key + "' must be a number");
      return value.get<double>();
    };
    auto integer = [&]() -> long long {
      if (!value.is_number_integer())
        throw std::invalid_argument("config key '" + key + "' must be an integer");
      return value.get<long long>();
    };
    if (key == "num_cells") c.num_cells = static_cast<int>(integer());
    else if (key == "num_rbs") c.num_rbs = static_cast<int>(integer());
    else if (key == "total_users") c.total_users = static_cast<int>(integer());
    else if (key == "cell_radius") c.cell_radius = num();
    else if (key == "area_side") c.area_side = num();
    else if (key == "min_distance") c.min_distance = num();
    else if (key == "center_freq") c.center_freq = num() * 1e6;        // MHz
    else if (key == "bandwidth") c.bandwidth = num() * 1e6;            // MHz
    else if (key == "noise_psd") c.noise_psd = dbm_to_watts(num());    // dBm/Hz
    else if (key == "p_max") c.p_max = dbm_to_watts(num());            // dBm
    else if (key == "r_min") c.r_min = num() * 1e3;                    // kbit/s
    else if (key == "v_max") c.v_max = num();
    else if (key == "n_min") c.n_min = num();
    else if (key == "gamma") c.gamma = num();
    else if (key == "sweeps") c.sweeps = static_cast<int>(integer());
    else if (key == "rounds") c.rounds = static_cast<int>(integer());
    else if (key == "step") c.step = num();
    else if (key == "clip") c.clip = num();
    else if (key == "lipschitz") c.lipschitz = num();
    else if (key == "mu") c.mu = num();
    else if (key == "xi1") c.xi1 = num();
    else if (key == "xi2") c.xi2 = num();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "total_samples") c.total_samples = static_cast<int>(integer());
    else if (key == "lognormal_mu") c.lognormal_mu = num();
    else if (key == "lognormal_sigma") c.lognormal_sigma = num();
    else if (key == "test_samples") c.test_samples = static_cast<int>(integer());
    else if (key == "hidden_layers") c.hidden_layers = static_cast<int>(integer());
    else if (key == "hidden_units") c.hidden_units = static_cast<int>(integer());
    else if (key == "dataset_dir") c.dataset_dir = value.get<std::string>();
    else if (key == "num_classes") c.num_classes = static_cast<int>(integer());
    else if (key == "num_features") c.num_features = static_cast<int>(integer());
    else if (key == "class_separation") c.class_separation = num();
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  validate(c);
  return c;
}

nlohmann::json config_to_json(const SystemConfig& c) {
  nlohmann::json j;
  j["num_cells"] = c.num_cells;
  j["num_rbs"] = c.num_rbs;
  j["total_users"] = c.total_users;
  j["cell_radius"] = c.cell_radius;
  j["area_side"] = c.area_side;
  j["min_distance"] = c.min_distance;
  j["center_freq"] = c.center_freq / 1e6;
  j["bandwidth"] = c.bandwidth / 1e6;
  j["noise_psd"] = watts_to_dbm(c.noise_psd);
  j["p_max"] = watts_to_dbm(c.p_max);
  j["r_min"] = c.r_min / 1e3;
  j["v_max"] = c.v_max;
  j["n_min"] = c.n_min;
  j["gamma"] = c.gamma;
  j["sweeps"] = c.sweeps;
  j["rounds"] = c.rounds;
  j["step"] = c.step;
  j["clip"] = c.clip;
  j["lipschitz"] = c.lipschitz;
  j["mu"] = c.mu;
  j["xi1"] = c.xi1;
  j["xi2"] = c.xi2;
  j["seed"] = c.seed;
  j["total_samples"] = c.total_samples;
  j["lognormal_mu"] = c.lognormal_mu;
  j["lognormal_sigma"] = c.lognormal_sigma;
  j["test_samples"] = c.test_samples;
  j["hidden_layers"] = c.hidden_layers;
  j["hidden_units"] = c.hidden_units;
  j["dataset_dir"] = c.dataset_dir;
  j["num_classes"] = c.num_classes;
  j["num_features"] = c.num_features;
  j["class_separation"] = c.class_separation;
  return j;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace fedcell
