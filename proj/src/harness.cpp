#include "fedcell/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>
#include <thread>

#include "fedcell/dataset.hpp"
#include "fedcell/fl.hpp"
#include "fedcell/mlp.hpp"
#include "fedcell/scheduler.hpp"
#include "fedcell/topology.hpp"

namespace fedcell {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kRnd: return "rnd";
    case Algorithm::kOpt: return "opt";
    case Algorithm::kOptDp: return "opt+dp";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "rnd") return Algorithm::kRnd;
  if (name == "opt") return Algorithm::kOpt;
  if (name == "opt+dp") return Algorithm::kOptDp;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::vector<Algorithm> parse_algorithms(std::string_view comma_list) {
  std::vector<Algorithm> out;
  while (!comma_list.empty()) {
    const auto comma = comma_list.find(',');
    const auto token = comma_list.substr(0, comma);
    const Algorithm a = parse_algorithm(token);
    if (std::find(out.begin(), out.end(), a) != out.end()) {
      throw std::invalid_argument("algorithm '" + std::string(token) + "' listed twice");
    }
    out.push_back(a);
    if (comma == std::string_view::npos) break;
    comma_list.remove_prefix(comma + 1);
  }
  return out;
}

SystemConfig ExperimentSpec::effective_config() const {
  SystemConfig config = base;
  if (num_rbs) config.num_rbs = *num_rbs;
  if (gamma) config.gamma = *gamma;
  return config;
}

void validate(const ExperimentSpec& spec) {
  if (spec.replicas < 1) throw std::invalid_argument("replica count must be >= 1");
  if (spec.algorithms.empty()) throw std::invalid_argument("no algorithm requested");
  if (spec.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  validate(spec.effective_config());
}

const MetricsRow& MetricsTable::at(int replica, Algorithm algorithm) const {
  const auto pos = std::find(algorithms.begin(), algorithms.end(), algorithm);
  if (pos == algorithms.end() || replica < 0 || replica >= replicas) {
    throw std::out_of_range("no such metrics row");
  }
  return rows[static_cast<std::size_t>(replica) * algorithms.size() +
              static_cast<std::size_t>(pos - algorithms.begin())];
}

namespace {

Allocation schedule(Algorithm algorithm, const Topology& topo, const SystemConfig& config,
                    std::uint64_t seed) {
  switch (algorithm) {
    case Algorithm::kRnd: return rnd_sched(topo, config, seed);
    case Algorithm::kOpt: return opt_sched(topo, config, seed);
    case Algorithm::kOptDp: return opt_sched_dp(topo, config, seed);
  }
  throw std::logic_error("unhandled algorithm");
}

struct SharedData {
  DataSplit data;
  Mlp model;
};

void run_replica(const ExperimentSpec& spec, const SystemConfig& config, const SharedData* shared,
                 int replica, MetricsRow* rows) {
  const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(replica);
  std::optional<Topology> topo;
  std::string topo_error;
  try {
    topo = generate_topology(config, seed);
  } catch (const std::exception& e) {
    topo_error = e.what();
  }
  std::vector<Shard> shards;
  if (topo && shared) shards = make_shards(*topo, shared->data.train, seed);

  for (std::size_t k = 0; k < spec.algorithms.size(); ++k) {
    MetricsRow& row = rows[k];
    row.algorithm = spec.algorithms[k];
    row.replica = replica;
    row.seed = seed;
    if (!topo) {
      row.error = topo_error;
      continue;
    }
    try {
      const Allocation alloc = schedule(row.algorithm, *topo, config, seed);
      row.normalized_objective = normalized_objective(*topo, alloc, config);
      row.scheduled = alloc.scheduled_count();
      row.leakage = leakage_report(*topo, alloc, config).users;
      const long long dim = shared ? shared->model.parameter_count()
                                   : make_model(config, data_input_dim(config), config.dataset_dir.empty() ? config.num_classes : 10)
                                         .parameter_count();
      row.bounds = evaluate_bound(*topo, alloc, config, dim);
      if (shared) {
        const FlState state =
            train(shared->model, *topo, alloc, shards, shared->data.test, config, seed);
        for (const RoundMetrics& m : state.history) {
          row.accuracy.push_back(m.accuracy);
          row.loss.push_back(m.loss);
        }
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      row.accuracy.clear();
      row.loss.clear();
    }
  }
}

}  // namespace

MetricsTable run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  const SystemConfig config = spec.effective_config();

  std::optional<SharedData> shared;
  if (spec.train) {
    DataSplit data = load_data(config);
    const int features = data.train.num_features();
    const int classes = data.train.num_classes;
    shared.emplace(SharedData{std::move(data), make_model(config, features, classes)});
  }

  MetricsTable table;
  table.algorithms = spec.algorithms;
  table.replicas = spec.replicas;
  table.rows.resize(static_cast<std::size_t>(spec.replicas) * spec.algorithms.size());

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < spec.replicas; r = next++) {
      run_replica(spec, config, shared ? &*shared : nullptr, r,
                  &table.rows[static_cast<std::size_t>(r) * spec.algorithms.size()]);
    }
  };
  const int threads = std::min(spec.jobs, spec.replicas);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return table;
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empirical_cdf: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k + 1 < values.size() && values[k + 1] == values[k]) continue;
    out.emplace_back(values[k], static_cast<double>(k + 1) / n);
  }
  return out;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), end);
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  }
  return out;
}

void close_csv(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) {
    throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
  }
}

// Fraction of `sorted` that is <= v.
double cdf_at(const std::vector<double>& sorted, double v) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), v);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void emit_csv(const MetricsTable& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    const auto path = dir / "objective_cdf.csv";
    auto out = open_csv(path);
    out << "algorithm,replica,normalized_objective,cdf\n";
    for (Algorithm a : table.algorithms) {
      std::vector<const MetricsRow*> rows;
      for (const MetricsRow& row : table.rows) {
        if (row.algorithm == a && row.ok) rows.push_back(&row);
      }
      std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow* x, const MetricsRow* y) {
        return x->normalized_objective < y->normalized_objective;
      });
      std::vector<double> sorted;
      for (const MetricsRow* row : rows) sorted.push_back(row->normalized_objective);
      for (const MetricsRow* row : rows) {
        out << to_string(a) << ',' << row->replica << ','
            << format_double(row->normalized_objective) << ','
            << format_double(cdf_at(sorted, row->normalized_objective)) << '\n';
      }
    }
    close_csv(out, path);
  }

  for (const bool accuracy : {true, false}) {
    const auto path = dir / (accuracy ? "accuracy.csv" : "loss.csv");
    auto out = open_csv(path);
    out << "algorithm,replica,round," << (accuracy ? "accuracy" : "loss") << '\n';
    for (Algorithm a : table.algorithms) {
      for (const MetricsRow& row : table.rows) {
        if (row.algorithm != a || !row.ok) continue;
        const auto& series = accuracy ? row.accuracy : row.loss;
        for (std::size_t t = 0; t < series.size(); ++t) {
          out << to_string(a) << ',' << row.replica << ',' << t << ','
              << format_double(series[t]) << '\n';
        }
      }
    }
    close_csv(out, path);
  }

  {
    struct Entry {
      std::size_t algorithm_index;
      int replica;
      UserLeakage user;
      double cdf;
    };
    std::vector<Entry> entries;
    for (std::size_t k = 0; k < table.algorithms.size(); ++k) {
      std::vector<double> sorted;
      for (const MetricsRow& row : table.rows) {
        if (row.algorithm != table.algorithms[k] || !row.ok) continue;
        for (const UserLeakage& u : row.leakage) sorted.push_back(u.rho);
      }
      std::sort(sorted.begin(), sorted.end());
      for (const MetricsRow& row : table.rows) {
        if (row.algorithm != table.algorithms[k] || !row.ok) continue;
        for (const UserLeakage& u : row.leakage) {
          entries.push_back(Entry{k, row.replica, u, cdf_at(sorted, u.rho)});
        }
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
      if (x.user.rho != y.user.rho) return x.user.rho < y.user.rho;
      if (x.algorithm_index != y.algorithm_index) return x.algorithm_index < y.algorithm_index;
      if (x.replica != y.replica) return x.replica < y.replica;
      return x.user.user < y.user.user;
    });
    const auto path = dir / "leakage_cdf.csv";
    auto out = open_csv(path);
    out << "algorithm,replica,cell,user,rho,cdf\n";
    for (const Entry& e : entries) {
      out << to_string(table.algorithms[e.algorithm_index]) << ',' << e.replica << ','
          << e.user.cell << ',' << e.user.user << ',' << format_double(e.user.rho) << ','
          << format_double(e.cdf) << '\n';
    }
    close_csv(out, path);
  }

  {
    const auto path = dir / "bounds.csv";
    auto out = open_csv(path);
    out << "algorithm,replica,c1,c2,c3,converges\n";
    for (Algorithm a : table.algorithms) {
      for (const MetricsRow& row : table.rows) {
        if (row.algorithm != a || !row.ok) continue;
        out << to_string(a) << ',' << row.replica << ',' << format_double(row.bounds.c1) << ','
            << format_double(row.bounds.c2) << ',' << format_double(row.bounds.c3) << ','
            << (row.bounds.converges ? 1 : 0) << '\n';
      }
    }
    close_csv(out, path);
  }

  const bool any_failure =
      std::any_of(table.rows.begin(), table.rows.end(), [](const MetricsRow& r) { return !r.ok; });
  const auto failures = dir / "failures.csv";
  if (any_failure) {
    auto out = open_csv(failures);
    out << "algorithm,replica,seed,error\n";
    for (const MetricsRow& row : table.rows) {
      if (row.ok) continue;
      out << to_string(row.algorithm) << ',' << row.replica << ',' << row.seed << ','
          << csv_field(row.error) << '\n';
    }
    close_csv(out, failures);
  } else {
    std::filesystem::remove(failures);
  }
}

}  // namespace fedcell
