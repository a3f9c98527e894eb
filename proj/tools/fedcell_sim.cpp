// Command-line front end: batch experiments plus single-shot schedule,
// privacy and bound reports for one topology.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedcell/analysis.hpp"
#include "fedcell/config.hpp"
#include "fedcell/dp.hpp"
#include "fedcell/fl.hpp"
#include "fedcell/harness.hpp"
#include "fedcell/mlp.hpp"
#include "fedcell/radio.hpp"
#include "fedcell/scheduler.hpp"
#include "fedcell/topology.hpp"

namespace {

using namespace fedcell;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> rbs;
  std::optional<double> gamma;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON configuration file")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "base seed (overrides the config file)");
    app->add_option("--rbs", rbs, "resource blocks per cell (overrides the config file)");
    app->add_option("--gamma", gamma, "objective weight (overrides the config file)");
  }

  SystemConfig load() const {
    SystemConfig config = config_path.empty() ? SystemConfig{} : load_config(config_path);
    if (seed) config.seed = *seed;
    if (rbs) config.num_rbs = *rbs;
    if (gamma) config.gamma = *gamma;
    validate(config);
    return config;
  }
};

Allocation schedule_with(Algorithm a, const Topology& topo, const SystemConfig& config) {
  switch (a) {
    case Algorithm::kRnd: return rnd_sched(topo, config, config.seed);
    case Algorithm::kOpt: return opt_sched(topo, config, config.seed);
    case Algorithm::kOptDp: return opt_sched_dp(topo, config, config.seed);
  }
  throw std::logic_error("unhandled algorithm");
}

void write_allocation(std::ostream& out, const Topology& topo, const Allocation& alloc,
                      const SystemConfig& config) {
  out << "user,cell,samples,rb,power_w,sigma,rate_bps\n";
  for (int u = 0; u < topo.num_users(); ++u) {
    out << u << ',' << topo.cell_of(u) << ',' << topo.samples[static_cast<std::size_t>(u)] << ','
        << alloc.rb_of(u) << ',' << format_double(alloc.power_of(u)) << ','
        << format_double(alloc.sigma_of(u)) << ','
        << format_double(uplink_rate(topo, alloc, config, u)) << '\n';
  }
}

void write_cell_objectives(std::ostream& out, const Topology& topo, const Allocation& alloc,
                           const SystemConfig& config) {
  out << "cell,scheduled,unscheduled_samples,noise_term,objective\n";
  double total = 0.0;
  for (int s = 0; s < topo.num_cells(); ++s) {
    int scheduled = 0;
    double unscheduled = 0.0;
    double noise = 0.0;
    for (int u : topo.cell_users[static_cast<std::size_t>(s)]) {
      const double k = topo.samples[static_cast<std::size_t>(u)];
      if (alloc.scheduled(u)) {
        ++scheduled;
        const double ks = k * alloc.sigma_of(u);
        noise += config.gamma / (ks * ks);
      } else {
        unscheduled += k;
      }
    }
    total += unscheduled + noise;
    out << s << ',' << scheduled << ',' << format_double(unscheduled) << ','
        << format_double(noise) << ',' << format_double(unscheduled + noise) << '\n';
  }
  out << "all," << alloc.scheduled_count() << ",,," << format_double(total) << '\n';
}

std::ofstream open_file(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cell federated learning scheduling and privacy simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "replicated experiment, writes CSV tables");
  Common run_common;
  run_common.attach(run);
  std::string algorithms = "rnd,opt,opt+dp";
  std::optional<int> replicas;
  bool train_flag = false;
  bool full = false;
  int jobs = 1;
  std::string out_dir = "results";
  run->add_option("--algorithms", algorithms, "comma-separated subset of rnd,opt,opt+dp");
  run->add_option("--replicas", replicas, "number of replicas (seeds seed..seed+N-1)")
      ->check(CLI::PositiveNumber);
  run->add_flag("--train", train_flag, "also train the federated model for every allocation");
  run->add_flag("--full", full, "large replica counts (1000, or 100 with --train)");
  run->add_option("--jobs", jobs, "replicas run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory");

  // schedule
  auto* sched = app.add_subcommand("schedule", "allocation and per-cell objective of one topology");
  Common sched_common;
  sched_common.attach(sched);
  std::string sched_algorithm = "opt";
  std::string sched_out;
  std::string dump_power;
  sched->add_option("--algorithm", sched_algorithm, "rnd, opt or opt+dp")
      ->check(CLI::IsMember({"rnd", "opt", "opt+dp"}));
  sched->add_option("--out", sched_out,
                    "directory for allocation.csv and cells.csv (default: stdout)");
  sched->add_option("--dump-power-system", dump_power,
                    "write the rate-equality system A p = b of the final allocation as CSV");

  // privacy
  auto* privacy = app.add_subcommand("privacy", "per-user leakage of one topology");
  Common privacy_common;
  privacy_common.attach(privacy);
  std::string privacy_algorithm = "opt+dp";
  privacy->add_option("--algorithm", privacy_algorithm, "rnd, opt or opt+dp")
      ->check(CLI::IsMember({"rnd", "opt", "opt+dp"}));

  // bound
  auto* bound = app.add_subcommand("bound", "optimality-gap constants of one topology");
  Common bound_common;
  bound_common.attach(bound);
  std::string bound_algorithm = "opt+dp";
  bound->add_option("--algorithm", bound_algorithm, "rnd, opt or opt+dp")
      ->check(CLI::IsMember({"rnd", "opt", "opt+dp"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentSpec spec;
      spec.base = run_common.load();
      spec.seed_base = spec.base.seed;
      spec.algorithms = parse_algorithms(algorithms);
      spec.train = train_flag;
      spec.replicas = replicas ? *replicas : (train_flag ? (full ? 100 : 10) : (full ? 1000 : 100));
      spec.jobs = jobs;
      spec.output_dir = out_dir;
      const MetricsTable table = run_experiment(spec);
      emit_csv(table, spec.output_dir);
      int failed = 0;
      for (const MetricsRow& row : table.rows) failed += row.ok ? 0 : 1;
      std::cerr << "wrote " << spec.output_dir.string() << " (" << table.rows.size() << " runs, "
                << failed << " failed)\n";
    } else if (*sched) {
      const SystemConfig config = sched_common.load();
      const Topology topo = generate_topology(config, config.seed);
      const Allocation alloc = schedule_with(parse_algorithm(sched_algorithm), topo, config);
      if (sched_out.empty()) {
        write_allocation(std::cout, topo, alloc, config);
        std::cout << '\n';
        write_cell_objectives(std::cout, topo, alloc, config);
      } else {
        std::filesystem::create_directories(sched_out);
        auto a = open_file(sched_out + "/allocation.csv");
        write_allocation(a, topo, alloc, config);
        auto c = open_file(sched_out + "/cells.csv");
        write_cell_objectives(c, topo, alloc, config);
      }
      if (!dump_power.empty()) {
        auto out = open_file(dump_power);
        write_power_system_csv(out, build_power_system(topo, alloc, config));
      }
    } else if (*privacy) {
      const SystemConfig config = privacy_common.load();
      const Topology topo = generate_topology(config, config.seed);
      const Allocation alloc = schedule_with(parse_algorithm(privacy_algorithm), topo, config);
      const LeakageReport report = leakage_report(topo, alloc, config);
      std::cout << "user,cell,rho\n";
      for (const UserLeakage& u : report.users) {
        std::cout << u.user << ',' << u.cell << ',' << format_double(u.rho) << '\n';
      }
      std::cout << "total,," << format_double(report.total) << '\n';
    } else if (*bound) {
      const SystemConfig config = bound_common.load();
      const Topology topo = generate_topology(config, config.seed);
      const Allocation alloc = schedule_with(parse_algorithm(bound_algorithm), topo, config);
      const Mlp model = make_model(config, data_input_dim(config),
                                   config.dataset_dir.empty() ? config.num_classes : 10);
      const BoundConstants b = evaluate_bound(topo, alloc, config, model.parameter_count());
      std::cout << "c1,c2,c3,converges\n"
                << format_double(b.c1) << ',' << format_double(b.c2) << ','
                << format_double(b.c3) << ',' << (b.converges ? 1 : 0) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
