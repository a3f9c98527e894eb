#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "fedcell/config.hpp"
#include "fedcell/radio.hpp"
#include "fedcell/topology.hpp"

namespace fedcell {

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One cell's scheduling problem with every other cell frozen.
struct CellProblem {
  int cell = 0;
  int num_rbs = 0;
  std::vector<int> users;       // global ids, ascending (local row order)
  std::vector<double> samples;  // K per local user
  std::vector<double> sigma;    // current noise deviation per local user
  Eigen::MatrixXd required_power;  // local user x RB, W
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> feasible;  // required_power <= p_max
  double foreign_noise = 0.0;    // sum over other cells of K sigma^2 a
  double foreign_samples = 0.0;  // sum over other cells of K a
  double gamma = 0.0;
  double v_max = 0.0;

  int size() const { return static_cast<int>(users.size()); }
  // Right-hand slack of the aggregate-noise constraint left for this cell:
  // sum_i K_i (sigma_i^2 - V) a_i must not exceed it.
  double noise_slack() const { return v_max * foreign_samples - foreign_noise; }
};

enum class Optimality { kExact, kHeuristic };

struct ScheduleSolution {
  std::vector<int> rb;  // local user -> RB or kUnscheduled
  double objective = 0.0;  // this cell's share of the global objective
  Optimality optimality = Optimality::kExact;
  long long nodes = 0;
};

CellProblem build_cell_problem(const Topology& topo, const Allocation& alloc, int cell,
                               const SystemConfig& config);

// Per-cell objective sum_i K_i (1 - a_i) + gamma sum_i a_i / (K_i sigma_i)^2
// for the local schedule `rb`.
double cell_objective(const CellProblem& problem, const std::vector<int>& rb);

// Exact minimizer of the per-cell objective over binary RB matrices subject to
// RB exclusivity, one RB per user, per-pair power feasibility and the
// aggregate-noise constraint. Branch and bound over the scheduled user set,
// with a bipartite-matching test for RB feasibility. When `node_limit` is hit
// the best schedule found so far is returned, flagged kHeuristic.
ScheduleSolution solve_cell_schedule(const CellProblem& problem, long long node_limit = 50'000'000);

// Shuffled round-robin RBs, uniform powers in [0, p_max] and K*sigma uniform in
// [n_min, 6 n_min], then made consistent with the aggregate-noise constraint.
Allocation initial_allocation(const Topology& topo, const SystemConfig& config,
                              std::uint64_t seed);

// Random scheduler: initialization, L1 power solve, rate enforcement.
Allocation rnd_sched(const Topology& topo, const SystemConfig& config, std::uint64_t seed);

// Optimal scheduler: initialization, config.sweeps passes of per-cell exact
// scheduling in ascending cell order (a cell with no feasible schedule keeps
// its current one), L1 power solve, rate enforcement.
Allocation opt_sched(const Topology& topo, const SystemConfig& config, std::uint64_t seed);

// Global objective sum K (1 - a) + gamma sum a / (K sigma)^2. Throws
// std::domain_error if a scheduled user has sigma <= 0.
double objective_value(const Topology& topo, const Allocation& alloc,
                       const SystemConfig& config);
double normalized_objective(const Topology& topo, const Allocation& alloc,
                            const SystemConfig& config);

}  // namespace fedcell
