#include "fedcell/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fedcell/rng.hpp"

namespace fedcell {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Kuhn's augmenting-path matching of `chosen` local users onto feasible RBs.
// Users are processed in the given order and RBs are tried in ascending order,
// so the assignment is deterministic. Returns false if no complete matching
// exists; otherwise fills `rb_owner` (RB -> position in `chosen`).
class RbMatcher {
 public:
  explicit RbMatcher(const CellProblem& problem) : problem_(problem) {}

  bool match(const std::vector<int>& chosen, std::vector<int>& rb_owner) {
    rb_owner.assign(static_cast<std::size_t>(problem_.num_rbs), -1);
    if (static_cast<int>(chosen.size()) > problem_.num_rbs) return false;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      visited_.assign(static_cast<std::size_t>(problem_.num_rbs), false);
      if (!augment(chosen, static_cast<int>(k), rb_owner)) return false;
    }
    return true;
  }

 private:
  bool augment(const std::vector<int>& chosen, int k, std::vector<int>& rb_owner) {
    const int user = chosen[static_cast<std::size_t>(k)];
    for (int n = 0; n < problem_.num_rbs; ++n) {
      if (!problem_.feasible(user, n) || visited_[static_cast<std::size_t>(n)]) continue;
      visited_[static_cast<std::size_t>(n)] = true;
      int& owner = rb_owner[static_cast<std::size_t>(n)];
      if (owner == -1 || augment(chosen, owner, rb_owner)) {
        owner = k;
        return true;
      }
    }
    return false;
  }

  const CellProblem& problem_;
  std::vector<bool> visited_;
};

class CellSearch {
 public:
  CellSearch(const CellProblem& problem, long long node_limit)
      : problem_(problem), matcher_(problem), node_limit_(node_limit) {
    const int n = problem.size();
    coef_.resize(static_cast<std::size_t>(n));
    weight_.resize(static_cast<std::size_t>(n));
    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
      const double k = problem.samples[static_cast<std::size_t>(i)];
      const double s = problem.sigma[static_cast<std::size_t>(i)];
      const double ks = k * s;
      coef_[static_cast<std::size_t>(i)] = ks > 0.0 ? -k + problem.gamma / (ks * ks) : kInf;
      weight_[static_cast<std::size_t>(i)] = k * (s * s - problem.v_max);
      scale += k;
      bool any = false;
      for (int r = 0; r < problem.num_rbs; ++r) any = any || problem.feasible(i, r);
      if (any && std::isfinite(coef_[static_cast<std::size_t>(i)])) order_.push_back(i);
    }
    tol_ = 1e-12 * scale;
    slack_tol_ = 1e-9 * (std::abs(problem.v_max * problem.foreign_samples) +
                         std::abs(problem.foreign_noise) + 1.0);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return coef_[static_cast<std::size_t>(a)] < coef_[static_cast<std::size_t>(b)];
    });
  }

  ScheduleSolution run() {
    const double slack = problem_.noise_slack();
    if (slack >= -slack_tol_) {
      best_value_ = 0.0;  // empty schedule
    }
    std::vector<int> chosen;
    dfs(0, chosen, 0.0, 0.0);
    if (!std::isfinite(best_value_)) {
      throw InfeasibleError("cell " + std::to_string(problem_.cell) +
                            ": no schedule satisfies the aggregate-noise constraint");
    }
    ScheduleSolution sol;
    sol.rb.assign(static_cast<std::size_t>(problem_.size()), kUnscheduled);
    std::vector<int> set = best_set_;
    std::sort(set.begin(), set.end());
    std::vector<int> rb_owner;
    matcher_.match(set, rb_owner);
    for (int n = 0; n < problem_.num_rbs; ++n) {
      const int k = rb_owner[static_cast<std::size_t>(n)];
      if (k >= 0) sol.rb[static_cast<std::size_t>(set[static_cast<std::size_t>(k)])] = n;
    }
    sol.objective = cell_objective(problem_, sol.rb);
    sol.optimality = truncated_ ? Optimality::kHeuristic : Optimality::kExact;
    sol.nodes = nodes_;
    return sol;
  }

 private:
  void dfs(std::size_t pos, std::vector<int>& chosen, double value, double weight) {
    if (++nodes_ > node_limit_) {
      truncated_ = true;
      return;
    }
    const double slack = problem_.noise_slack();
    if (weight <= slack + slack_tol_ && value < best_value_ - tol_) {
      best_value_ = value;
      best_set_ = chosen;
    }
    const int slots = problem_.num_rbs - static_cast<int>(chosen.size());
    if (pos >= order_.size() || slots <= 0) return;

    // Optimistic completion: the most negative coefficients and the most
    // negative weights still available, each within the slot budget.
    double value_bound = value;
    int taken = 0;
    for (std::size_t j = pos; j < order_.size() && taken < slots; ++j) {
      const double c = coef_[static_cast<std::size_t>(order_[j])];
      if (c >= 0.0) break;
      value_bound += c;
      ++taken;
    }
    if (value_bound >= best_value_ - tol_) return;

    scratch_.clear();
    for (std::size_t j = pos; j < order_.size(); ++j) {
      const double w = weight_[static_cast<std::size_t>(order_[j])];
      if (w < 0.0) scratch_.push_back(w);
    }
    const auto keep = std::min<std::size_t>(scratch_.size(), static_cast<std::size_t>(slots));
    std::partial_sort(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(keep),
                      scratch_.end());
    const double weight_bound =
        weight + std::accumulate(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(keep), 0.0);
    if (weight_bound > slack + slack_tol_) return;

    const int user = order_[pos];
    chosen.push_back(user);
    if (matcher_.match(chosen, rb_owner_)) {
      dfs(pos + 1, chosen, value + coef_[static_cast<std::size_t>(user)],
          weight + weight_[static_cast<std::size_t>(user)]);
    }
    chosen.pop_back();
    dfs(pos + 1, chosen, value, weight);
  }

  const CellProblem& problem_;
  RbMatcher matcher_;
  long long node_limit_;
  std::vector<double> coef_;    // objective change when scheduling the user
  std::vector<double> weight_;  // contribution to the aggregate-noise constraint
  std::vector<int> order_;      // candidate users, most beneficial first
  std::vector<double> scratch_;
  std::vector<int> rb_owner_;
  std::vector<int> best_set_;
  double best_value_ = kInf;
  double tol_ = 0.0;
  double slack_tol_ = 0.0;
  long long nodes_ = 0;
  bool truncated_ = false;
};

double sample_count(const Topology& topo, int user) {
  return static_cast<double>(topo.samples[static_cast<std::size_t>(user)]);
}

// Finalizes a schedule: L1 powers, then rate enforcement.
Allocation finish(const Topology& topo, Allocation alloc, const SystemConfig& config) {
  const PowerSolution powers = solve_powers(topo, alloc, config);
  alloc.power = powers.power;
  return enforce_rate(topo, alloc, config);
}

}  // namespace

CellProblem build_cell_problem(const Topology& topo, const Allocation& alloc, int cell,
                               const SystemConfig& config) {
  CellProblem p;
  p.cell = cell;
  p.num_rbs = config.num_rbs;
  p.gamma = config.gamma;
  p.v_max = config.v_max;
  p.users = topo.cell_users[static_cast<std::size_t>(cell)];
  const int n = p.size();
  p.samples.resize(static_cast<std::size_t>(n));
  p.sigma.resize(static_cast<std::size_t>(n));
  p.required_power.resize(n, config.num_rbs);
  p.feasible.resize(n, config.num_rbs);
  for (int i = 0; i < n; ++i) {
    const int u = p.users[static_cast<std::size_t>(i)];
    p.samples[static_cast<std::size_t>(i)] = sample_count(topo, u);
    p.sigma[static_cast<std::size_t>(i)] = alloc.sigma_of(u);
  }
  // The interference on RB r seen by this cell does not depend on which of its
  // own users transmits, so evaluate it once per RB.
  const double theta = sinr_threshold(config);
  const double noise = config.bandwidth * config.noise_psd;
  for (int r = 0; r < config.num_rbs; ++r) {
    const double received = interference(topo, alloc, cell, r) + noise;
    for (int i = 0; i < n; ++i) {
      const int u = p.users[static_cast<std::size_t>(i)];
      const double power = theta * received / topo.own_gain(u);
      p.required_power(i, r) = power;
      p.feasible(i, r) = power <= config.p_max;
    }
  }
  for (int u = 0; u < topo.num_users(); ++u) {
    if (topo.cell_of(u) == cell || !alloc.scheduled(u)) continue;
    const double k = sample_count(topo, u);
    const double s = alloc.sigma_of(u);
    p.foreign_noise += k * s * s;
    p.foreign_samples += k;
  }
  return p;
}

double cell_objective(const CellProblem& problem, const std::vector<int>& rb) {
  double total = 0.0;
  for (int i = 0; i < problem.size(); ++i) {
    const double k = problem.samples[static_cast<std::size_t>(i)];
    if (rb[static_cast<std::size_t>(i)] == kUnscheduled) {
      total += k;
    } else {
      const double ks = k * problem.sigma[static_cast<std::size_t>(i)];
      total += problem.gamma / (ks * ks);
    }
  }
  return total;
}

ScheduleSolution solve_cell_schedule(const CellProblem& problem, long long node_limit) {
  return CellSearch(problem, node_limit).run();
}

Allocation initial_allocation(const Topology& topo, const SystemConfig& config,
                              std::uint64_t seed) {
  const int users = topo.num_users();
  Allocation alloc(users);
  Rng rng = make_rng(seed, Stream::kInitialization);

  for (int s = 0; s < topo.num_cells(); ++s) {
    std::vector<int> members = topo.cell_users[static_cast<std::size_t>(s)];
    std::shuffle(members.begin(), members.end(), rng);
    const int slots = std::min<int>(config.num_rbs, static_cast<int>(members.size()));
    for (int n = 0; n < slots; ++n) alloc.rb[static_cast<std::size_t>(members[static_cast<std::size_t>(n)])] = n;
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> spread(static_cast<std::size_t>(users));
  for (int u = 0; u < users; ++u) {
    const double p = unit(rng) * config.p_max;
    spread[static_cast<std::size_t>(u)] = unit(rng);
    alloc.power[static_cast<std::size_t>(u)] = alloc.scheduled(u) ? p : 0.0;
  }

  // K sigma = n_min (1 + 5 t u_i). t = 1 is the plain uniform draw on
  // [n_min, 6 n_min]; if that breaks the aggregate-noise constraint, t is
  // lowered to the largest value that satisfies it, and if even t = 0 fails,
  // the users with the largest excess are dropped from the schedule.
  auto noise_terms = [&](double& a0, double& a1, double& a2, double& budget) {
    a0 = a1 = a2 = budget = 0.0;
    for (int u = 0; u < users; ++u) {
      if (!alloc.scheduled(u)) continue;
      const double k = sample_count(topo, u);
      const double x = 5.0 * spread[static_cast<std::size_t>(u)];
      const double scale = config.n_min * config.n_min / k;
      a0 += scale;
      a1 += scale * 2.0 * x;
      a2 += scale * x * x;
      budget += config.v_max * k;
    }
  };
  double a0, a1, a2, budget;
  noise_terms(a0, a1, a2, budget);
  while (a0 > budget) {
    int worst = -1;
    double worst_excess = -kInf;
    for (int u = 0; u < users; ++u) {
      if (!alloc.scheduled(u)) continue;
      const double k = sample_count(topo, u);
      const double excess = config.n_min * config.n_min / k - config.v_max * k;
      if (excess > worst_excess) {
        worst_excess = excess;
        worst = u;
      }
    }
    alloc.unschedule(worst);
    noise_terms(a0, a1, a2, budget);
  }
  double t = 1.0;
  if (a0 + a1 + a2 > budget) {
    // Largest root of a2 t^2 + a1 t + (a0 - budget) = 0, nudged inside.
    const double c = a0 - budget;
    const double disc = a1 * a1 - 4.0 * a2 * c;
    t = (-a1 + std::sqrt(std::max(0.0, disc))) / (2.0 * a2);
    t = std::clamp(t * (1.0 - 1e-9), 0.0, 1.0);
  }
  for (int u = 0; u < users; ++u) {
    const double k = sample_count(topo, u);
    alloc.sigma[static_cast<std::size_t>(u)] =
        config.n_min * (1.0 + 5.0 * t * spread[static_cast<std::size_t>(u)]) / k;
  }
  return alloc;
}

Allocation rnd_sched(const Topology& topo, const SystemConfig& config, std::uint64_t seed) {
  return finish(topo, initial_allocation(topo, config, seed), config);
}

Allocation opt_sched(const Topology& topo, const SystemConfig& config, std::uint64_t seed) {
  Allocation alloc = initial_allocation(topo, config, seed);
  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    for (int s = 0; s < topo.num_cells(); ++s) {
      const CellProblem problem = build_cell_problem(topo, alloc, s, config);
      ScheduleSolution sol;
      try {
        sol = solve_cell_schedule(problem);
      } catch (const InfeasibleError&) {
        // The other cells use up the noise budget and no power-feasible
        // schedule here can restore it: leave this cell as it is.
        continue;
      }
      // Newly scheduled users transmit at their rate-equality power against
      // the current interference, so later cells see up-to-date powers.
      for (int i = 0; i < problem.size(); ++i) {
        const int u = problem.users[static_cast<std::size_t>(i)];
        const int n = sol.rb[static_cast<std::size_t>(i)];
        alloc.rb[static_cast<std::size_t>(u)] = n;
        alloc.power[static_cast<std::size_t>(u)] =
            n == kUnscheduled ? 0.0 : problem.required_power(i, n);
      }
    }
  }
  return finish(topo, std::move(alloc), config);
}

double objective_value(const Topology& topo, const Allocation& alloc,
                       const SystemConfig& config) {
  double total = 0.0;
  for (int u = 0; u < topo.num_users(); ++u) {
    const double k = sample_count(topo, u);
    if (!alloc.scheduled(u)) {
      total += k;
      continue;
    }
    const double ks = k * alloc.sigma_of(u);
    if (!(ks > 0.0)) {
      throw std::domain_error("scheduled user " + std::to_string(u) + " has no DP noise");
    }
    total += config.gamma / (ks * ks);
  }
  return total;
}

double normalized_objective(const Topology& topo, const Allocation& alloc,
                            const SystemConfig& config) {
  return objective_value(topo, alloc, config) / static_cast<double>(topo.total_samples());
}

}  // namespace fedcell
