#pragma once

#include <cstdint>
#include <vector>

#include "fedcell/config.hpp"
#include "fedcell/radio.hpp"
#include "fedcell/topology.hpp"

namespace fedcell {

// zCDP leakage of T rounds of the Gaussian mechanism on a K-sample average with
// gradient-norm bound `clip`: 2 T (clip / (K sigma))^2. Throws
// std::invalid_argument for K < 1 or sigma <= 0.
double leakage(int rounds, double clip, double samples, double sigma);

struct UserLeakage {
  int user = 0;
  int cell = 0;
  double rho = 0.0;
};

struct LeakageReport {
  std::vector<UserLeakage> users;  // scheduled users only, ascending id
  double total = 0.0;
  int rounds = 0;
  double clip = 0.0;
};

LeakageReport leakage_report(const Topology& topo, const Allocation& alloc,
                             const SystemConfig& config);

// 2 T L^2 sum a / (K sigma)^2.
double total_leakage(const Topology& topo, const Allocation& alloc, const SystemConfig& config);

struct NoiseSolution {
  std::vector<double> sigma;  // per user; 0 for unscheduled users
  double multiplier = 0.0;    // Lagrange multiplier of the aggregate-noise constraint
  double residual = 0.0;      // relative gap of the constraint at equality
  int iterations = 0;
};

// Minimizes sum a / (K sigma)^2 subject to sum K sigma^2 a <= V sum K a and
// K sigma >= n_min for scheduled users. The multiplier is found by bisection
// on the clamped constraint function; sigma = max((K^3 kappa)^(-1/4), n_min/K).
// Throws InfeasibleError (scheduler.hpp) when even the floor violates the
// constraint, std::invalid_argument if nobody is scheduled.
NoiseSolution optimize_noise(const Topology& topo, const Allocation& alloc,
                             const SystemConfig& config);

// Left-hand side of the aggregate-noise constraint after substituting the
// clamped closed form for sigma, as a function of the multiplier.
double noise_constraint_lhs(const Topology& topo, const Allocation& alloc,
                            const SystemConfig& config, double multiplier);

// Optimal scheduler followed by the noise optimizer.
Allocation opt_sched_dp(const Topology& topo, const SystemConfig& config, std::uint64_t seed);

}  // namespace fedcell
