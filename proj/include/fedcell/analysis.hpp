#pragma once

#include "fedcell/config.hpp"
#include "fedcell/radio.hpp"
#include "fedcell/topology.hpp"

namespace fedcell {

// Per-round contraction and offset constants of the optimality-gap bound:
//   gap(t+1) <= c1 * gap(t) + c2 + c3.
struct BoundConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  bool converges = false;  // c1 < 1
};

// Uses config.mu, config.lipschitz, config.xi1, config.xi2 as given; nothing
// checks that the model actually satisfies those constants. Throws
// std::invalid_argument if nobody is scheduled.
BoundConstants evaluate_bound(const Topology& topo, const Allocation& alloc,
                              const SystemConfig& config, long long model_dimension);

// Same constants from the unscheduled-sample mass sum K (1 - a) alone
// (c3 left at 0).
BoundConstants bound_from_unscheduled(double unscheduled_samples, double total_samples,
                                      const SystemConfig& config);

// sum K sigma^2 a <= V sum K a, with 1e-9 relative slack for round-off.
bool c3_constraint_check(const Topology& topo, const Allocation& alloc,
                         const SystemConfig& config);

}  // namespace fedcell
