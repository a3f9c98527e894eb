#include "fedcell/analysis.hpp"

#include <stdexcept>

namespace fedcell {

BoundConstants bound_from_unscheduled(double unscheduled_samples, double total_samples,
                                      const SystemConfig& config) {
  const double mass = unscheduled_samples * unscheduled_samples;
  const double k2 = total_samples * total_samples;
  BoundConstants b;
  b.c1 = 1.0 - config.mu / config.lipschitz + 4.0 * config.xi2 / k2 * mass;
  b.c2 = 2.0 * config.xi1 / (config.lipschitz * k2) * mass;
  b.converges = b.c1 < 1.0;
  return b;
}

BoundConstants evaluate_bound(const Topology& topo, const Allocation& alloc,
                              const SystemConfig& config, long long model_dimension) {
  double total = 0.0;
  double unscheduled = 0.0;
  double active = 0.0;
  for (int u = 0; u < topo.num_users(); ++u) {
    const double k = topo.samples[static_cast<std::size_t>(u)];
    total += k;
    if (alloc.scheduled(u)) active += k;
    else unscheduled += k;
  }
  if (active <= 0.0) throw std::invalid_argument("evaluate_bound: no scheduled samples");

  BoundConstants b = bound_from_unscheduled(unscheduled, total, config);
  double noise = 0.0;
  for (int u = 0; u < topo.num_users(); ++u) {
    if (!alloc.scheduled(u)) continue;
    const double k = topo.samples[static_cast<std::size_t>(u)];
    const double term = k * alloc.sigma_of(u) / active;
    noise += term * term;
  }
  b.c3 = static_cast<double>(model_dimension) / (2.0 * config.lipschitz) * noise;
  return b;
}

bool c3_constraint_check(const Topology& topo, const Allocation& alloc,
                         const SystemConfig& config) {
  double lhs = 0.0;
  double rhs = 0.0;
  for (int u = 0; u < topo.num_users(); ++u) {
    if (!alloc.scheduled(u)) continue;
    const double k = topo.samples[static_cast<std::size_t>(u)];
    const double s = alloc.sigma_of(u);
    lhs += k * s * s;
    rhs += config.v_max * k;
  }
  return lhs <= rhs * (1.0 + 1e-9);
}

}  // namespace fedcell
