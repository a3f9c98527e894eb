#include "fedcell/dp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fedcell/scheduler.hpp"

namespace fedcell {
namespace {

constexpr int kMaxBisection = 200;
constexpr double kBisectionTol = 1e-12;
constexpr double kResidualTol = 1e-8;

double clamped_sigma(double k, double multiplier, double n_min) {
  return std::max(std::pow(k * k * k * multiplier, -0.25), n_min / k);
}

}  // namespace

double leakage(int rounds, double clip, double samples, double sigma) {
  if (samples < 1.0) throw std::invalid_argument("leakage: K must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("leakage: sigma must be > 0");
  const double ks = samples * sigma;
  return 2.0 * rounds * clip * clip / (ks * ks);
}

LeakageReport leakage_report(const Topology& topo, const Allocation& alloc,
                             const SystemConfig& config) {
  LeakageReport report;
  report.rounds = config.rounds;
  report.clip = config.clip;
  double inverse_sum = 0.0;
  for (int u = 0; u < topo.num_users(); ++u) {
    if (!alloc.scheduled(u)) continue;
    const double k = topo.samples[static_cast<std::size_t>(u)];
    const double rho = leakage(config.rounds, config.clip, k, alloc.sigma_of(u));
    report.users.push_back(UserLeakage{u, topo.cell_of(u), rho});
    const double ks = k * alloc.sigma_of(u);
    inverse_sum += 1.0 / (ks * ks);
  }
  report.total = 2.0 * config.rounds * config.clip * config.clip * inverse_sum;
  return report;
}

double total_leakage(const Topology& topo, const Allocation& alloc, const SystemConfig& config) {
  return leakage_report(topo, alloc, config).total;
}

double noise_constraint_lhs(const Topology& topo, const Allocation& alloc,
                            const SystemConfig& config, double multiplier) {
  double total = 0.0;
  for (int u = 0; u < topo.num_users(); ++u) {
    if (!alloc.scheduled(u)) continue;
    const double k = topo.samples[static_cast<std::size_t>(u)];
    const double s = clamped_sigma(k, multiplier, config.n_min);
    total += k * s * s;
  }
  return total;
}

NoiseSolution optimize_noise(const Topology& topo, const Allocation& alloc,
                             const SystemConfig& config) {
  double budget = 0.0;  // V sum K a
  double floor = 0.0;   // constraint value with every user at the n_min floor
  for (int u = 0; u < topo.num_users(); ++u) {
    if (!alloc.scheduled(u)) continue;
    const double k = topo.samples[static_cast<std::size_t>(u)];
    budget += config.v_max * k;
    floor += config.n_min * config.n_min / k;
  }
  if (budget == 0.0) throw std::invalid_argument("optimize_noise: no scheduled user");
  if (floor > budget * (1.0 + kResidualTol)) {
    throw InfeasibleError("noise floor " + std::to_string(floor) +
                          " exceeds the aggregate-noise budget " + std::to_string(budget));
  }

  auto lhs = [&](double kappa) { return noise_constraint_lhs(topo, alloc, config, kappa); };

  NoiseSolution out;
  double kappa = 1.0;
  if (floor >= budget) {
    // Every user sits on the floor; any multiplier past the last kink works.
    kappa = 0.0;
    for (int u = 0; u < topo.num_users(); ++u) {
      if (!alloc.scheduled(u)) continue;
      const double k = topo.samples[static_cast<std::size_t>(u)];
      kappa = std::max(kappa, std::pow(k / config.n_min, 4.0) / (k * k * k));
    }
  } else {
    // Bracket in log space: lhs is nonincreasing in kappa.
    double lo = 1.0;
    double hi = 1.0;
    while (lhs(lo) < budget) lo *= 0.5;
    while (lhs(hi) > budget) hi *= 2.0;
    double log_lo = std::log(lo);
    double log_hi = std::log(hi);
    int it = 0;
    for (; it < kMaxBisection && log_hi - log_lo > kBisectionTol; ++it) {
      const double mid = 0.5 * (log_lo + log_hi);
      if (lhs(std::exp(mid)) > budget) log_lo = mid;
      else log_hi = mid;
    }
    out.iterations = it;
    kappa = std::exp(0.5 * (log_lo + log_hi));

    // Polish on the linear piece selected by bisection: with y = kappa^(-1/2),
    // lhs = y * sum_free K^(-1/2) + sum_clamped n_min^2 / K, so equality has a
    // closed form once the clamp set is known.
    double free_coef = 0.0;
    double clamped = 0.0;
    for (int u = 0; u < topo.num_users(); ++u) {
      if (!alloc.scheduled(u)) continue;
      const double k = topo.samples[static_cast<std::size_t>(u)];
      if (std::pow(k * k * k * kappa, -0.25) > config.n_min / k) free_coef += 1.0 / std::sqrt(k);
      else clamped += config.n_min * config.n_min / k;
    }
    if (free_coef > 0.0) {
      const double y = (budget - clamped) / free_coef;
      const double polished = 1.0 / (y * y);
      if (std::isfinite(polished) && polished > 0.0 &&
          std::abs(lhs(polished) - budget) <= std::abs(lhs(kappa) - budget)) {
        kappa = polished;
      }
    }
  }

  out.multiplier = kappa;
  out.sigma.assign(static_cast<std::size_t>(topo.num_users()), 0.0);
  for (int u = 0; u < topo.num_users(); ++u) {
    if (!alloc.scheduled(u)) continue;
    const double k = topo.samples[static_cast<std::size_t>(u)];
    out.sigma[static_cast<std::size_t>(u)] = clamped_sigma(k, kappa, config.n_min);
  }
  double achieved = 0.0;
  for (int u = 0; u < topo.num_users(); ++u) {
    const double k = topo.samples[static_cast<std::size_t>(u)];
    const double s = out.sigma[static_cast<std::size_t>(u)];
    if (alloc.scheduled(u)) achieved += k * s * s;
  }
  out.residual = std::abs(achieved - budget) / budget;
  if (floor < budget && out.residual > kResidualTol) {
    throw std::runtime_error("optimize_noise: equality residual " + std::to_string(out.residual) +
                             " above tolerance");
  }
  return out;
}

Allocation opt_sched_dp(const Topology& topo, const SystemConfig& config, std::uint64_t seed) {
  Allocation alloc = opt_sched(topo, config, seed);
  alloc.sigma = optimize_noise(topo, alloc, config).sigma;
  return alloc;
}

}  // namespace fedcell
