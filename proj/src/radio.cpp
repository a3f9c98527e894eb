#include "fedcell/radio.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

#include "fedcell/simplex.hpp"

namespace fedcell {

int Allocation::scheduled_count() const {
  return static_cast<int>(std::count_if(rb.begin(), rb.end(),
                                        [](int n) { return n != kUnscheduled; }));
}

int Allocation::rb_indicator(const Topology& topo, int cell, int local_user, int n) const {
  const int user = topo.cell_users[static_cast<std::size_t>(cell)][static_cast<std::size_t>(local_user)];
  return rb_of(user) == n ? 1 : 0;
}

void check_allocation(const Topology& topo, const Allocation& alloc, const SystemConfig& config,
                      bool check_noise_floor) {
  if (alloc.num_users() != topo.num_users()) {
    throw std::logic_error("allocation size does not match topology");
  }
  std::vector<int> owner(static_cast<std::size_t>(topo.num_cells() * config.num_rbs), -1);
  for (int u = 0; u < alloc.num_users(); ++u) {
    const double p = alloc.power_of(u);
    if (!(p >= 0.0 && p <= config.p_max * (1.0 + 1e-12))) {
      throw std::logic_error("power of user " + std::to_string(u) + " outside [0, p_max]");
    }
    if (!alloc.scheduled(u)) {
      if (p != 0.0) throw std::logic_error("idle user " + std::to_string(u) + " has power");
      continue;
    }
    const int n = alloc.rb_of(u);
    if (n < 0 || n >= config.num_rbs) {
      throw std::logic_error("user " + std::to_string(u) + " has RB out of range");
    }
    auto& slot = owner[static_cast<std::size_t>(topo.cell_of(u) * config.num_rbs + n)];
    if (slot != -1) {
      throw std::logic_error("RB " + std::to_string(n) + " used twice in cell " +
                             std::to_string(topo.cell_of(u)));
    }
    slot = u;
    if (check_noise_floor) {
      const double k = topo.samples[static_cast<std::size_t>(u)];
      if (!(k * alloc.sigma_of(u) >= config.n_min * (1.0 - 1e-12))) {
        throw std::logic_error("user " + std::to_string(u) + " below the noise floor");
      }
    }
  }
}

double sinr_threshold(const SystemConfig& config) {
  return std::exp2(config.r_min / config.bandwidth) - 1.0;
}

double interference(const Topology& topo, const Allocation& alloc, int victim_cell, int n) {
  double total = 0.0;
  for (int u = 0; u < topo.num_users(); ++u) {
    if (topo.cell_of(u) == victim_cell || alloc.rb_of(u) != n) continue;
    total += topo.gain(victim_cell, u) * alloc.power_of(u);
  }
  return total;
}

double uplink_rate(const Topology& topo, const Allocation& alloc, const SystemConfig& config,
                   int user) {
  const int n = alloc.rb_of(user);
  if (n == kUnscheduled) return 0.0;
  const int cell = topo.cell_of(user);
  const double noise = config.bandwidth * config.noise_psd;
  const double sinr =
      alloc.power_of(user) * topo.own_gain(user) / (interference(topo, alloc, cell, n) + noise);
  return config.bandwidth * std::log2(1.0 + sinr);
}

double required_power_on(const Topology& topo, const Allocation& alloc,
                         const SystemConfig& config, int user, int n) {
  const int cell = topo.cell_of(user);
  const double noise = config.bandwidth * config.noise_psd;
  return sinr_threshold(config) * (interference(topo, alloc, cell, n) + noise) /
         topo.own_gain(user);
}

double required_power(const Topology& topo, const Allocation& alloc, const SystemConfig& config,
                      int user) {
  const int n = alloc.rb_of(user);
  if (n == kUnscheduled) return 0.0;
  return required_power_on(topo, alloc, config, user, n);
}

PowerSystem build_power_system(const Topology& topo, const Allocation& alloc,
                               const SystemConfig& config) {
  PowerSystem sys;
  for (int u = 0; u < alloc.num_users(); ++u) {
    if (alloc.scheduled(u)) sys.users.push_back(u);
  }
  const auto k = static_cast<Eigen::Index>(sys.users.size());
  const double theta = sinr_threshold(config);
  const double noise = config.bandwidth * config.noise_psd;
  sys.a = Eigen::MatrixXd::Identity(k, k);
  sys.b.resize(k);
  for (Eigen::Index row = 0; row < k; ++row) {
    const int u = sys.users[static_cast<std::size_t>(row)];
    const int cell = topo.cell_of(u);
    const double own = topo.own_gain(u);
    sys.b(row) = theta * noise / own;
    for (Eigen::Index col = 0; col < k; ++col) {
      const int v = sys.users[static_cast<std::size_t>(col)];
      if (topo.cell_of(v) == cell || alloc.rb_of(v) != alloc.rb_of(u)) continue;
      sys.a(row, col) = -theta * topo.gain(cell, v) / own;
    }
  }
  return sys;
}

void write_power_system_csv(std::ostream& out, const PowerSystem& system) {
  out << "row,user";
  for (int v : system.users) out << ",a_" << v;
  out << ",b\n";
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < system.a.rows(); ++r) {
    out << r << ',' << system.users[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < system.a.cols(); ++c) out << ',' << system.a(r, c);
    out << ',' << system.b(r) << '\n';
  }
}

PowerSolution solve_powers(const Topology& topo, const Allocation& alloc,
                           const SystemConfig& config) {
  const PowerSystem sys = build_power_system(topo, alloc, config);
  PowerSolution out;
  out.power.assign(static_cast<std::size_t>(alloc.num_users()), 0.0);
  if (sys.users.empty()) return out;

  // Solve in units of p_max so that the box is [0, 1].
  const L1BoxResult l1 = minimize_l1_box(sys.a, sys.b / config.p_max, 1.0);
  const Eigen::VectorXd p = l1.x * config.p_max;
  for (std::size_t k = 0; k < sys.users.size(); ++k) {
    out.power[static_cast<std::size_t>(sys.users[k])] = p(static_cast<Eigen::Index>(k));
  }
  out.residual = (sys.a * p - sys.b).lpNorm<1>();
  out.iterations = l1.iterations;
  return out;
}

Allocation enforce_rate(const Topology& topo, const Allocation& alloc,
                        const SystemConfig& config) {
  Allocation out = alloc;
  const double floor = config.r_min * (1.0 - kRateTolerance);
  for (;;) {
    std::vector<int> failing;
    for (int u = 0; u < out.num_users(); ++u) {
      if (out.scheduled(u) && uplink_rate(topo, out, config, u) < floor) failing.push_back(u);
    }
    if (failing.empty()) break;
    for (int u : failing) out.unschedule(u);
  }
  return out;
}

}  // namespace fedcell
