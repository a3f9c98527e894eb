#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "fedcell/config.hpp"
#include "fedcell/topology.hpp"

namespace fedcell {

inline constexpr int kUnscheduled = -1;

// Per-user resource block, transmit power and DP-noise deviation. Holding one
// RB index per user makes "at most one RB per user" structural; the per-cell
// binary matrix r_{s,i}^{(n)} is available through `rb_indicator`.
struct Allocation {
  std::vector<int> rb;        // user -> RB index in [0, R), or kUnscheduled
  std::vector<double> power;  // W
  std::vector<double> sigma;  // noise standard deviation, model-space units

  explicit Allocation(int users = 0)
      : rb(static_cast<std::size_t>(users), kUnscheduled),
        power(static_cast<std::size_t>(users), 0.0),
        sigma(static_cast<std::size_t>(users), 0.0) {}

  int num_users() const { return static_cast<int>(rb.size()); }
  bool scheduled(int user) const { return rb[static_cast<std::size_t>(user)] != kUnscheduled; }
  int rb_of(int user) const { return rb[static_cast<std::size_t>(user)]; }
  double power_of(int user) const { return power[static_cast<std::size_t>(user)]; }
  double sigma_of(int user) const { return sigma[static_cast<std::size_t>(user)]; }
  int scheduled_count() const;

  // r_{s,i}^{(n)} for the i-th member of `cell` (local row order of cell_users).
  int rb_indicator(const Topology& topo, int cell, int local_user, int n) const;

  void unschedule(int user) {
    rb[static_cast<std::size_t>(user)] = kUnscheduled;
    power[static_cast<std::size_t>(user)] = 0.0;
  }
};

// Throws std::logic_error when RB exclusivity inside a cell, the RB range, the
// power box or the zero-power-when-idle rule is violated. With
// `check_noise_floor`, also requires K * sigma >= n_min for scheduled users.
void check_allocation(const Topology& topo, const Allocation& alloc, const SystemConfig& config,
                      bool check_noise_floor = true);

// 2^(r_min / B) - 1: the SINR that delivers exactly r_min on one RB.
double sinr_threshold(const SystemConfig& config);

// Received power at base station `victim_cell` on RB `n` from co-channel users
// of every other cell, using each interferer's gain towards the victim.
double interference(const Topology& topo, const Allocation& alloc, int victim_cell, int n);

// Uplink rate of `user` towards its own base station (bit/s); 0 if idle.
double uplink_rate(const Topology& topo, const Allocation& alloc, const SystemConfig& config,
                   int user);

// Power that makes `user` hit r_min on `n` exactly, other powers fixed.
double required_power_on(const Topology& topo, const Allocation& alloc,
                         const SystemConfig& config, int user, int n);

// As above on the user's current RB; 0 for an unscheduled user.
double required_power(const Topology& topo, const Allocation& alloc, const SystemConfig& config,
                      int user);

// The coupled rate-equality system A p = b over all scheduled users.
struct PowerSystem {
  std::vector<int> users;  // unknown k <-> users[k]
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};
PowerSystem build_power_system(const Topology& topo, const Allocation& alloc,
                               const SystemConfig& config);
void write_power_system_csv(std::ostream& out, const PowerSystem& system);

struct PowerSolution {
  std::vector<double> power;  // per user, W; 0 for unscheduled users
  double residual = 0.0;      // ||A p - b||_1 in W
  int iterations = 0;
};

// L1-minimal solution of the rate-equality system under 0 <= p <= p_max.
// Throws SolverError if the inner LP does not converge.
PowerSolution solve_powers(const Topology& topo, const Allocation& alloc,
                           const SystemConfig& config);

// Relative slack accepted when comparing a rate against r_min.
inline constexpr double kRateTolerance = 1e-6;

// Unschedules (and zeroes the power of) every user whose rate misses r_min,
// repeating until no further user fails.
Allocation enforce_rate(const Topology& topo, const Allocation& alloc,
                        const SystemConfig& config);

}  // namespace fedcell
