#pragma once

// Independent reference implementations used as test oracles.

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "fedcell/mlp.hpp"
#include "fedcell/radio.hpp"
#include "fedcell/scheduler.hpp"

namespace fedcell::testing {

// Exhaustive minimum of the per-cell objective over every RB assignment
// (each user unscheduled or on one feasible RB, no RB shared). Empty optional
// when no assignment satisfies the aggregate-noise constraint.
inline std::optional<double> brute_force_cell(const CellProblem& p) {
  const int users = p.size();
  std::vector<int> rb(static_cast<std::size_t>(users), kUnscheduled);
  std::optional<double> best;
  const double slack = p.v_max * p.foreign_samples - p.foreign_noise;
  const double tol = 1e-9 * (std::abs(p.v_max * p.foreign_samples) + std::abs(p.foreign_noise) + 1.0);

  auto visit = [&](auto&& self, int i, std::vector<bool>& used) -> void {
    if (i == users) {
      double noise = 0.0;
      double value = 0.0;
      for (int k = 0; k < users; ++k) {
        const double kk = p.samples[static_cast<std::size_t>(k)];
        const double s = p.sigma[static_cast<std::size_t>(k)];
        if (rb[static_cast<std::size_t>(k)] == kUnscheduled) {
          value += kk;
        } else {
          noise += kk * (s * s - p.v_max);
          value += p.gamma / ((kk * s) * (kk * s));
        }
      }
      if (noise <= slack + tol && (!best || value < *best)) best = value;
      return;
    }
    rb[static_cast<std::size_t>(i)] = kUnscheduled;
    self(self, i + 1, used);
    for (int n = 0; n < p.num_rbs; ++n) {
      if (used[static_cast<std::size_t>(n)] || !p.feasible(i, n)) continue;
      used[static_cast<std::size_t>(n)] = true;
      rb[static_cast<std::size_t>(i)] = n;
      self(self, i + 1, used);
      used[static_cast<std::size_t>(n)] = false;
    }
    rb[static_cast<std::size_t>(i)] = kUnscheduled;
  };
  std::vector<bool> used(static_cast<std::size_t>(p.num_rbs), false);
  visit(visit, 0, used);
  return best;
}

// Random small cell instance: mixed-sign objective coefficients and noise
// weights, random power feasibility and a foreign-cell context that sometimes
// leaves no slack at all.
inline CellProblem random_cell_problem(std::mt19937_64& rng, int max_users, int max_rbs) {
  std::uniform_int_distribution<int> users_dist(0, max_users);
  std::uniform_int_distribution<int> rbs_dist(1, max_rbs);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CellProblem p;
  p.cell = 0;
  p.num_rbs = rbs_dist(rng);
  const int users = users_dist(rng);
  p.v_max = 12.0;
  p.gamma = std::pow(10.0, 4.0 + 3.0 * unit(rng));
  p.required_power.resize(users, p.num_rbs);
  p.feasible.resize(users, p.num_rbs);
  for (int i = 0; i < users; ++i) {
    p.users.push_back(i);
    const double k = std::floor(1.0 + 300.0 * unit(rng));
    // K sigma between 50 and 2000, so sigma^2 lands on both sides of V.
    const double ks = 50.0 + 1950.0 * unit(rng);
    p.samples.push_back(k);
    p.sigma.push_back(ks / k);
    for (int n = 0; n < p.num_rbs; ++n) {
      p.required_power(i, n) = 0.02 * unit(rng);
      p.feasible(i, n) = p.required_power(i, n) <= 0.01;
    }
  }
  p.foreign_samples = 2000.0 * unit(rng);
  p.foreign_noise = p.foreign_samples * p.v_max * (0.5 + unit(rng));
  return p;
}

// Central difference of the mean loss along coordinate `k`.
inline double central_difference(const Mlp& model, const Eigen::VectorXd& w,
                                 const Eigen::MatrixXd& x, const std::vector<int>& y,
                                 Eigen::Index k, double eps = 1e-4) {
  Eigen::VectorXd plus = w;
  Eigen::VectorXd minus = w;
  plus(k) += eps;
  minus(k) -= eps;
  return (model.loss(plus, x, y) - model.loss(minus, x, y)) / (2.0 * eps);
}

// Signs of every hidden pre-activation, from an independent forward pass over
// the documented flat layout. Central differences are only meaningful when the
// pattern is unchanged across the stencil.
inline std::vector<bool> relu_pattern(const Mlp& model, const Eigen::VectorXd& w,
                                      const Eigen::MatrixXd& x) {
  const std::vector<int>& sizes = model.layer_sizes();
  std::vector<bool> pattern;
  Eigen::MatrixXd a = x;
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 2 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const Eigen::Map<const Eigen::MatrixXd> weights(w.data() + offset, out, in);
    const Eigen::Map<const Eigen::VectorXd> bias(w.data() + offset + Eigen::Index(out) * in, out);
    offset += Eigen::Index(out) * in + out;
    Eigen::MatrixXd z = (weights * a).colwise() + bias;
    for (Eigen::Index k = 0; k < z.size(); ++k) pattern.push_back(z.data()[k] > 0.0);
    a = z.cwiseMax(0.0);
  }
  return pattern;
}

inline bool smooth_stencil(const Mlp& model, const Eigen::VectorXd& w, const Eigen::MatrixXd& x,
                           Eigen::Index k, double eps = 1e-4) {
  Eigen::VectorXd plus = w;
  Eigen::VectorXd minus = w;
  plus(k) += eps;
  minus(k) -= eps;
  const std::vector<bool> base = relu_pattern(model, w, x);
  return relu_pattern(model, plus, x) == base && relu_pattern(model, minus, x) == base;
}

}  // namespace fedcell::testing
