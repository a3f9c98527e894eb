#include <doctest.h>

#include <cmath>
#include <random>

#include "fedcell/dp.hpp"
#include "fedcell/scheduler.hpp"
#include "fixtures.hpp"

using namespace fedcell;
using fedcell::testing::make_topology;

TEST_CASE("leakage of the Gaussian mechanism") {
  CHECK(leakage(200, 10.0, 100.0, 1.0) == 4.0);
  CHECK(leakage(200, 10.0, 50.0, 2.0) == 4.0);
  CHECK(leakage(200, 10.0, 100.0, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(leakage(0, 10.0, 100.0, 1.0) == 0.0);
  CHECK_THROWS_AS(leakage(200, 10.0, 100.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(leakage(200, 10.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("total leakage is the sum of per-user leakage") {
  const Topology t = make_topology(2, {0, 0, 1}, Eigen::MatrixXd::Constant(2, 3, 1e-10),
                                   {20, 50, 80});
  SystemConfig c;
  Allocation a(3);
  CHECK(total_leakage(t, a, c) == 0.0);

  a.rb = {0, kUnscheduled, 0};
  a.sigma = {5.0, 9.0, 2.5};
  const LeakageReport r = leakage_report(t, a, c);
  REQUIRE(r.users.size() == 2);
  CHECK(r.users[0].user == 0);
  CHECK(r.users[1].cell == 1);
  CHECK(r.users[0].rho == leakage(200, 10.0, 20.0, 5.0));
  CHECK(r.total == doctest::Approx(r.users[0].rho + r.users[1].rho).epsilon(1e-14));
  CHECK(r.total == doctest::Approx(2.0 * 200 * 100.0 * (1.0 / 1e4 + 1.0 / 4e4)).epsilon(1e-14));

  a.rb = {kUnscheduled, kUnscheduled, 1};
  CHECK(total_leakage(t, a, c) == leakage(200, 10.0, 80.0, 2.5));
}

namespace {

Topology uniform_topology(std::vector<int> samples) {
  const int n = static_cast<int>(samples.size());
  return make_topology(1, std::vector<int>(static_cast<std::size_t>(n), 0),
                       Eigen::MatrixXd::Constant(1, n, 1e-10), std::move(samples));
}

Allocation all_scheduled(int n) {
  Allocation a(n);
  for (int u = 0; u < n; ++u) a.rb[static_cast<std::size_t>(u)] = u;
  return a;
}

}  // namespace

TEST_CASE("noise optimizer: single user sits at sqrt(V)") {
  SystemConfig c;
  const Topology t = uniform_topology({400});
  const NoiseSolution sol = optimize_noise(t, all_scheduled(1), c);
  CHECK(sol.sigma[0] == doctest::Approx(std::sqrt(12.0)).epsilon(1e-10));
  CHECK(sol.sigma[0] == doctest::Approx(3.4641).epsilon(1e-4));
  CHECK(sol.residual <= 1e-8);
}

TEST_CASE("noise optimizer: equal databases share sqrt(V)") {
  SystemConfig c;
  const Topology t = uniform_topology({300, 300, 300, 300});
  Allocation a = all_scheduled(4);
  a.rb[2] = kUnscheduled;
  const NoiseSolution sol = optimize_noise(t, a, c);
  for (int u : {0, 1, 3}) {
    CHECK(sol.sigma[static_cast<std::size_t>(u)] == doctest::Approx(std::sqrt(12.0)).epsilon(1e-10));
  }
  CHECK(sol.sigma[2] == 0.0);
}

TEST_CASE("noise optimizer: K^(-3/4) law and K^(-1/2) leakage law for free users") {
  SystemConfig c;
  const Topology t = uniform_topology({200, 400, 800});
  const Allocation a = all_scheduled(3);
  const NoiseSolution sol = optimize_noise(t, a, c);
  for (int u = 0; u < 3; ++u) {
    const double k = t.samples[static_cast<std::size_t>(u)];
    REQUIRE(k * sol.sigma[static_cast<std::size_t>(u)] > c.n_min);  // unclamped
  }
  CHECK(sol.sigma[0] > sol.sigma[1]);
  CHECK(sol.sigma[1] > sol.sigma[2]);
  CHECK(sol.sigma[0] / sol.sigma[1] == doctest::Approx(std::pow(2.0, 0.75)).epsilon(1e-9));
  const double r0 = leakage(200, 10.0, 200.0, sol.sigma[0]);
  const double r2 = leakage(200, 10.0, 800.0, sol.sigma[2]);
  CHECK(r0 / r2 == doctest::Approx(2.0).epsilon(1e-9));

  double used = 0.0;
  for (int u = 0; u < 3; ++u) {
    const double k = t.samples[static_cast<std::size_t>(u)];
    used += k * sol.sigma[static_cast<std::size_t>(u)] * sol.sigma[static_cast<std::size_t>(u)];
  }
  CHECK(used == doctest::Approx(12.0 * 1400.0).epsilon(1e-8));
}

TEST_CASE("noise optimizer: clamp at the noise floor") {
  SystemConfig c;
  c.n_min = 350.0;
  // Unclamped, the K = 10 user would get K sigma = sqrt(y sqrt(K)) ~ 339 with
  // y = V sum K / sum K^(-1/2); the floor lifts it to n_min / K = 35.
  const Topology t = uniform_topology({10, 500, 700});
  const NoiseSolution sol = optimize_noise(t, all_scheduled(3), c);
  CHECK(sol.sigma[0] == doctest::Approx(35.0).epsilon(1e-12));
  for (int u = 0; u < 3; ++u) {
    const double k = t.samples[static_cast<std::size_t>(u)];
    CHECK(k * sol.sigma[static_cast<std::size_t>(u)] >= c.n_min * (1.0 - 1e-12));
  }
  // The two free users split the rest of the budget by the K^(-3/4) law.
  CHECK(sol.sigma[1] / sol.sigma[2] == doctest::Approx(std::pow(1.4, 0.75)).epsilon(1e-9));
  CHECK(sol.residual <= 1e-8);
}

TEST_CASE("noise optimizer: infeasible floors are reported") {
  SystemConfig c;
  // n_min^2 / K = 1e4 / 5 = 2000 > V K = 60.
  const Topology t = uniform_topology({5, 6});
  CHECK_THROWS_AS(optimize_noise(t, all_scheduled(2), c), InfeasibleError);
  CHECK_THROWS_AS(optimize_noise(t, Allocation(2), c), std::invalid_argument);
}

TEST_CASE("noise constraint left-hand side is nonincreasing in the multiplier") {
  SystemConfig c;
  const Topology t = uniform_topology({7, 30, 120, 900});
  const Allocation a = all_scheduled(4);
  double previous = noise_constraint_lhs(t, a, c, 1e-16);
  for (double kappa = 1e-16; kappa < 1e6; kappa *= 1.7) {
    const double now = noise_constraint_lhs(t, a, c, kappa);
    CHECK(now <= previous * (1.0 + 1e-14));
    previous = now;
  }
}

TEST_CASE("noise optimizer beats a grid over two users") {
  SystemConfig c;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> kdist(10, 600);
  for (int trial = 0; trial < 20; ++trial) {
    const Topology t = uniform_topology({kdist(rng), kdist(rng)});
    const Allocation a = all_scheduled(2);
    const double k0 = t.samples[0];
    const double k1 = t.samples[1];
    if (c.n_min * c.n_min * (1.0 / k0 + 1.0 / k1) > c.v_max * (k0 + k1)) continue;
    const NoiseSolution sol = optimize_noise(t, a, c);
    auto value = [&](double s0, double s1) {
      return 1.0 / (k0 * s0 * k0 * s0) + 1.0 / (k1 * s1 * k1 * s1);
    };
    const double got = value(sol.sigma[0], sol.sigma[1]);
    // The optimum uses the whole budget, so walk sigma0 along its range and
    // put the remaining budget on sigma1.
    double best = 1e300;
    const double budget = c.v_max * (k0 + k1);
    const int steps = 20000;
    const double lo = c.n_min / k0;
    const double hi = std::sqrt(budget / k0);
    for (int i = 0; i <= steps; ++i) {
      const double s0 = lo + (hi - lo) * i / steps;
      const double rest = budget - k0 * s0 * s0;
      if (rest < 0.0) continue;
      const double s1 = std::sqrt(rest / k1);
      if (s1 < c.n_min / k1) continue;
      best = std::min(best, value(s0, s1));
    }
    CHECK(got <= best * (1.0 + 1e-9));
    CHECK(got == doctest::Approx(best).epsilon(1e-4));
  }
}

TEST_CASE("opt_sched_dp: floor, equality and lower leakage than random noise") {
  SystemConfig c;
  c.total_samples = 60000;
  int wins = 0;
  const int trials = 20;
  for (std::uint64_t seed = 1; seed <= trials; ++seed) {
    const Topology t = generate_topology(c, seed);
    const Allocation opt = opt_sched(t, c, seed);
    const Allocation dp = opt_sched_dp(t, c, seed);
    CHECK(dp.rb == opt.rb);
    double used = 0.0;
    double mass = 0.0;
    for (int u = 0; u < t.num_users(); ++u) {
      if (!dp.scheduled(u)) {
        CHECK(dp.sigma_of(u) == 0.0);
        continue;
      }
      const double k = t.samples[static_cast<std::size_t>(u)];
      CHECK(k * dp.sigma_of(u) >= c.n_min * (1.0 - 1e-12));
      used += k * dp.sigma_of(u) * dp.sigma_of(u);
      mass += k;
    }
    CHECK(std::abs(used - c.v_max * mass) <= 1e-8 * c.v_max * mass);
    if (total_leakage(t, dp, c) <= total_leakage(t, opt, c)) ++wins;
  }
  CHECK(wins >= 0.95 * trials);
}
