#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fedcell/radio.hpp"
#include "fedcell/simplex.hpp"
#include "fixtures.hpp"

using namespace fedcell;
using fedcell::testing::make_topology;

namespace {

SystemConfig radio_config() {
  SystemConfig c;
  c.noise_psd = 3.98e-21;
  return c;
}

}  // namespace

TEST_CASE("interference sums co-channel users of other cells towards the victim") {
  // Users 0,1 in cell 0; user 2 in cell 1; user 3 in cell 2.
  Eigen::MatrixXd g(3, 4);
  g << 1e-9, 1e-9, 1e-10, 3e-11,
       2e-11, 5e-11, 1e-9, 7e-12,
       4e-12, 6e-12, 8e-12, 1e-9;
  const Topology t = make_topology(3, {0, 0, 1, 2}, g, {10, 10, 10, 10});
  Allocation a(4);
  a.rb = {0, 1, 0, 1};
  a.power = {0.005, 0.004, 0.01, 0.002};

  CHECK(interference(t, a, 0, 0) == doctest::Approx(1e-12).epsilon(1e-14));
  CHECK(interference(t, a, 0, 1) == doctest::Approx(0.002 * 3e-11).epsilon(1e-14));
  CHECK(interference(t, a, 1, 0) == doctest::Approx(0.005 * 2e-11).epsilon(1e-14));
  CHECK(interference(t, a, 0, 2) == 0.0);

  // Additivity: a second interferer on RB 0 adds its own term.
  a.rb[3] = 0;
  CHECK(interference(t, a, 0, 0) == doctest::Approx(1e-12 + 0.002 * 3e-11).epsilon(1e-14));
}

TEST_CASE("uplink rate") {
  SystemConfig c = radio_config();
  const double bn0 = c.bandwidth * c.noise_psd;
  Eigen::MatrixXd g(1, 2);
  g << 1e-10, 1e-10;
  const Topology t = make_topology(1, {0, 0}, g, {5, 5});
  Allocation a(2);
  a.rb = {0, kUnscheduled};
  a.power = {bn0 / 1e-10, 0.0};

  CHECK(uplink_rate(t, a, c, 0) == doctest::Approx(180000.0).epsilon(1e-12));
  CHECK(uplink_rate(t, a, c, 1) == 0.0);
}

TEST_CASE("sinr threshold for 100 kbit/s on 180 kHz") {
  const double theta = sinr_threshold(radio_config());
  // 2^(5/9) - 1 = 0.46973...; the rounded figure 0.4704 is within 0.2%.
  CHECK(theta == doctest::Approx(std::exp2(5.0 / 9.0) - 1.0).epsilon(1e-15));
  CHECK(theta == doctest::Approx(0.4704).epsilon(2e-3));
  CHECK(180e3 * std::log2(1.0 + theta) == doctest::Approx(100e3).epsilon(1e-12));
}

TEST_CASE("required power hits the minimum rate exactly") {
  SystemConfig c = radio_config();
  Eigen::MatrixXd g(2, 2);
  g << 1e-10, 4e-11,
       2e-11, 1e-10;
  const Topology t = make_topology(2, {0, 1}, g, {5, 5});
  Allocation a(2);
  a.rb = {0, kUnscheduled};

  SUBCASE("no interference") {
    const double p = required_power(t, a, c, 0);
    CHECK(p == doctest::Approx(3.37e-6).epsilon(2e-3));
    a.power[0] = p;
    CHECK(uplink_rate(t, a, c, 0) == doctest::Approx(c.r_min).epsilon(1e-9));
  }
  SUBCASE("interference that doubles I + B N0 doubles the power") {
    const double quiet = required_power(t, a, c, 0);
    a.rb[1] = 0;
    a.power[1] = c.bandwidth * c.noise_psd / 4e-11;  // I = B N0 at base station 0
    CHECK(required_power(t, a, c, 0) == doctest::Approx(2.0 * quiet).epsilon(1e-12));
    a.power[0] = required_power(t, a, c, 0);
    CHECK(uplink_rate(t, a, c, 0) == doctest::Approx(c.r_min).epsilon(1e-9));
  }
  SUBCASE("unscheduled users need no power") { CHECK(required_power(t, a, c, 1) == 0.0); }
}

TEST_CASE("power solve, single cell: identity system") {
  SystemConfig c = radio_config();
  Eigen::MatrixXd g(1, 3);
  g << 1e-10, 3e-11, 2e-9;
  const Topology t = make_topology(1, {0, 0, 0}, g, {5, 5, 5});
  Allocation a(3);
  a.rb = {0, 2, 1};
  const PowerSystem sys = build_power_system(t, a, c);
  CHECK(sys.a.isIdentity());
  const PowerSolution sol = solve_powers(t, a, c);
  CHECK(sol.residual <= 1e-20);
  for (int u = 0; u < 3; ++u) {
    CHECK(sol.power[static_cast<std::size_t>(u)] ==
          doctest::Approx(required_power(t, a, c, u)).epsilon(1e-12));
  }
}

TEST_CASE("power solve, nobody scheduled") {
  SystemConfig c = radio_config();
  const Topology t = make_topology(1, {0, 0}, Eigen::MatrixXd::Constant(1, 2, 1e-10), {5, 5});
  const PowerSolution sol = solve_powers(t, Allocation(2), c);
  CHECK(sol.power == std::vector<double>{0.0, 0.0});
  CHECK(sol.residual == 0.0);
}

TEST_CASE("power solve, two coupled co-channel users") {
  SystemConfig c = radio_config();
  const double own = 1e-10;
  const double cross = 5e-11;
  Eigen::MatrixXd g(2, 2);
  g << own, cross,
       cross, own;
  const Topology t = make_topology(2, {0, 1}, g, {5, 5});
  Allocation a(2);
  a.rb = {0, 0};
  // Symmetric fixed point of p = theta (cross p + B N0) / own.
  const double theta = std::pow(2.0, c.r_min / c.bandwidth) - 1.0;
  const double expected = theta * c.bandwidth * c.noise_psd / (own - theta * cross);

  const PowerSolution sol = solve_powers(t, a, c);
  CHECK(sol.power[0] == doctest::Approx(expected).epsilon(1e-10));
  CHECK(sol.power[1] == doctest::Approx(expected).epsilon(1e-10));
  a.power = sol.power;
  CHECK(uplink_rate(t, a, c, 0) == doctest::Approx(c.r_min).epsilon(1e-9));
  CHECK(uplink_rate(t, a, c, 1) == doctest::Approx(c.r_min).epsilon(1e-9));

  std::ostringstream csv;
  write_power_system_csv(csv, build_power_system(t, a, c));
  CHECK(csv.str().rfind("row,user,a_0,a_1,b\n", 0) == 0);
}

TEST_CASE("L1 box minimization matches a grid search") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 3;
    const int n = 1 + trial % 3;
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      b(i) = unit(rng);
      for (int j = 0; j < n; ++j) a(i, j) = unit(rng);
    }
    const L1BoxResult res = minimize_l1_box(a, b, 1.0);
    CHECK((res.x.array() >= -1e-12).all());
    CHECK((res.x.array() <= 1.0 + 1e-12).all());
    CHECK(res.residual == doctest::Approx((a * res.x - b).lpNorm<1>()).epsilon(1e-9));

    const int steps = 40;
    double best = 1e300;
    Eigen::VectorXd x(n);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
      for (int j = 0; j < n; ++j) x(j) = static_cast<double>(idx[static_cast<std::size_t>(j)]) / steps;
      best = std::min(best, (a * x - b).lpNorm<1>());
      int j = 0;
      while (j < n && ++idx[static_cast<std::size_t>(j)] > steps) idx[static_cast<std::size_t>(j++)] = 0;
      if (j == n) break;
    }
    CHECK(res.residual <= best + 1e-12);
  }
}

TEST_CASE("enforce_rate") {
  SystemConfig c = radio_config();

  SUBCASE("users meeting the minimum rate are kept") {
    Eigen::MatrixXd g(1, 2);
    g << 1e-10, 2e-10;
    const Topology t = make_topology(1, {0, 0}, g, {5, 5});
    Allocation a(2);
    a.rb = {0, 1};
    a.power = solve_powers(t, a, c).power;
    const Allocation out = enforce_rate(t, a, c);
    CHECK(out.rb == a.rb);
    CHECK(out.power == a.power);
  }
  SUBCASE("a user clamped at p_max below its requirement is removed") {
    Eigen::MatrixXd g(1, 2);
    g << 1e-10, 1e-20;  // second user would need tens of watts
    const Topology t = make_topology(1, {0, 0}, g, {5, 5});
    Allocation a(2);
    a.rb = {0, 1};
    CHECK(required_power(t, a, c, 1) > c.p_max);
    a.power = solve_powers(t, a, c).power;
    CHECK(a.power[1] == doctest::Approx(c.p_max));
    const Allocation out = enforce_rate(t, a, c);
    CHECK(out.scheduled(0));
    CHECK_FALSE(out.scheduled(1));
    CHECK(out.power[1] == 0.0);
    for (int u = 0; u < 2; ++u) {
      if (out.scheduled(u)) CHECK(uplink_rate(t, out, c, u) >= c.r_min * (1.0 - kRateTolerance));
    }
  }
  SUBCASE("removing an interferer never lowers the others' rates") {
    const Topology t = generate_topology(SystemConfig{}, 21);
    Allocation a(t.num_users());
    for (int s = 0; s < t.num_cells(); ++s) {
      const auto& users = t.cell_users[static_cast<std::size_t>(s)];
      for (std::size_t k = 0; k < users.size() && k < 5; ++k) {
        a.rb[static_cast<std::size_t>(users[k])] = static_cast<int>(k);
        a.power[static_cast<std::size_t>(users[k])] = 0.004;
      }
    }
    const SystemConfig cfg;
    std::vector<double> before(static_cast<std::size_t>(t.num_users()));
    for (int u = 0; u < t.num_users(); ++u) before[static_cast<std::size_t>(u)] = uplink_rate(t, a, cfg, u);
    const Allocation out = enforce_rate(t, a, cfg);
    for (int u = 0; u < t.num_users(); ++u) {
      if (out.scheduled(u)) {
        CHECK(uplink_rate(t, out, cfg, u) >= before[static_cast<std::size_t>(u)]);
        CHECK(uplink_rate(t, out, cfg, u) >= cfg.r_min * (1.0 - kRateTolerance));
      }
    }
  }
}

TEST_CASE("allocation checks") {
  SystemConfig c = radio_config();
  const Topology t = make_topology(1, {0, 0}, Eigen::MatrixXd::Constant(1, 2, 1e-10), {10, 10});
  Allocation a(2);
  a.rb = {0, 1};
  a.power = {0.001, 0.002};
  a.sigma = {10.0, 10.0};
  CHECK_NOTHROW(check_allocation(t, a, c));
  CHECK(a.rb_indicator(t, 0, 1, 1) == 1);
  CHECK(a.rb_indicator(t, 0, 1, 0) == 0);

  Allocation same_rb = a;
  same_rb.rb = {1, 1};
  CHECK_THROWS_AS(check_allocation(t, same_rb, c), std::logic_error);
  Allocation too_loud = a;
  too_loud.power[0] = 0.02;
  CHECK_THROWS_AS(check_allocation(t, too_loud, c), std::logic_error);
  Allocation idle_power = a;
  idle_power.rb[1] = kUnscheduled;
  CHECK_THROWS_AS(check_allocation(t, idle_power, c), std::logic_error);
  Allocation quiet = a;
  quiet.sigma[0] = 1.0;  // K sigma = 10 < n_min
  CHECK_THROWS_AS(check_allocation(t, quiet, c), std::logic_error);
  CHECK_NOTHROW(check_allocation(t, quiet, c, false));
}
