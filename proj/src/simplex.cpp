#include "fedcell/simplex.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace fedcell {
namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-12;

}  // namespace

LpResult solve_standard_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& c, std::vector<int> basis,
                             int max_iterations) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m || c.size() != n || static_cast<Eigen::Index>(basis.size()) != m) {
    throw std::invalid_argument("solve_standard_form: dimension mismatch");
  }
  if (max_iterations <= 0) max_iterations = static_cast<int>(50 * (m + n) + 100);

  // Tableau rows 0..m-1 hold [A | b]; row m holds reduced costs and -objective.
  Eigen::MatrixXd t(m + 1, n + 1);
  t.topLeftCorner(m, n) = a;
  t.topRightCorner(m, 1) = b;
  t.bottomLeftCorner(1, n) = c.transpose();
  t(m, n) = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    const double cb = c(basis[static_cast<std::size_t>(r)]);
    if (cb != 0.0) t.row(m) -= cb * t.row(r);
  }

  int iterations = 0;
  for (;;) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (t(m, j) < -kCostTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    if (++iterations > max_iterations) {
      throw SolverError("simplex did not converge within " + std::to_string(max_iterations) +
                        " pivots");
    }

    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < m; ++r) {
      const double coef = t(r, enter);
      if (coef <= kPivotTol) continue;
      const double ratio = t(r, n) / coef;
      if (ratio < best_ratio - 1e-15 ||
          (ratio <= best_ratio + 1e-15 && leave >= 0 &&
           basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
        best_ratio = ratio;
        leave = r;
      }
    }
    if (leave < 0) throw SolverError("linear program is unbounded");

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double f = t(r, enter);
      if (f != 0.0) t.row(r) -= f * t.row(leave);
    }
    // Keep the right-hand side feasible against round-off.
    for (Eigen::Index r = 0; r < m; ++r) {
      if (t(r, n) < 0.0 && t(r, n) > -1e-13) t(r, n) = 0.0;
    }
    basis[static_cast<std::size_t>(leave)] = static_cast<int>(enter);
  }

  LpResult result;
  result.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < m; ++r) result.x(basis[static_cast<std::size_t>(r)]) = t(r, n);
  result.objective = c.dot(result.x);
  result.iterations = iterations;
  return result;
}

L1BoxResult minimize_l1_box(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double upper) {
  const Eigen::Index n = a.cols();
  const Eigen::Index m = a.rows();
  if (b.size() != m) throw std::invalid_argument("minimize_l1_box: dimension mismatch");
  if (!(upper > 0.0)) throw std::invalid_argument("minimize_l1_box: upper bound must be > 0");
  L1BoxResult out;
  out.x = Eigen::VectorXd::Zero(n);
  if (n == 0 && m == 0) return out;

  // Columns: x (n) | e+ (m) | e- (m) | u (n).  Rows: residual rows (m), box rows (n).
  const Eigen::Index cols = n + 2 * m + n;
  Eigen::MatrixXd lp = Eigen::MatrixXd::Zero(m + n, cols);
  Eigen::VectorXd rhs(m + n);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
  std::vector<int> basis(static_cast<std::size_t>(m + n));
  for (Eigen::Index r = 0; r < m; ++r) {
    // Flip rows with negative b so that the starting slack is feasible.
    const double sign = b(r) < 0.0 ? -1.0 : 1.0;
    lp.block(r, 0, 1, n) = sign * a.row(r);
    lp(r, n + r) = -sign;
    lp(r, n + m + r) = sign;
    rhs(r) = sign * b(r);
    basis[static_cast<std::size_t>(r)] = static_cast<int>(sign > 0.0 ? n + m + r : n + r);
  }
  cost.segment(n, 2 * m).setOnes();
  for (Eigen::Index j = 0; j < n; ++j) {
    lp(m + j, j) = 1.0;
    lp(m + j, n + 2 * m + j) = 1.0;
    rhs(m + j) = upper;
    basis[static_cast<std::size_t>(m + j)] = static_cast<int>(n + 2 * m + j);
  }

  const LpResult sol = solve_standard_form(lp, rhs, cost, std::move(basis));
  out.x = sol.x.head(n).cwiseMax(0.0).cwiseMin(upper);
  out.residual = (a * out.x - b).lpNorm<1>();
  out.iterations = sol.iterations;
  return out;
}

}  // namespace fedcell
