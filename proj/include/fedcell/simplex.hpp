#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace fedcell {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

// Dense tableau simplex for
//   minimize c'x  subject to  A x = b,  x >= 0,
// started from a caller-supplied feasible basis: `basis[r]` must be a column of
// A equal to the r-th unit vector, and b >= 0. Bland's rule is used throughout,
// so the method terminates without cycling. Throws SolverError when the
// iteration cap is hit or the problem is unbounded.
LpResult solve_standard_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& c, std::vector<int> basis,
                             int max_iterations = 0);

struct L1BoxResult {
  Eigen::VectorXd x;
  double residual = 0.0;  // ||A x - b||_1 at the returned point
  int iterations = 0;
};

// minimize ||A x - b||_1 subject to 0 <= x <= upper, via the residual-split
// linear program  A x - e+ + e- = b,  x + u = upper.
L1BoxResult minimize_l1_box(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double upper);

}  // namespace fedcell
