#pragma once

#include <vector>

#include <Eigen/Core>

#include "fedcell/config.hpp"
#include "fedcell/topology.hpp"

namespace fedcell::testing {

// A topology with the given serving cells, S x U gain matrix and sample
// counts; geometry fields are left as placeholders.
inline Topology make_topology(int num_cells, std::vector<int> assignment,
                              const Eigen::MatrixXd& gains, std::vector<int> samples) {
  Topology t;
  t.cell_centers.assign(static_cast<std::size_t>(num_cells), Point{});
  t.user_positions.assign(assignment.size(), Point{});
  t.assignment = std::move(assignment);
  t.gains = gains;
  t.distances = Eigen::MatrixXd::Ones(gains.rows(), gains.cols());
  t.samples = std::move(samples);
  index_cells(t);
  return t;
}

inline SystemConfig small_config() {
  SystemConfig c;
  c.total_users = 20;
  c.total_samples = 400;
  c.num_rbs = 3;
  c.rounds = 5;
  return c;
}

}  // namespace fedcell::testing
