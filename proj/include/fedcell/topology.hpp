#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fedcell/config.hpp"

namespace fedcell {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

// Cell geometry, user placement and the full base-station x user channel
// matrix. Users are indexed globally; `cell_users` lists each cell's members in
// ascending global order, which is also the row order of that cell's
// resource-block matrix.
struct Topology {
  std::vector<Point> cell_centers;
  std::vector<Point> user_positions;
  std::vector<int> assignment;              // user -> serving cell
  std::vector<std::vector<int>> cell_users;  // cell -> users, ascending
  Eigen::MatrixXd distances;                 // S x U, metres
  Eigen::MatrixXd gains;                     // S x U, linear power gain
  std::vector<int> samples;                  // K per user

  int num_cells() const { return static_cast<int>(cell_centers.size()); }
  int num_users() const { return static_cast<int>(user_positions.size()); }
  int cell_of(int user) const { return assignment[static_cast<std::size_t>(user)]; }
  // Gain between `user` and base station `bs`.
  double gain(int bs, int user) const { return gains(bs, user); }
  // Gain between `user` and its own base station.
  double own_gain(int user) const { return gains(cell_of(user), user); }
  long long total_samples() const;
};

// Flat-top hexagonal layout: one cell at the origin, plus a ring of six at
// distance sqrt(3) * radius for S = 7. Only S in {1, 7} is supported.
std::vector<Point> hexagon_centers(int num_cells, double radius);

// Free-space style gain with cubic distance decay:
// fading^2 * (c / (4 pi f))^2 / d^3.
double channel_gain(double fading, double distance_m, double center_freq_hz);

// Geometry, nearest-cell assignment, fading and the sample partition. The
// result depends only on (config, seed).
Topology generate_topology(const SystemConfig& config, std::uint64_t seed);

// Lognormal sample counts normalized to config.total_samples with
// largest-remainder rounding; every user gets at least one sample.
std::vector<int> partition_samples(const SystemConfig& config, const Topology& topology,
                                   std::uint64_t seed);

// Rebuilds `cell_users` from `assignment`.
void index_cells(Topology& topology);

}  // namespace fedcell
