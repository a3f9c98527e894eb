#include "fedcell/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fedcell/rng.hpp"
#include "fedcell/units.hpp"

namespace fedcell {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

long long Topology::total_samples() const {
  return std::accumulate(samples.begin(), samples.end(), 0LL);
}

std::vector<Point> hexagon_centers(int num_cells, double radius) {
  if (num_cells == 1) return {Point{0.0, 0.0}};
  if (num_cells != 7) {
    throw std::invalid_argument("unsupported cell count " + std::to_string(num_cells) +
                                " (supported: 1, 7)");
  }
  std::vector<Point> centers{Point{0.0, 0.0}};
  const double ring = std::sqrt(3.0) * radius;
  for (int k = 0; k < 6; ++k) {
    const double angle = std::numbers::pi / 6.0 + k * std::numbers::pi / 3.0;
    centers.push_back(Point{ring * std::cos(angle), ring * std::sin(angle)});
  }
  return centers;
}

double channel_gain(double fading, double distance_m, double center_freq_hz) {
  const double wavelength_term = kSpeedOfLight / (4.0 * std::numbers::pi * center_freq_hz);
  return fading * fading * wavelength_term * wavelength_term /
         (distance_m * distance_m * distance_m);
}

void index_cells(Topology& topology) {
  topology.cell_users.assign(topology.cell_centers.size(), {});
  for (int u = 0; u < topology.num_users(); ++u) {
    topology.cell_users[static_cast<std::size_t>(topology.cell_of(u))].push_back(u);
  }
}

Topology generate_topology(const SystemConfig& config, std::uint64_t seed) {
  validate(config);
  if (config.total_users <= 0) throw std::invalid_argument("topology needs at least one user");

  Topology topo;
  topo.cell_centers = hexagon_centers(config.num_cells, config.cell_radius);
  const int cells = topo.num_cells();
  const int users = config.total_users;

  Rng geometry = make_rng(seed, Stream::kGeometry);
  const double half = config.effective_area_side() / 2.0;
  std::uniform_real_distribution<double> coord(-half, half);
  topo.user_positions.resize(static_cast<std::size_t>(users));
  for (auto& p : topo.user_positions) {
    p.x = coord(geometry);
    p.y = coord(geometry);
  }

  topo.distances.resize(cells, users);
  topo.assignment.resize(static_cast<std::size_t>(users));
  for (int u = 0; u < users; ++u) {
    int nearest = 0;
    for (int s = 0; s < cells; ++s) {
      const double d = std::max(config.min_distance,
                                distance(topo.cell_centers[static_cast<std::size_t>(s)],
                                         topo.user_positions[static_cast<std::size_t>(u)]));
      topo.distances(s, u) = d;
      if (d < topo.distances(nearest, u)) nearest = s;
    }
    topo.assignment[static_cast<std::size_t>(u)] = nearest;
  }
  index_cells(topo);

  // Unit-scale Rayleigh fading, one frozen draw per (base station, user).
  Rng fading = make_rng(seed, Stream::kFading);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  topo.gains.resize(cells, users);
  for (int u = 0; u < users; ++u) {
    for (int s = 0; s < cells; ++s) {
      double l = 0.0;
      while (l <= 0.0) l = std::sqrt(-2.0 * std::log1p(-unit(fading)));
      topo.gains(s, u) = channel_gain(l, topo.distances(s, u), config.center_freq);
    }
  }

  topo.samples = partition_samples(config, topo, seed);
  return topo;
}

std::vector<int> partition_samples(const SystemConfig& config, const Topology& topology,
                                   std::uint64_t seed) {
  const int users = topology.num_users();
  const long long total = config.total_samples;
  if (users <= 0) throw std::invalid_argument("partition needs at least one user");
  if (total < users) throw std::invalid_argument("total_samples must be >= number of users");

  Rng rng = make_rng(seed, Stream::kPartition);
  std::lognormal_distribution<double> lognormal(config.lognormal_mu, config.lognormal_sigma);
  std::vector<double> weight(static_cast<std::size_t>(users));
  for (auto& w : weight) w = config.lognormal_sigma > 0.0 ? lognormal(rng) : 1.0;
  const double weight_sum = std::accumulate(weight.begin(), weight.end(), 0.0);

  // One sample is reserved per user; the rest is split proportionally.
  const long long spare = total - users;
  std::vector<int> counts(static_cast<std::size_t>(users), 1);
  std::vector<double> remainder(static_cast<std::size_t>(users));
  long long assigned = 0;
  for (std::size_t u = 0; u < weight.size(); ++u) {
    const double share = static_cast<double>(spare) * weight[u] / weight_sum;
    const double whole = std::floor(share);
    counts[u] += static_cast<int>(whole);
    remainder[u] = share - whole;
    assigned += static_cast<long long>(whole);
  }
  std::vector<int> order(static_cast<std::size_t>(users));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return remainder[static_cast<std::size_t>(a)] > remainder[static_cast<std::size_t>(b)];
  });
  for (long long k = 0; assigned < spare; ++k, ++assigned) {
    ++counts[static_cast<std::size_t>(order[static_cast<std::size_t>(k % users)])];
  }
  return counts;
}

}  // namespace fedcell
