#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "fedcell/config.hpp"
#include "fedcell/dataset.hpp"
#include "fedcell/mlp.hpp"
#include "fedcell/radio.hpp"
#include "fedcell/rng.hpp"
#include "fedcell/topology.hpp"

namespace fedcell {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One user's local database.
struct Shard {
  int user = 0;
  int cell = 0;
  Eigen::MatrixXd inputs;  // features x K
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
};

// Shuffles `train` with `seed` and hands user u the next K_u samples, in
// ascending user order. Requires train.size() == topo.total_samples().
std::vector<Shard> make_shards(const Topology& topo, const Dataset& train, std::uint64_t seed);

// Full-batch mean gradient of the loss over the shard.
Eigen::VectorXd local_gradient(const Mlp& model, const Shard& shard, const Eigen::VectorXd& w);

// Rescales g onto the L2 ball of radius `bound` if it lies outside.
void clip_global_norm(Eigen::VectorXd& g, double bound);

// Adds N(0, sigma^2 I) drawn from `rng`; sigma = 0 leaves g untouched.
void gaussian_mechanism(Eigen::VectorXd& g, double sigma, Rng& rng);

Eigen::VectorXd local_update(const Eigen::VectorXd& w, const Eigen::VectorXd& noisy_gradient,
                             double step);

// sum_k weight_k model_k / sum_k weight_k. Throws std::invalid_argument when the
// weights sum to zero.
Eigen::VectorXd weighted_average(std::span<const Eigen::VectorXd> models,
                                 std::span<const double> weights);

// Base-station aggregation: weights K_i a_i.
Eigen::VectorXd bs_aggregate(std::span<const Eigen::VectorXd> models,
                             std::span<const double> samples, std::span<const int> scheduled);

// Main-server aggregation of cell models weighted by each cell's scheduled
// sample count.
Eigen::VectorXd global_aggregate(std::span<const Eigen::VectorXd> cell_models,
                                 std::span<const double> cell_samples);

// Classifier with config.hidden_layers ReLU layers of config.hidden_units.
Mlp make_model(const SystemConfig& config, int input_dim, int num_classes);

// Input width of the data load_data(config) produces: 28 x 28 for IDX digits,
// config.num_features for synthetic blobs.
int data_input_dim(const SystemConfig& config);

// Seed of the DP-noise stream of (round, cell, user) under a run seed.
std::uint64_t noise_seed(std::uint64_t seed, int round, int cell, int user);

struct RoundMetrics {
  double accuracy = 0.0;
  double loss = 0.0;
};

struct FlState {
  Eigen::VectorXd w;
  int round = 0;
  // history[0] is the initial model, history[t] the model after round t.
  std::vector<RoundMetrics> history;
};

// Called with (round, global model) after every aggregation.
using RoundObserver = std::function<void(int, const Eigen::VectorXd&)>;

// Broadcast, clipped and noised local step, two-level aggregation, repeated
// config.rounds times from model.initial_parameters(seed). Throws
// DivergenceError if the global model stops being finite.
FlState train(const Mlp& model, const Topology& topo, const Allocation& alloc,
              std::span<const Shard> shards, const Dataset& test, const SystemConfig& config,
              std::uint64_t seed, const RoundObserver& observer = {});

// Same, from a given starting model.
FlState train_from(const Mlp& model, Eigen::VectorXd w0, const Topology& topo,
                   const Allocation& alloc, std::span<const Shard> shards, const Dataset& test,
                   const SystemConfig& config, std::uint64_t seed,
                   const RoundObserver& observer = {});

}  // namespace fedcell
