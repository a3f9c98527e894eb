#include "fedcell/fl.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace fedcell {

std::vector<Shard> make_shards(const Topology& topo, const Dataset& train, std::uint64_t seed) {
  if (train.size() != topo.total_samples()) {
    throw std::invalid_argument("training set has " + std::to_string(train.size()) +
                                " samples, partition expects " +
                                std::to_string(topo.total_samples()));
  }
  std::vector<int> order(static_cast<std::size_t>(train.size()));
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, Stream::kShards);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Shard> shards;
  shards.reserve(static_cast<std::size_t>(topo.num_users()));
  std::size_t next = 0;
  for (int u = 0; u < topo.num_users(); ++u) {
    const auto k = static_cast<std::size_t>(topo.samples[static_cast<std::size_t>(u)]);
    const Dataset part = train.subset(std::span<const int>(order).subspan(next, k));
    next += k;
    shards.push_back(Shard{u, topo.cell_of(u), part.inputs, part.labels});
  }
  return shards;
}

Eigen::VectorXd local_gradient(const Mlp& model, const Shard& shard, const Eigen::VectorXd& w) {
  if (shard.size() == 0) throw std::invalid_argument("local_gradient: empty shard");
  Eigen::VectorXd g;
  model.loss_and_gradient(w, shard.inputs, shard.labels, g);
  return g;
}

void clip_global_norm(Eigen::VectorXd& g, double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("clip bound must be > 0");
  const double norm = g.norm();
  if (norm > bound) g *= bound / norm;
}

void gaussian_mechanism(Eigen::VectorXd& g, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("noise deviation must be >= 0");
  if (sigma == 0.0) return;
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index k = 0; k < g.size(); ++k) g(k) += normal(rng);
}

Eigen::VectorXd local_update(const Eigen::VectorXd& w, const Eigen::VectorXd& noisy_gradient,
                             double step) {
  return w - step * noisy_gradient;
}

Eigen::VectorXd weighted_average(std::span<const Eigen::VectorXd> models,
                                 std::span<const double> weights) {
  if (models.size() != weights.size()) throw std::invalid_argument("weight count mismatch");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("aggregation over zero scheduled samples");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(models.front().size());
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (weights[k] != 0.0) out += (weights[k] / total) * models[k];
  }
  return out;
}

Eigen::VectorXd bs_aggregate(std::span<const Eigen::VectorXd> models,
                             std::span<const double> samples, std::span<const int> scheduled) {
  if (samples.size() != models.size() || scheduled.size() != models.size()) {
    throw std::invalid_argument("bs_aggregate: size mismatch");
  }
  std::vector<double> weights(models.size());
  for (std::size_t k = 0; k < models.size(); ++k) weights[k] = samples[k] * scheduled[k];
  return weighted_average(models, weights);
}

Eigen::VectorXd global_aggregate(std::span<const Eigen::VectorXd> cell_models,
                                 std::span<const double> cell_samples) {
  return weighted_average(cell_models, cell_samples);
}

Mlp make_model(const SystemConfig& config, int input_dim, int num_classes) {
  std::vector<int> sizes{input_dim};
  for (int l = 0; l < config.hidden_layers; ++l) sizes.push_back(config.hidden_units);
  sizes.push_back(num_classes);
  return Mlp(std::move(sizes));
}

int data_input_dim(const SystemConfig& config) {
  return config.dataset_dir.empty() ? config.num_features : 28 * 28;
}

std::uint64_t noise_seed(std::uint64_t seed, int round, int cell, int user) {
  return derive_seed(seed, {static_cast<std::uint64_t>(Stream::kDpNoise),
                            static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(cell),
                            static_cast<std::uint64_t>(user)});
}

FlState train(const Mlp& model, const Topology& topo, const Allocation& alloc,
              std::span<const Shard> shards, const Dataset& test, const SystemConfig& config,
              std::uint64_t seed, const RoundObserver& observer) {
  return train_from(model, model.initial_parameters(seed), topo, alloc, shards, test, config,
                    seed, observer);
}

FlState train_from(const Mlp& model, Eigen::VectorXd w0, const Topology& topo,
                   const Allocation& alloc, std::span<const Shard> shards, const Dataset& test,
                   const SystemConfig& config, std::uint64_t seed,
                   const RoundObserver& observer) {
  if (static_cast<int>(shards.size()) != topo.num_users()) {
    throw std::invalid_argument("one shard per user required");
  }
  FlState state;
  state.w = std::move(w0);
  auto record = [&] {
    const Evaluation e = model.evaluate(state.w, test.inputs, test.labels);
    state.history.push_back(RoundMetrics{e.accuracy, e.loss});
  };
  record();
  if (config.rounds > 0 && alloc.scheduled_count() == 0) {
    throw std::invalid_argument("train: no scheduled user, aggregation undefined");
  }

  for (int t = 0; t < config.rounds; ++t) {
    std::vector<Eigen::VectorXd> cell_models;
    std::vector<double> cell_samples;
    for (int s = 0; s < topo.num_cells(); ++s) {
      std::vector<Eigen::VectorXd> local;
      std::vector<double> samples;
      std::vector<int> active;
      for (int u : topo.cell_users[static_cast<std::size_t>(s)]) {
        if (!alloc.scheduled(u)) continue;
        const Shard& shard = shards[static_cast<std::size_t>(u)];
        Eigen::VectorXd g = local_gradient(model, shard, state.w);
        clip_global_norm(g, config.clip);
        Rng rng(noise_seed(seed, t, s, u));
        gaussian_mechanism(g, alloc.sigma_of(u), rng);
        local.push_back(local_update(state.w, g, config.step));
        samples.push_back(shard.size());
        active.push_back(1);
      }
      if (local.empty()) continue;
      cell_models.push_back(bs_aggregate(local, samples, active));
      cell_samples.push_back(std::accumulate(samples.begin(), samples.end(), 0.0));
    }
    state.w = global_aggregate(cell_models, cell_samples);
    state.round = t + 1;
    if (!state.w.allFinite()) {
      throw DivergenceError("global model became non-finite in round " + std::to_string(t + 1));
    }
    if (observer) observer(state.round, state.w);
    record();
  }
  return state;
}

}  // namespace fedcell
