#include "fedcell/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "fedcell/rng.hpp"

namespace fedcell {
namespace {

using MatrixMap = Eigen::Map<const Eigen::MatrixXd>;
using VectorMap = Eigen::Map<const Eigen::VectorXd>;

// Column-wise log-sum-exp of a logits matrix.
Eigen::RowVectorXd log_normalizer(const Eigen::MatrixXd& z) {
  const Eigen::RowVectorXd peak = z.colwise().maxCoeff();
  const Eigen::RowVectorXd sums = (z.rowwise() - peak).array().exp().colwise().sum();
  return peak.array() + sums.array().log();
}

void check_batch(const Eigen::MatrixXd& inputs, std::span<const int> labels, int dim,
                 int classes) {
  if (inputs.rows() != dim) throw std::invalid_argument("input dimension mismatch");
  if (static_cast<std::size_t>(inputs.cols()) != labels.size()) {
    throw std::invalid_argument("label count mismatch");
  }
  if (inputs.cols() == 0) throw std::invalid_argument("empty batch");
  for (int y : labels) {
    if (y < 0 || y >= classes) throw std::invalid_argument("label out of range");
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least two layer sizes");
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("Mlp layer sizes must be positive");
  }
  long long offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    Layer layer{offset, offset + static_cast<long long>(sizes_[l]) * sizes_[l + 1], sizes_[l],
                sizes_[l + 1]};
    offset = layer.bias_offset + layer.out;
    layers_.push_back(layer);
  }
  parameters_ = offset;
}

Eigen::VectorXd Mlp::initial_parameters(std::uint64_t seed) const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(parameters_);
  Rng rng = make_rng(seed, Stream::kWeights);
  for (const Layer& layer : layers_) {
    const double limit = std::sqrt(6.0 / (layer.in + layer.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    const long long count = static_cast<long long>(layer.in) * layer.out;
    for (long long k = 0; k < count; ++k) w(layer.weight_offset + k) = dist(rng);
  }
  return w;
}

Eigen::MatrixXd Mlp::logits(const Eigen::VectorXd& w, const Eigen::MatrixXd& inputs,
                            std::vector<Eigen::MatrixXd>* activations) const {
  if (w.size() != parameters_) throw std::invalid_argument("parameter vector size mismatch");
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    MatrixMap weight(w.data() + layer.weight_offset, layer.out, layer.in);
    VectorMap bias(w.data() + layer.bias_offset, layer.out);
    Eigen::MatrixXd z = weight * a;
    z.colwise() += bias;
    if (activations) activations->push_back(std::move(a));
    if (l + 1 < layers_.size()) {
      a = z.cwiseMax(0.0);
    } else {
      return z;
    }
  }
  return a;  // unreachable: there is always an output layer
}

Eigen::MatrixXd Mlp::predict(const Eigen::VectorXd& w, const Eigen::MatrixXd& inputs) const {
  Eigen::MatrixXd z = logits(w, inputs, nullptr);
  const Eigen::RowVectorXd norm = log_normalizer(z);
  return (z.rowwise() - norm).array().exp();
}

double Mlp::loss(const Eigen::VectorXd& w, const Eigen::MatrixXd& inputs,
                 std::span<const int> labels) const {
  return evaluate(w, inputs, labels).loss;
}

Evaluation Mlp::evaluate(const Eigen::VectorXd& w, const Eigen::MatrixXd& inputs,
                         std::span<const int> labels) const {
  check_batch(inputs, labels, input_dim(), num_classes());
  const Eigen::MatrixXd z = logits(w, inputs, nullptr);
  const Eigen::RowVectorXd norm = log_normalizer(z);
  double loss = 0.0;
  long long correct = 0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    loss += norm(j) - z(y, j);
    Eigen::Index best = 0;
    z.col(j).maxCoeff(&best);
    if (best == y) ++correct;
  }
  const auto n = static_cast<double>(z.cols());
  return Evaluation{static_cast<double>(correct) / n, loss / n};
}

double Mlp::loss_and_gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& inputs,
                              std::span<const int> labels, Eigen::VectorXd& grad) const {
  check_batch(inputs, labels, input_dim(), num_classes());
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layers_.size());
  const Eigen::MatrixXd z = logits(w, inputs, &acts);
  const Eigen::RowVectorXd norm = log_normalizer(z);
  const auto n = static_cast<double>(inputs.cols());

  double loss = 0.0;
  Eigen::MatrixXd delta = (z.rowwise() - norm).array().exp();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    loss += norm(j) - z(y, j);
    delta(y, j) -= 1.0;
  }
  delta /= n;

  grad.setZero(parameters_);
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& layer = layers_[l];
    const Eigen::MatrixXd& input = acts[l];
    Eigen::Map<Eigen::MatrixXd>(grad.data() + layer.weight_offset, layer.out, layer.in).noalias() =
        delta * input.transpose();
    Eigen::Map<Eigen::VectorXd>(grad.data() + layer.bias_offset, layer.out) =
        delta.rowwise().sum();
    if (l == 0) break;
    MatrixMap weight(w.data() + layer.weight_offset, layer.out, layer.in);
    Eigen::MatrixXd back = weight.transpose() * delta;
    // The stored input of layer l is relu(z_{l-1}); its positive entries mark
    // where the ReLU passed gradient.
    delta = (input.array() > 0.0).select(back, 0.0);
  }
  return loss / n;
}

}  // namespace fedcell
