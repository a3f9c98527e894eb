#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fedcell {

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;  // mean cross-entropy
};

// Fully connected classifier with ReLU hidden layers and a softmax output,
// over a flat parameter vector. Layer l occupies [W_l (out x in, column-major),
// b_l (out)] in order. Inputs are feature x sample matrices.
class Mlp {
 public:
  explicit Mlp(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int num_classes() const { return sizes_.back(); }
  long long parameter_count() const { return parameters_; }

  // Glorot-uniform weights, zero biases.
  Eigen::VectorXd initial_parameters(std::uint64_t seed) const;

  // Class probabilities, one column per sample.
  Eigen::MatrixXd predict(const Eigen::VectorXd& w, const Eigen::MatrixXd& inputs) const;

  double loss(const Eigen::VectorXd& w, const Eigen::MatrixXd& inputs,
              std::span<const int> labels) const;

  // Mean cross-entropy over the batch; writes the mean gradient into `grad`.
  double loss_and_gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& inputs,
                           std::span<const int> labels, Eigen::VectorXd& grad) const;

  Evaluation evaluate(const Eigen::VectorXd& w, const Eigen::MatrixXd& inputs,
                      std::span<const int> labels) const;

 private:
  struct Layer {
    long long weight_offset;
    long long bias_offset;
    int in;
    int out;
  };

  Eigen::MatrixXd logits(const Eigen::VectorXd& w, const Eigen::MatrixXd& inputs,
                         std::vector<Eigen::MatrixXd>* activations) const;

  std::vector<int> sizes_;
  std::vector<Layer> layers_;
  long long parameters_ = 0;
};

}  // namespace fedcell
