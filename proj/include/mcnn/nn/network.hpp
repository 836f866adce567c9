#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace mcnn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace nn {

enum class Activation { kSigmoid, kLinear };

std::string_view activation_name(Activation a);
/// Throws ParseError for names other than "sigmoid" / "linear".
Activation activation_from_name(std::string_view name);

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::kSigmoid;
};

/// Builds the usual topology: sigmoid hidden layers, linear output layer.
/// `dims` lists every layer width including input and output, e.g.
/// {10, 80, 30, 9}.
std::vector<LayerSpec> mlp_specs(const std::vector<std::size_t>& dims);

struct Layer {
  Matrix weights;  // out_dim x in_dim
  Vector bias;     // out_dim
  Activation activation = Activation::kSigmoid;

  std::size_t in_dim() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weights.rows()); }

  bool operator==(const Layer& other) const {
    return activation == other.activation && weights == other.weights && bias == other.bias;
  }
};

/// A dense feed-forward network. Once trained it is a pure function of its
/// input; concurrent forward() calls on a shared instance are safe.
class Network {
 public:
  Network() = default;
  /// Validates that layer shapes chain and all entries are finite.
  explicit Network(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;

  bool operator==(const Network& other) const { return layers_ == other.layers_; }

 private:
  std::vector<Layer> layers_;
};

struct Sample {
  Vector input;
  Vector target;
};

/// Training pairs; all inputs share one length and all targets share one.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Sample> samples);

  void add(Sample s);

  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t input_dim() const { return empty() ? 0 : samples_.front().input.size(); }
  std::size_t target_dim() const { return empty() ? 0 : samples_.front().target.size(); }

 private:
  std::vector<Sample> samples_;
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 10;
  std::size_t batch_size = 1;
  std::uint64_t rng_seed = 0;
  bool shuffle = true;
};

struct LayerGradient {
  Matrix d_weights;
  Vector d_bias;
};

using Gradients = std::vector<LayerGradient>;

struct BackpropResult {
  double loss = 0.0;
  Gradients grads;
};

struct TrainResult {
  Network net;
  std::vector<double> loss_history;
};

/// Glorot-uniform weights in [-a, a], a = sqrt(6 / (in + out)); zero biases.
Network init_network(const std::vector<LayerSpec>& specs, std::uint64_t seed);

Vector forward(const Network& net, const Vector& x);

/// (1/n) * sum (y_i - t_i)^2
double mse_loss(const Vector& y, const Vector& t);

/// Exact gradient of mse_loss(forward(net, x), t).
BackpropResult backprop(const Network& net, const Vector& x, const Vector& t);

/// Mean loss and mean gradient over the columns of `inputs` / `targets`.
BackpropResult backprop_batch(const Network& net, const Matrix& inputs, const Matrix& targets);

Network sgd_step(const Network& net, const Gradients& grads, double learning_rate);
/// In-place variant used by the trainer.
void apply_sgd(Network& net, const Gradients& grads, double learning_rate);

/// Mean per-sample loss over the dataset.
double dataset_loss(const Network& net, const Dataset& data);

/// Called after every epoch with the 1-based epoch number, the current
/// network and its mean dataset loss.
using EpochCallback = std::function<void(std::size_t epoch, const Network& net, double loss)>;

TrainResult train(Network net, const Dataset& data, const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Index of the maximum entry, smallest index on ties.
std::size_t argmax_decode(const Vector& y);

Vector one_hot(std::size_t index, std::size_t size);

}  // namespace nn
}  // namespace mcnn
