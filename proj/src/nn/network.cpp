#include "mcnn/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mcnn/errors.hpp"
#include "mcnn/random.hpp"

namespace mcnn::nn {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void activate_inplace(Matrix& z, Activation a) {
  if (a == Activation::kSigmoid) z = z.unaryExpr([](double v) { return sigmoid(v); });
}

// Multiplies the upstream gradient by the activation derivative, expressed
// through the activation's output.
void scale_by_derivative(Matrix& delta, const Matrix& activated, Activation a) {
  if (a == Activation::kSigmoid) {
    delta.array() *= activated.array() * (1.0 - activated.array());
  }
}

std::string shape_str(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

void check_input(const Network& net, Eigen::Index rows) {
  if (net.layers().empty()) throw ShapeError("network has no layers");
  if (static_cast<std::size_t>(rows) != net.input_dim()) {
    throw ShapeError("input length " + std::to_string(rows) + " does not match network input " +
                     std::to_string(net.input_dim()));
  }
}

void check_congruent(const Network& net, const Gradients& grads) {
  if (grads.size() != net.layers().size()) throw ShapeError("gradient layer count mismatch");
  for (std::size_t k = 0; k < grads.size(); ++k) {
    const Layer& l = net.layers()[k];
    if (grads[k].d_weights.rows() != l.weights.rows() || grads[k].d_weights.cols() != l.weights.cols() ||
        grads[k].d_bias.size() != l.bias.size()) {
      throw ShapeError("gradient for layer " + std::to_string(k) + " has shape " +
                       shape_str(grads[k].d_weights.rows(), grads[k].d_weights.cols()) + ", layer is " +
                       shape_str(l.weights.rows(), l.weights.cols()));
    }
  }
}

}  // namespace

std::string_view activation_name(Activation a) {
  return a == Activation::kSigmoid ? "sigmoid" : "linear";
}

Activation activation_from_name(std::string_view name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "linear") return Activation::kLinear;
  throw ParseError("unknown activation '" + std::string(name) + "'");
}

std::vector<LayerSpec> mlp_specs(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw ShapeError("need at least input and output widths");
  std::vector<LayerSpec> specs;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const bool last = k + 2 == dims.size();
    specs.push_back({dims[k], dims[k + 1], last ? Activation::kLinear : Activation::kSigmoid});
  }
  return specs;
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("network has no layers");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    if (l.weights.rows() == 0 || l.weights.cols() == 0) {
      throw ShapeError("layer " + std::to_string(k) + " has an empty weight matrix");
    }
    if (l.bias.size() != l.weights.rows()) {
      throw ShapeError("layer " + std::to_string(k) + " bias length does not match output width");
    }
    if (k > 0 && l.in_dim() != layers_[k - 1].out_dim()) {
      throw ShapeError("layer " + std::to_string(k) + " input width " + std::to_string(l.in_dim()) +
                       " does not chain with previous output " + std::to_string(layers_[k - 1].out_dim()));
    }
    if (!l.weights.allFinite() || !l.bias.allFinite()) {
      throw InputError("layer " + std::to_string(k) + " has non-finite parameters");
    }
  }
}

std::size_t Network::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
std::size_t Network::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

Dataset::Dataset(std::vector<Sample> samples) {
  samples_.reserve(samples.size());
  for (Sample& s : samples) add(std::move(s));
}

void Dataset::add(Sample s) {
  if (!samples_.empty() &&
      (static_cast<std::size_t>(s.input.size()) != input_dim() ||
       static_cast<std::size_t>(s.target.size()) != target_dim())) {
    throw ShapeError("sample dimensions differ from the rest of the dataset");
  }
  samples_.push_back(std::move(s));
}

Network init_network(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
  if (specs.empty()) throw ShapeError("no layer specs");
  Rng rng(seed);
  std::vector<Layer> layers;
  layers.reserve(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const LayerSpec& s = specs[k];
    if (s.in_dim == 0 || s.out_dim == 0) throw ShapeError("layer widths must be positive");
    if (k > 0 && s.in_dim != specs[k - 1].out_dim) {
      throw ShapeError("layer spec " + std::to_string(k) + " does not chain with its predecessor");
    }
    const double a = std::sqrt(6.0 / static_cast<double>(s.in_dim + s.out_dim));
    Layer layer;
    layer.weights.resize(static_cast<Eigen::Index>(s.out_dim), static_cast<Eigen::Index>(s.in_dim));
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = rng.uniform(-a, a);
    }
    layer.bias = Vector::Zero(static_cast<Eigen::Index>(s.out_dim));
    layer.activation = s.activation;
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

Vector forward(const Network& net, const Vector& x) {
  check_input(net, x.size());
  Matrix a = x;
  for (const Layer& l : net.layers()) {
    Matrix z = l.weights * a;
    z.colwise() += l.bias;
    activate_inplace(z, l.activation);
    a = std::move(z);
  }
  return a.col(0);
}

double mse_loss(const Vector& y, const Vector& t) {
  if (y.size() != t.size()) throw ShapeError("loss operands differ in length");
  if (y.size() == 0) return 0.0;
  return (y - t).squaredNorm() / static_cast<double>(y.size());
}

BackpropResult backprop_batch(const Network& net, const Matrix& inputs, const Matrix& targets) {
  check_input(net, inputs.rows());
  if (static_cast<std::size_t>(targets.rows()) != net.output_dim() || targets.cols() != inputs.cols()) {
    throw ShapeError("target block " + shape_str(targets.rows(), targets.cols()) + " does not match output " +
                     std::to_string(net.output_dim()) + " x " + std::to_string(inputs.cols()));
  }
  const auto& layers = net.layers();
  const double batch = static_cast<double>(inputs.cols());
  const double width = static_cast<double>(targets.rows());

  // activations[0] is the input, activations[k + 1] the output of layer k.
  std::vector<Matrix> activations;
  activations.reserve(layers.size() + 1);
  activations.push_back(inputs);
  for (const Layer& l : layers) {
    Matrix z = l.weights * activations.back();
    z.colwise() += l.bias;
    activate_inplace(z, l.activation);
    activations.push_back(std::move(z));
  }

  BackpropResult out;
  Matrix delta = activations.back() - targets;
  out.loss = delta.squaredNorm() / (width * batch);
  delta *= 2.0 / (width * batch);

  out.grads.resize(layers.size());
  for (std::size_t k = layers.size(); k-- > 0;) {
    scale_by_derivative(delta, activations[k + 1], layers[k].activation);
    out.grads[k].d_weights = delta * activations[k].transpose();
    out.grads[k].d_bias = delta.rowwise().sum();
    if (k > 0) delta = layers[k].weights.transpose() * delta;
  }
  return out;
}

BackpropResult backprop(const Network& net, const Vector& x, const Vector& t) {
  check_input(net, x.size());
  if (static_cast<std::size_t>(t.size()) != net.output_dim()) {
    throw ShapeError("target length " + std::to_string(t.size()) + " does not match network output " +
                     std::to_string(net.output_dim()));
  }
  return backprop_batch(net, x, t);
}

void apply_sgd(Network& net, const Gradients& grads, double learning_rate) {
  check_congruent(net, grads);
  auto& layers = net.mutable_layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].weights -= learning_rate * grads[k].d_weights;
    layers[k].bias -= learning_rate * grads[k].d_bias;
  }
}

Network sgd_step(const Network& net, const Gradients& grads, double learning_rate) {
  Network next = net;
  apply_sgd(next, grads, learning_rate);
  return next;
}

namespace {

struct PackedData {
  Matrix inputs;   // input_dim x N
  Matrix targets;  // target_dim x N
};

PackedData pack(const Dataset& data) {
  PackedData p;
  const auto n = static_cast<Eigen::Index>(data.size());
  p.inputs.resize(static_cast<Eigen::Index>(data.input_dim()), n);
  p.targets.resize(static_cast<Eigen::Index>(data.target_dim()), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Sample& s = data.samples()[static_cast<std::size_t>(i)];
    p.inputs.col(i) = s.input;
    p.targets.col(i) = s.target;
  }
  return p;
}

double packed_loss(const Network& net, const PackedData& p) {
  constexpr Eigen::Index kChunk = 2048;
  const Eigen::Index n = p.inputs.cols();
  double total = 0.0;
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - start);
    Matrix a = p.inputs.middleCols(start, len);
    for (const Layer& l : net.layers()) {
      Matrix z = l.weights * a;
      z.colwise() += l.bias;
      activate_inplace(z, l.activation);
      a = std::move(z);
    }
    total += (a - p.targets.middleCols(start, len)).squaredNorm();
  }
  return total / (static_cast<double>(p.targets.rows()) * static_cast<double>(n));
}

void check_dataset(const Network& net, const Dataset& data) {
  if (data.empty()) throw InputError("dataset is empty");
  if (data.input_dim() != net.input_dim()) {
    throw ShapeError("dataset input length " + std::to_string(data.input_dim()) + " does not match network input " +
                     std::to_string(net.input_dim()));
  }
  if (data.target_dim() != net.output_dim()) {
    throw ShapeError("dataset target length " + std::to_string(data.target_dim()) +
                     " does not match network output " + std::to_string(net.output_dim()));
  }
}

}  // namespace

double dataset_loss(const Network& net, const Dataset& data) {
  check_dataset(net, data);
  return packed_loss(net, pack(data));
}

TrainResult train(Network net, const Dataset& data, const TrainConfig& config, const EpochCallback& on_epoch) {
  check_dataset(net, data);
  if (!(config.learning_rate > 0.0)) throw InputError("learning rate must be positive");
  if (config.epochs == 0) throw InputError("epochs must be positive");
  if (config.batch_size == 0 || config.batch_size > data.size()) {
    throw InputError("batch size must lie in [1, dataset size]");
  }

  const PackedData all = pack(data);
  const auto n = static_cast<std::size_t>(all.inputs.cols());
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(config.rng_seed);

  TrainResult result;
  result.loss_history.reserve(config.epochs);
  Matrix xb;
  Matrix tb;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, n - start);
      xb.resize(all.inputs.rows(), static_cast<Eigen::Index>(len));
      tb.resize(all.targets.rows(), static_cast<Eigen::Index>(len));
      for (std::size_t i = 0; i < len; ++i) {
        xb.col(static_cast<Eigen::Index>(i)) = all.inputs.col(order[start + i]);
        tb.col(static_cast<Eigen::Index>(i)) = all.targets.col(order[start + i]);
      }
      const BackpropResult step = backprop_batch(net, xb, tb);
      apply_sgd(net, step.grads, config.learning_rate);
    }
    result.loss_history.push_back(packed_loss(net, all));
    if (on_epoch) on_epoch(epoch + 1, net, result.loss_history.back());
  }
  result.net = std::move(net);
  return result;
}

std::size_t argmax_decode(const Vector& y) {
  if (y.size() == 0) throw InputError("cannot decode an empty vector");
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < y.size(); ++i) {
    if (y(i) > y(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  }
  return best;
}

Vector one_hot(std::size_t index, std::size_t size) {
  if (index >= size) throw InputError("one-hot index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(size));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

}  // namespace mcnn::nn
