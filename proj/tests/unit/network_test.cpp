#include "mcnn/nn/network.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "mcnn/errors.hpp"
#include "mcnn/random.hpp"

using namespace mcnn;
using namespace mcnn::nn;

namespace {

Network single_layer(const Matrix& w, const Vector& b, Activation a) {
  Layer l;
  l.weights = w;
  l.bias = b;
  l.activation = a;
  return Network({l});
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Random shape, activations and parameters for the gradient property.
struct RandomCase {
  Network net;
  Vector x;
  Vector t;
};

RandomCase random_case(Rng& rng) {
  const std::size_t n_layers = 1 + rng.below(3);
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i <= n_layers; ++i) dims.push_back(1 + rng.below(5));
  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i < n_layers; ++i) {
    specs.push_back({dims[i], dims[i + 1], rng.below(2) ? Activation::kSigmoid : Activation::kLinear});
  }
  RandomCase c{init_network(specs, rng.next()), Vector(dims.front()), Vector(dims.back())};
  for (auto& layer : c.net.mutable_layers()) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = rng.uniform(-1, 1);
  }
  for (Eigen::Index i = 0; i < c.x.size(); ++i) c.x(i) = rng.uniform(-2, 2);
  for (Eigen::Index i = 0; i < c.t.size(); ++i) c.t(i) = rng.uniform(-1, 1);
  return c;
}

double rel_error(double a, double b) {
  const double diff = std::abs(a - b);
  if (diff < 1e-7) return 0.0;
  return diff / std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST(Mlp, SpecsChainWithLinearOutput) {
  const auto specs = mlp_specs({10, 80, 30, 9});
  ASSERT_EQ(specs.size(), 3u);
  EXPECT_EQ(specs[0].activation, Activation::kSigmoid);
  EXPECT_EQ(specs[1].activation, Activation::kSigmoid);
  EXPECT_EQ(specs[2].activation, Activation::kLinear);
  EXPECT_THROW(mlp_specs({3}), ShapeError);
}

TEST(Init, ReferenceTopologyShapes) {
  const Network net = init_network(mlp_specs({10, 80, 30, 9}), 7);
  ASSERT_EQ(net.layers().size(), 3u);
  EXPECT_EQ(net.layers()[0].weights.rows(), 80);
  EXPECT_EQ(net.layers()[0].weights.cols(), 10);
  EXPECT_EQ(net.layers()[1].weights.rows(), 30);
  EXPECT_EQ(net.layers()[1].weights.cols(), 80);
  EXPECT_EQ(net.layers()[2].weights.rows(), 9);
  EXPECT_EQ(net.layers()[2].weights.cols(), 30);
  EXPECT_EQ(net.input_dim(), 10u);
  EXPECT_EQ(net.output_dim(), 9u);
  EXPECT_EQ(net.parameter_count(), 80u * 11 + 30u * 81 + 9u * 31);
}

TEST(Init, BiasesZeroAndWeightsWithinGlorotRange) {
  const Network net = init_network(mlp_specs({10, 80, 30, 9}), 1);
  for (const Layer& l : net.layers()) {
    const double a = std::sqrt(6.0 / static_cast<double>(l.in_dim() + l.out_dim()));
    EXPECT_TRUE((l.bias.array() == 0.0).all());
    EXPECT_LE(l.weights.cwiseAbs().maxCoeff(), a);
    EXPECT_GT(l.weights.cwiseAbs().maxCoeff(), 0.9 * a);
  }
  const Network one = init_network({{1, 1, Activation::kSigmoid}}, 99);
  EXPECT_EQ(one.layers()[0].bias(0), 0.0);
}

TEST(Init, SameSeedSameNetwork) {
  EXPECT_EQ(init_network(mlp_specs({4, 5, 3}), 7), init_network(mlp_specs({4, 5, 3}), 7));
  EXPECT_FALSE(init_network(mlp_specs({4, 5, 3}), 7) == init_network(mlp_specs({4, 5, 3}), 8));
}

TEST(Init, RejectsBrokenChain) {
  EXPECT_THROW(init_network({{2, 3, Activation::kSigmoid}, {4, 1, Activation::kLinear}}, 0), ShapeError);
  EXPECT_THROW(init_network({}, 0), ShapeError);
}

TEST(Network, RejectsNonFiniteEntries) {
  Matrix w = Matrix::Zero(1, 1);
  w(0, 0) = std::nan("");
  EXPECT_THROW(single_layer(w, Vector::Zero(1), Activation::kLinear), InputError);
}

TEST(Forward, IdentityLinear) {
  const Network net = single_layer(Matrix::Identity(4, 4), Vector::Zero(4), Activation::kLinear);
  EXPECT_EQ(forward(net, vec({1, 0, 0, 0})), vec({1, 0, 0, 0}));
}

TEST(Forward, ZeroSigmoidGivesHalf) {
  const Network net = single_layer(Matrix::Zero(3, 2), Vector::Zero(3), Activation::kSigmoid);
  EXPECT_EQ(forward(net, vec({5, -2})), vec({0.5, 0.5, 0.5}));
}

TEST(Forward, HandArithmetic) {
  Matrix w(1, 2);
  w << 1, -1;
  const Network net = single_layer(w, vec({0.5}), Activation::kSigmoid);
  EXPECT_NEAR(forward(net, vec({1, 1}))(0), 1.0 / (1.0 + std::exp(-0.5)), 1e-15);
  EXPECT_NEAR(forward(net, vec({1, 1}))(0), 0.62246, 1e-5);
}

TEST(Forward, RejectsWrongLength) {
  const Network net = init_network(mlp_specs({3, 2}), 0);
  EXPECT_THROW(forward(net, vec({1, 2})), ShapeError);
}

TEST(Forward, IsBitwiseRepeatable) {
  const Network net = init_network(mlp_specs({5, 7, 3}), 4);
  const Vector x = vec({0.1, -0.3, 0.7, 1.0, 0.0});
  const Vector y = forward(net, x);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(forward(net, x), y);
}

TEST(MseLoss, Examples) {
  EXPECT_EQ(mse_loss(vec({0.3, 0.7}), vec({0.3, 0.7})), 0.0);
  EXPECT_DOUBLE_EQ(mse_loss(vec({1, 0}), vec({0, 1})), 1.0);
  EXPECT_DOUBLE_EQ(mse_loss(vec({0.5, 0.5}), vec({1, 0})), 0.25);
  EXPECT_THROW(mse_loss(vec({1}), vec({1, 2})), ShapeError);
}

TEST(Backprop, OneByOneLinear) {
  const double w = 1.7;
  Matrix m(1, 1);
  m << w;
  const auto r = backprop(single_layer(m, vec({0}), Activation::kLinear), vec({1}), vec({0}));
  EXPECT_DOUBLE_EQ(r.grads[0].d_weights(0, 0), 2 * w);
  EXPECT_DOUBLE_EQ(r.grads[0].d_bias(0), 2 * w);
  EXPECT_DOUBLE_EQ(r.loss, w * w);
}

TEST(Backprop, ZeroErrorGivesZeroOutputDelta) {
  const Network net = init_network(mlp_specs({3, 4, 2}), 5);
  const Vector x = vec({0.2, -0.4, 0.9});
  const auto r = backprop(net, x, forward(net, x));
  EXPECT_EQ(r.loss, 0.0);
  for (const auto& g : r.grads) {
    EXPECT_EQ(g.d_weights.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(g.d_bias.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Backprop, RejectsWrongTargetLength) {
  const Network net = init_network(mlp_specs({3, 2}), 0);
  EXPECT_THROW(backprop(net, vec({1, 2, 3}), vec({1})), ShapeError);
}

TEST(BackpropProperty, MatchesCentralDifferencesOn200RandomNets) {
  Rng rng(20240601);
  const double h = 1e-5;
  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    RandomCase c = random_case(rng);
    const auto analytic = backprop(c.net, c.x, c.t);
    auto& layers = c.net.mutable_layers();
    auto numeric = [&](double& param) {
      const double saved = param;
      param = saved + h;
      const double up = mse_loss(forward(c.net, c.x), c.t);
      param = saved - h;
      const double down = mse_loss(forward(c.net, c.x), c.t);
      param = saved;
      return (up - down) / (2 * h);
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (Eigen::Index i = 0; i < layers[l].weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < layers[l].weights.cols(); ++j) {
          worst = std::max(worst, rel_error(analytic.grads[l].d_weights(i, j), numeric(layers[l].weights(i, j))));
        }
        worst = std::max(worst, rel_error(analytic.grads[l].d_bias(i), numeric(layers[l].bias(i))));
      }
    }
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(BackpropBatch, IsMeanOfSingleSampleGradients) {
  const Network net = init_network(mlp_specs({3, 4, 2}), 12);
  Rng rng(1);
  Matrix xs(3, 5);
  Matrix ts(2, 5);
  for (Eigen::Index i = 0; i < xs.size(); ++i) xs.data()[i] = rng.uniform(-1, 1);
  for (Eigen::Index i = 0; i < ts.size(); ++i) ts.data()[i] = rng.uniform(-1, 1);
  const auto batch = backprop_batch(net, xs, ts);
  double loss = 0;
  Matrix dw0 = Matrix::Zero(4, 3);
  for (Eigen::Index k = 0; k < 5; ++k) {
    const auto one = backprop(net, xs.col(k), ts.col(k));
    loss += one.loss / 5;
    dw0 += one.grads[0].d_weights / 5;
  }
  EXPECT_NEAR(batch.loss, loss, 1e-12);
  EXPECT_LT((batch.grads[0].d_weights - dw0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sgd, Examples) {
  Matrix w(1, 1);
  w << 1.0;
  const Network net = single_layer(w, vec({0}), Activation::kLinear);
  Gradients g{{Matrix::Constant(1, 1, 2.0), Vector::Zero(1)}};
  EXPECT_DOUBLE_EQ(sgd_step(net, g, 0.1).layers()[0].weights(0, 0), 0.8);
  EXPECT_EQ(sgd_step(net, g, 0.0), net);
  Gradients zero{{Matrix::Zero(1, 1), Vector::Zero(1)}};
  EXPECT_EQ(sgd_step(net, zero, 0.5), net);
  Gradients bad{{Matrix::Zero(2, 1), Vector::Zero(1)}};
  EXPECT_THROW(sgd_step(net, bad, 0.1), ShapeError);
}

TEST(Train, ExactFitStaysPut) {
  const Network net = single_layer(Matrix::Constant(1, 1, 2.0), vec({0}), Activation::kLinear);
  Dataset data({{vec({1}), vec({2})}});
  const auto r = train(net, data, {.learning_rate = 0.1, .epochs = 5, .batch_size = 1});
  EXPECT_EQ(r.net, net);
  for (double l : r.loss_history) EXPECT_EQ(l, 0.0);
}

TEST(Train, OneDimensionalLeastSquaresConverges) {
  const Network net = single_layer(Matrix::Zero(1, 1), vec({0}), Activation::kLinear);
  Dataset data({{vec({1}), vec({2})}});
  const auto r = train(net, data, {.learning_rate = 0.1, .epochs = 50, .batch_size = 1});
  ASSERT_EQ(r.loss_history.size(), 50u);
  EXPECT_LT(r.loss_history.back(), 1e-4);
}

TEST(Train, DeterministicGivenSeed) {
  const Network net = init_network(mlp_specs({2, 6, 2}), 3);
  Dataset data;
  Rng rng(8);
  for (int i = 0; i < 40; ++i) data.add({vec({rng.uniform01(), rng.uniform01()}), vec({rng.uniform01(), 0})});
  const TrainConfig cfg{.learning_rate = 0.3, .epochs = 7, .batch_size = 4, .rng_seed = 5};
  const auto a = train(net, data, cfg);
  const auto b = train(net, data, cfg);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(a.net, b.net);
}

TEST(Train, CallbackSeesEveryEpoch) {
  const Network net = init_network(mlp_specs({1, 1}), 0);
  Dataset data({{vec({1}), vec({1})}, {vec({0}), vec({0})}});
  std::vector<std::size_t> epochs;
  const auto r = train(net, data, {.learning_rate = 0.1, .epochs = 4, .batch_size = 2},
                       [&](std::size_t e, const Network&, double) { epochs.push_back(e); });
  EXPECT_EQ(epochs, (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(r.loss_history.size(), 4u);
}

TEST(Train, RejectsBadConfigs) {
  const Network net = init_network(mlp_specs({1, 1}), 0);
  Dataset data({{vec({1}), vec({1})}});
  EXPECT_THROW(train(net, Dataset{}, {}), InputError);
  EXPECT_THROW(train(net, data, {.learning_rate = 0.0}), InputError);
  EXPECT_THROW(train(net, data, {.epochs = 0}), InputError);
  EXPECT_THROW(train(net, data, {.batch_size = 2}), InputError);
  Dataset wide({{vec({1, 2}), vec({1})}});
  EXPECT_THROW(train(net, wide, {}), ShapeError);
}

TEST(Dataset, RejectsMixedShapes) {
  Dataset d;
  d.add({vec({1, 2}), vec({1})});
  EXPECT_THROW(d.add({vec({1}), vec({1})}), ShapeError);
  EXPECT_THROW(d.add({vec({1, 2}), vec({1, 2})}), ShapeError);
}

TEST(ArgmaxDecode, Examples) {
  EXPECT_EQ(argmax_decode(vec({0, 0, 1, 0})), 2u);
  EXPECT_EQ(argmax_decode(vec({0.5, 0.5})), 0u);
  EXPECT_EQ(argmax_decode(vec({0.1, 0.9, 0.3, 0.2})), 1u);
  EXPECT_THROW(argmax_decode(Vector()), InputError);
}

TEST(OneHot, RoundTripsThroughArgmax) {
  for (std::size_t k = 0; k < 256; ++k) EXPECT_EQ(argmax_decode(one_hot(k, 256)), k);
  EXPECT_THROW(one_hot(3, 3), InputError);
}
