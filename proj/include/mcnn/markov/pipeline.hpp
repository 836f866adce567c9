#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mcnn/markov/empirical.hpp"
#include "mcnn/nn/network.hpp"

namespace mcnn::markov {

struct McTrainOptions {
  std::vector<std::size_t> hidden;  // hidden layer widths
  std::size_t pairs_per_input = 1000;
  std::size_t multi_outcome_pairs_per_input = 0;  // 0: same as pairs_per_input
  nn::TrainConfig train;
  std::uint64_t seed = 0;  // split into init and pair-generation streams
};

struct McTrainResult {
  nn::Network net;
  std::vector<double> loss_history;
  std::size_t pair_count = 0;
};

/// Pairs drawn for `emp` with the seed stream train_markov_network uses.
std::vector<AugmentedPair> training_pairs(const EmpiricalConditional& emp, const McTrainOptions& options);

/// Generates switch-augmented pairs from `emp` and fits a
/// [1 + in : hidden... : out] network (sigmoid hidden, linear output).
McTrainResult train_markov_network(const EmpiricalConditional& emp, const McTrainOptions& options,
                                   const nn::EpochCallback& on_epoch = {});

/// Drops the leading switch value from every input.
nn::Dataset strip_switch(const std::vector<AugmentedPair>& pairs);

/// Decoded network outcome for `x` at switch value r.
std::size_t decode_at(const nn::Network& net, const Vector& x, double r);

}  // namespace mcnn::markov
