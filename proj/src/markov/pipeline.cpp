#include "mcnn/markov/pipeline.hpp"

#include "mcnn/errors.hpp"
#include "mcnn/random.hpp"

namespace mcnn::markov {

std::vector<AugmentedPair> training_pairs(const EmpiricalConditional& emp, const McTrainOptions& options) {
  Rng rng(derive_seed(options.seed, 1));
  const std::size_t multi =
      options.multi_outcome_pairs_per_input ? options.multi_outcome_pairs_per_input : options.pairs_per_input;
  return generate_pairs(emp, options.pairs_per_input, multi, [&rng] { return rng.uniform01(); });
}

McTrainResult train_markov_network(const EmpiricalConditional& emp, const McTrainOptions& options,
                                   const nn::EpochCallback& on_epoch) {
  if (emp.empty()) throw InputError("empirical conditional is empty");
  std::vector<AugmentedPair> pairs = training_pairs(emp, options);

  std::vector<std::size_t> dims;
  dims.push_back(static_cast<std::size_t>(pairs.front().input.size()));
  dims.insert(dims.end(), options.hidden.begin(), options.hidden.end());
  dims.push_back(static_cast<std::size_t>(pairs.front().target.size()));
  nn::Network net = nn::init_network(nn::mlp_specs(dims), derive_seed(options.seed, 0));

  McTrainResult out;
  out.pair_count = pairs.size();
  nn::TrainResult trained = nn::train(std::move(net), nn::Dataset(std::move(pairs)), options.train, on_epoch);
  out.net = std::move(trained.net);
  out.loss_history = std::move(trained.loss_history);
  return out;
}

nn::Dataset strip_switch(const std::vector<AugmentedPair>& pairs) {
  nn::Dataset data;
  for (const AugmentedPair& p : pairs) {
    if (p.input.size() == 0) throw ShapeError("augmented input has no switch value");
    data.add({p.input.tail(p.input.size() - 1), p.target});
  }
  return data;
}

std::size_t decode_at(const nn::Network& net, const Vector& x, double r) {
  return nn::argmax_decode(nn::forward(net, augment(x, r)));
}

}  // namespace mcnn::markov
