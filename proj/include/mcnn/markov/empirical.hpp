#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mcnn/markov/chain.hpp"
#include "mcnn/markov/distribution.hpp"
#include "mcnn/nn/network.hpp"

namespace mcnn::markov {

/// Canonical text key of a discrete vector: shortest round-trip decimal
/// rendering of each entry, comma separated ("-1,0,1"). Negative zero is
/// written as 0.
std::string canonical_key(const Vector& v);

/// Conditional outcome distribution observed for one input state.
struct ConditionalEntry {
  std::string input_key;
  Vector input;
  std::vector<std::string> outcome_keys;  // first-appearance order
  std::vector<Vector> outcomes;
  std::vector<std::size_t> counts;  // empty when built from exact probabilities
  DiscreteDistribution distribution;
  CumulativeIntervals intervals;
};

/// p(y | x) per discrete input state. Entries keep the order in which their
/// input states first appeared.
class EmpiricalConditional {
 public:
  const std::vector<ConditionalEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const ConditionalEntry* find(const std::string& input_key) const;
  const ConditionalEntry* find(const Vector& input) const { return find(canonical_key(input)); }

  /// Probability of `outcome` given `input`; 0 for unseen pairs.
  double probability(const Vector& input, const Vector& outcome) const;

  /// Adds an input state whose outcome probabilities are known exactly.
  void add_exact(const Vector& input, std::vector<Vector> outcomes, DiscreteDistribution dist);

  /// Exact conditionals of a chain: one-hot current state -> one-hot successor,
  /// restricted to successors with positive probability.
  static EmpiricalConditional from_chain(const MarkovChain& chain);

 private:
  friend EmpiricalConditional estimate_empirical(const std::vector<nn::Sample>& pairs);
  std::vector<ConditionalEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Relative frequencies p(y_i | x) = #(x, y_i) / #(x, *). Throws InputError
/// on empty input.
EmpiricalConditional estimate_empirical(const std::vector<nn::Sample>& pairs);

using AugmentedPair = nn::Sample;  // input = [r | x]

/// For every input state emits `pairs_per_input` pairs, each drawing r from
/// `draw_r` and selecting the target through the state's cumulative intervals.
std::vector<AugmentedPair> generate_pairs(const EmpiricalConditional& emp, std::size_t pairs_per_input,
                                          const std::function<double()>& draw_r);

/// Same with r uniform on [0, 1) from a stream seeded by `seed`.
std::vector<AugmentedPair> generate_pairs(const EmpiricalConditional& emp, std::size_t pairs_per_input,
                                          std::uint64_t seed);

/// Variant with a separate budget for input states that have more than one
/// outcome; only those states need the switch value to choose.
std::vector<AugmentedPair> generate_pairs(const EmpiricalConditional& emp, std::size_t pairs_per_input,
                                          std::size_t pairs_per_multi_outcome_input,
                                          const std::function<double()>& draw_r);

}  // namespace mcnn::markov
