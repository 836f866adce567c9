#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mcnn/markov/distribution.hpp"

namespace mcnn::markov {

/// State labels plus a column-stochastic transition matrix:
/// transition(i, j) = p(next = i | current = j).
class MarkovChain {
 public:
  MarkovChain() = default;
  /// Validates squareness, entries in [0, 1] and column sums of 1 within
  /// `tolerance`.
  MarkovChain(std::vector<std::string> labels, Matrix transition, double tolerance = 1e-9);

  std::size_t state_count() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Matrix& transition() const { return transition_; }

  /// Outgoing distribution of `state` (column `state` of the matrix).
  DiscreteDistribution column(std::size_t state) const;

 private:
  std::vector<std::string> labels_;
  Matrix transition_;
};

/// Inverse-CDF step on column `state`.
std::size_t chain_step(const MarkovChain& chain, std::size_t state, double r);

/// start followed by n_steps successors, each drawn with a fresh uniform r.
std::vector<std::size_t> simulate_chain(const MarkovChain& chain, std::size_t start, std::size_t n_steps,
                                        std::uint64_t seed);

inline constexpr std::string_view kChainFormat = "mcnn-chain-v1";

// Chain document: {"format":"mcnn-chain-v1","states":[labels...],
// "transition":[[...]]} where transition is stored row-major and
// transition[i][j] = p(i | j). Columns must sum to 1 within 1e-6.
std::string save_chain(const MarkovChain& chain);
MarkovChain load_chain(std::string_view text);
MarkovChain load_chain_file(const std::filesystem::path& path);

}  // namespace mcnn::markov
