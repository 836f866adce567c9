#pragma once

#include <cstddef>
#include <vector>

#include "mcnn/nn/network.hpp"

namespace mcnn::markov {

/// Probabilities over c discrete outcomes; non-negative, summing to 1
/// within 1e-9.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  /// Throws InputError when the invariants do not hold.
  explicit DiscreteDistribution(std::vector<double> probs);

  /// Normalizes positive integer counts.
  static DiscreteDistribution from_counts(const std::vector<std::size_t>& counts);

  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }

 private:
  std::vector<double> probs_;
};

/// Boundaries b_0..b_c of the inverse-CDF partition of [0, 1]. Outcome k
/// (zero-based) owns the half-open interval [b_k, b_{k+1}).
class CumulativeIntervals {
 public:
  const std::vector<double>& boundaries() const { return boundaries_; }
  std::size_t outcome_count() const { return boundaries_.size() - 1; }

 private:
  friend CumulativeIntervals cumulative(const DiscreteDistribution& dist);
  std::vector<double> boundaries_;
};

/// Prefix sums of the distribution with the last boundary pinned to 1.
CumulativeIntervals cumulative(const DiscreteDistribution& dist);

/// The outcome whose interval contains r; r == 1 maps to the last outcome
/// with positive mass. Throws InputError for r outside [0, 1].
std::size_t sample_index(const CumulativeIntervals& intervals, double r);

/// [r, x_1, ..., x_n]. Throws InputError for r outside [0, 1].
Vector augment(const Vector& x, double r);

}  // namespace mcnn::markov
