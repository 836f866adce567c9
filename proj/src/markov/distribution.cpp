#include "mcnn/markov/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mcnn/errors.hpp"

namespace mcnn::markov {

namespace {

constexpr double kSumTolerance = 1e-9;

void check_r(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw InputError("switch value r = " + std::to_string(r) + " lies outside [0, 1]");
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InputError("distribution has no outcomes");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InputError("distribution entries must be finite and non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw InputError("distribution sums to " + std::to_string(sum) + ", not 1");
  }
}

DiscreteDistribution DiscreteDistribution::from_counts(const std::vector<std::size_t>& counts) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) throw InputError("cannot normalize zero counts");
  std::vector<double> probs;
  probs.reserve(counts.size());
  for (std::size_t c : counts) probs.push_back(static_cast<double>(c) / static_cast<double>(total));
  return DiscreteDistribution(std::move(probs));
}

CumulativeIntervals cumulative(const DiscreteDistribution& dist) {
  CumulativeIntervals out;
  out.boundaries_.reserve(dist.size() + 1);
  out.boundaries_.push_back(0.0);
  double acc = 0.0;
  for (double p : dist.probs()) {
    acc += p;
    out.boundaries_.push_back(std::min(acc, 1.0));
  }
  out.boundaries_.back() = 1.0;
  // A zero-mass tail must stay empty after pinning the last boundary.
  for (std::size_t k = out.boundaries_.size() - 1; k-- > 1;) {
    if (dist[k] == 0.0) out.boundaries_[k] = out.boundaries_[k + 1];
    else break;
  }
  return out;
}

std::size_t sample_index(const CumulativeIntervals& intervals, double r) {
  check_r(r);
  const auto& b = intervals.boundaries();
  if (r >= 1.0) {
    for (std::size_t k = intervals.outcome_count(); k-- > 0;) {
      if (b[k + 1] > b[k]) return k;
    }
  }
  // First boundary strictly greater than r closes the owning interval.
  const auto it = std::upper_bound(b.begin(), b.end(), r);
  return static_cast<std::size_t>(it - b.begin()) - 1;
}

Vector augment(const Vector& x, double r) {
  check_r(r);
  Vector out(x.size() + 1);
  out(0) = r;
  out.tail(x.size()) = x;
  return out;
}

}  // namespace mcnn::markov
