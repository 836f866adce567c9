#include "mcnn/markov/empirical.hpp"

#include <charconv>

#include "mcnn/errors.hpp"
#include "mcnn/random.hpp"

namespace mcnn::markov {

std::string canonical_key(const Vector& v) {
  std::string key;
  key.reserve(static_cast<std::size_t>(v.size()) * 3);
  char buf[32];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) key.push_back(',');
    const double x = v(i) == 0.0 ? 0.0 : v(i);
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    key.append(buf, res.ptr);
  }
  return key;
}

const ConditionalEntry* EmpiricalConditional::find(const std::string& input_key) const {
  const auto it = index_.find(input_key);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

double EmpiricalConditional::probability(const Vector& input, const Vector& outcome) const {
  const ConditionalEntry* e = find(input);
  if (e == nullptr) return 0.0;
  const std::string key = canonical_key(outcome);
  for (std::size_t k = 0; k < e->outcome_keys.size(); ++k) {
    if (e->outcome_keys[k] == key) return e->distribution[k];
  }
  return 0.0;
}

void EmpiricalConditional::add_exact(const Vector& input, std::vector<Vector> outcomes, DiscreteDistribution dist) {
  if (outcomes.size() != dist.size()) throw ShapeError("one probability per outcome required");
  ConditionalEntry e;
  e.input_key = canonical_key(input);
  if (index_.count(e.input_key) != 0) throw InputError("input state " + e.input_key + " already present");
  e.input = input;
  for (const Vector& o : outcomes) {
    e.outcome_keys.push_back(canonical_key(o));
    for (std::size_t k = 0; k + 1 < e.outcome_keys.size(); ++k) {
      if (e.outcome_keys[k] == e.outcome_keys.back()) throw InputError("duplicate outcome " + e.outcome_keys.back());
    }
  }
  e.outcomes = std::move(outcomes);
  e.intervals = cumulative(dist);
  e.distribution = std::move(dist);
  index_.emplace(e.input_key, entries_.size());
  entries_.push_back(std::move(e));
}

EmpiricalConditional EmpiricalConditional::from_chain(const MarkovChain& chain) {
  EmpiricalConditional emp;
  const std::size_t n = chain.state_count();
  for (std::size_t j = 0; j < n; ++j) {
    const DiscreteDistribution col = chain.column(j);
    std::vector<Vector> outcomes;
    std::vector<double> probs;
    for (std::size_t i = 0; i < n; ++i) {
      if (col[i] > 0.0) {
        outcomes.push_back(nn::one_hot(i, n));
        probs.push_back(col[i]);
      }
    }
    emp.add_exact(nn::one_hot(j, n), std::move(outcomes), DiscreteDistribution(std::move(probs)));
  }
  return emp;
}

EmpiricalConditional estimate_empirical(const std::vector<nn::Sample>& pairs) {
  if (pairs.empty()) throw InputError("cannot estimate a conditional from no observations");
  EmpiricalConditional emp;
  for (const nn::Sample& s : pairs) {
    std::string in_key = canonical_key(s.input);
    auto [it, inserted] = emp.index_.try_emplace(in_key, emp.entries_.size());
    if (inserted) {
      ConditionalEntry e;
      e.input_key = std::move(in_key);
      e.input = s.input;
      emp.entries_.push_back(std::move(e));
    }
    ConditionalEntry& e = emp.entries_[it->second];
    std::string out_key = canonical_key(s.target);
    std::size_t k = 0;
    while (k < e.outcome_keys.size() && e.outcome_keys[k] != out_key) ++k;
    if (k == e.outcome_keys.size()) {
      e.outcome_keys.push_back(std::move(out_key));
      e.outcomes.push_back(s.target);
      e.counts.push_back(0);
    }
    ++e.counts[k];
  }
  for (ConditionalEntry& e : emp.entries_) {
    e.distribution = DiscreteDistribution::from_counts(e.counts);
    e.intervals = cumulative(e.distribution);
  }
  return emp;
}

std::vector<AugmentedPair> generate_pairs(const EmpiricalConditional& emp, std::size_t pairs_per_input,
                                          const std::function<double()>& draw_r) {
  return generate_pairs(emp, pairs_per_input, pairs_per_input, draw_r);
}

std::vector<AugmentedPair> generate_pairs(const EmpiricalConditional& emp, std::size_t pairs_per_input,
                                          std::size_t pairs_per_multi_outcome_input,
                                          const std::function<double()>& draw_r) {
  if (emp.empty()) throw InputError("empirical conditional is empty");
  if (pairs_per_input == 0 || pairs_per_multi_outcome_input == 0) {
    throw InputError("pairs per input must be positive");
  }
  std::vector<AugmentedPair> out;
  std::size_t total = 0;
  for (const ConditionalEntry& e : emp.entries()) {
    total += e.outcomes.size() > 1 ? pairs_per_multi_outcome_input : pairs_per_input;
  }
  out.reserve(total);
  for (const ConditionalEntry& e : emp.entries()) {
    const std::size_t n_pairs = e.outcomes.size() > 1 ? pairs_per_multi_outcome_input : pairs_per_input;
    for (std::size_t n = 0; n < n_pairs; ++n) {
      const double r = draw_r();
      out.push_back({augment(e.input, r), e.outcomes[sample_index(e.intervals, r)]});
    }
  }
  return out;
}

std::vector<AugmentedPair> generate_pairs(const EmpiricalConditional& emp, std::size_t pairs_per_input,
                                          std::uint64_t seed) {
  Rng rng(seed);
  return generate_pairs(emp, pairs_per_input, [&rng] { return rng.uniform01(); });
}

}  // namespace mcnn::markov
