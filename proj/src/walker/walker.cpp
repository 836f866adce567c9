#include "mcnn/walker/walker.hpp"

#include <ostream>

#include "mcnn/errors.hpp"
#include "mcnn/markov/empirical.hpp"
#include "mcnn/nn/model_io.hpp"
#include "mcnn/random.hpp"

namespace mcnn::walker {

namespace {

const std::array<const char*, 6> kLabels{"+x", "-x", "+y", "-y", "+z", "-z"};

}  // namespace

WalkerModel build_walker_chain(int dimension) {
  if (dimension != 2 && dimension != 3) throw InputError("walker dimension must be 2 or 3");
  const auto n = static_cast<std::size_t>(2 * dimension);
  WalkerModel model;
  model.dimension = dimension;
  std::vector<std::string> labels;
  for (std::size_t s = 0; s < n; ++s) {
    Point step(static_cast<std::size_t>(dimension), 0);
    step[s / 2] = s % 2 == 0 ? 1 : -1;
    model.step_vectors.push_back(std::move(step));
    labels.emplace_back(kLabels[s]);
  }
  const auto size = static_cast<Eigen::Index>(n);
  Matrix t = Matrix::Constant(size, size, 1.0 / static_cast<double>(n - 1));
  t.diagonal().setZero();
  model.chain = markov::MarkovChain(std::move(labels), std::move(t));
  return model;
}

markov::McTrainResult train_walker_net(const WalkerModel& model, const WalkerTrainOptions& options) {
  markov::EmpiricalConditional emp;
  if (options.from_simulation == 0) {
    emp = markov::EmpiricalConditional::from_chain(model.chain);
  } else {
    const std::size_t n = model.state_count();
    const auto states = markov::simulate_chain(model.chain, 0, options.from_simulation, derive_seed(options.seed, 7));
    std::vector<nn::Sample> observed;
    observed.reserve(states.size());
    for (std::size_t t = 0; t + 1 < states.size(); ++t) {
      observed.push_back({nn::one_hot(states[t], n), nn::one_hot(states[t + 1], n)});
    }
    emp = markov::estimate_empirical(observed);
  }
  markov::McTrainOptions mc;
  mc.hidden = options.hidden;
  mc.pairs_per_input = options.pairs_per_state;
  mc.train = options.train;
  mc.seed = options.seed;
  return markov::train_markov_network(emp, mc);
}

std::vector<std::size_t> run_net_walk(const nn::Network& net, std::size_t start_state, std::size_t n_steps,
                                      std::uint64_t seed) {
  const std::size_t n = net.output_dim();
  if (net.input_dim() != n + 1) throw ShapeError("walker network must map 1 + n inputs to n outputs");
  if (start_state >= n) throw InputError("start state out of range");
  Rng rng(seed);
  std::vector<std::size_t> states;
  states.reserve(n_steps + 1);
  states.push_back(start_state);
  Vector input = Vector::Zero(static_cast<Eigen::Index>(n + 1));
  for (std::size_t t = 0; t < n_steps; ++t) {
    input.tail(static_cast<Eigen::Index>(n)).setZero();
    input(static_cast<Eigen::Index>(states.back() + 1)) = 1.0;
    input(0) = rng.uniform01();
    states.push_back(nn::argmax_decode(nn::forward(net, input)));
  }
  return states;
}

std::vector<Point> states_to_trajectory(const std::vector<std::size_t>& states, const WalkerModel& model) {
  std::vector<Point> points;
  points.reserve(states.size() + 1);
  points.emplace_back(static_cast<std::size_t>(model.dimension), 0);
  for (std::size_t s : states) {
    if (s >= model.state_count()) throw InputError("state index " + std::to_string(s) + " out of range");
    Point next = points.back();
    for (std::size_t a = 0; a < next.size(); ++a) next[a] += model.step_vectors[s][a];
    points.push_back(std::move(next));
  }
  return points;
}

markov::DiscreteDistribution visit_frequencies(const std::vector<std::size_t>& states, std::size_t state_count) {
  if (states.empty()) throw InputError("no states to count");
  std::vector<double> freq(state_count, 0.0);
  for (std::size_t s : states) {
    if (s >= state_count) throw InputError("state index out of range");
    freq[s] += 1.0;
  }
  for (double& f : freq) f /= static_cast<double>(states.size());
  return markov::DiscreteDistribution(std::move(freq));
}

EmpiricalTransition empirical_transition(const std::vector<std::size_t>& states, std::size_t state_count) {
  if (states.empty()) throw InputError("no states to count");
  const auto n = static_cast<Eigen::Index>(state_count);
  EmpiricalTransition out;
  out.transition = Matrix::Zero(n, n);
  out.visits.assign(state_count, 0);
  for (std::size_t t = 0; t + 1 < states.size(); ++t) {
    if (states[t] >= state_count || states[t + 1] >= state_count) throw InputError("state index out of range");
    out.transition(static_cast<Eigen::Index>(states[t + 1]), static_cast<Eigen::Index>(states[t])) += 1.0;
    ++out.visits[states[t]];
  }
  out.unvisited.assign(state_count, false);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto v = out.visits[static_cast<std::size_t>(j)];
    if (v == 0) out.unvisited[static_cast<std::size_t>(j)] = true;
    else out.transition.col(j) /= static_cast<double>(v);
  }
  return out;
}

std::size_t count_repeats(const std::vector<std::size_t>& states) {
  std::size_t n = 0;
  for (std::size_t t = 0; t + 1 < states.size(); ++t) n += states[t] == states[t + 1] ? 1 : 0;
  return n;
}

void write_trajectory_csv(std::ostream& out, const std::vector<Point>& points) {
  const std::size_t dim = points.empty() ? 2 : points.front().size();
  out << (dim == 3 ? "step,x,y,z\n" : "step,x,y\n");
  for (std::size_t t = 0; t < points.size(); ++t) {
    out << t;
    for (int c : points[t]) out << ',' << c;
    out << '\n';
  }
}

void write_frequency_csv(std::ostream& out, const std::vector<std::size_t>& states, const WalkerModel& model) {
  const auto freq = visit_frequencies(states, model.state_count());
  std::vector<std::size_t> visits(model.state_count(), 0);
  for (std::size_t s : states) ++visits[s];
  out << "state,label,visits,frequency\n";
  for (std::size_t s = 0; s < model.state_count(); ++s) {
    out << s << ',' << model.chain.labels()[s] << ',' << visits[s] << ',' << nn::format_real(freq[s]) << '\n';
  }
}

}  // namespace mcnn::walker
