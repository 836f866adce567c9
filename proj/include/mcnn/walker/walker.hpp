#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcnn/markov/chain.hpp"
#include "mcnn/markov/pipeline.hpp"
#include "mcnn/nn/network.hpp"

namespace mcnn::walker {

using Point = std::vector<int>;

/// Lattice walker that turns on every step. States come in opposite pairs
/// per axis: 0 = +x, 1 = -x, 2 = +y, 3 = -y, and in 3D 4 = +z, 5 = -z.
struct WalkerModel {
  int dimension = 2;
  markov::MarkovChain chain;
  std::vector<Point> step_vectors;

  std::size_t state_count() const { return step_vectors.size(); }
};

/// 2d states, zero self-transition, 1/(2d - 1) to every other state.
WalkerModel build_walker_chain(int dimension);

struct WalkerTrainOptions {
  std::vector<std::size_t> hidden{32, 32};
  std::size_t pairs_per_state = 4000;
  nn::TrainConfig train{.learning_rate = 0.5, .epochs = 300, .batch_size = 16, .rng_seed = 0, .shuffle = true};
  std::uint64_t seed = 0;
  // 0 builds the conditionals from the exact matrix; otherwise they are
  // estimated from a simulated chain run of this many steps.
  std::size_t from_simulation = 0;
};

markov::McTrainResult train_walker_net(const WalkerModel& model, const WalkerTrainOptions& options);

/// Output-fed-back walk: each step augments the one-hot current state with a
/// fresh r and decodes the network output back to a one-hot state.
std::vector<std::size_t> run_net_walk(const nn::Network& net, std::size_t start_state, std::size_t n_steps,
                                      std::uint64_t seed);

/// Cumulative sum of the step vectors of `states`, starting at the origin;
/// returns states.size() + 1 points.
std::vector<Point> states_to_trajectory(const std::vector<std::size_t>& states, const WalkerModel& model);

markov::DiscreteDistribution visit_frequencies(const std::vector<std::size_t>& states, std::size_t state_count);

struct EmpiricalTransition {
  Matrix transition;                // column-normalized bigram counts
  std::vector<bool> unvisited;      // columns with no outgoing transitions
  std::vector<std::size_t> visits;  // outgoing transitions per column
};

EmpiricalTransition empirical_transition(const std::vector<std::size_t>& states, std::size_t state_count);

/// Number of t with states[t] == states[t + 1].
std::size_t count_repeats(const std::vector<std::size_t>& states);

/// `step,x,y[,z]` rows.
void write_trajectory_csv(std::ostream& out, const std::vector<Point>& points);
/// `state,label,visits,frequency` rows.
void write_frequency_csv(std::ostream& out, const std::vector<std::size_t>& states, const WalkerModel& model);

}  // namespace mcnn::walker
