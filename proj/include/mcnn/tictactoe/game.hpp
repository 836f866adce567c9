#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mcnn/markov/distribution.hpp"
#include "mcnn/markov/pipeline.hpp"
#include "mcnn/nn/network.hpp"
#include "mcnn/random.hpp"
#include "mcnn/tictactoe/board.hpp"

namespace mcnn::ttt {

/// The scripted player: (1) complete an own line, (2) block the opponent's
/// line, (3) create two simultaneous threats, (4) uniform random empty cell.
/// Rules 1-3 pick the smallest qualifying cell; only rule 4 draws from `rng`.
/// Throws InputError on decided or full boards and when it is not `player`'s
/// turn.
std::size_t rule_based_move(const Board& board, int player, Rng& rng);

/// Empty cells that would complete a line of `player`.
std::vector<std::size_t> winning_cells(const Board& board, int player);

/// Lines holding two `player` marks and one empty cell.
int threat_count(const Board& board, int player);

/// Masked-argmax decode of the network output for input [r | player * cells]:
/// the highest-scoring empty cell, smallest index on ties.
std::size_t network_move(const nn::Network& net, const Board& board, int player, double r);

struct MoveRecord {
  Board before;
  int mover = kX;
  std::size_t cell = 0;
};

struct GameRecord {
  std::vector<MoveRecord> moves;
  Outcome outcome = Outcome::kOngoing;

  Board final_board() const;
};

/// A winner's move in mover perspective (the mover's marks are +1).
struct ReactionPair {
  Board before;
  Board after;
};

struct TrainingGames {
  std::vector<GameRecord> games;
  std::vector<ReactionPair> pairs;
};

/// Rules-vs-rules games; X opens even-numbered games, O odd-numbered ones.
/// Only the winner's moves become pairs, drawn games contribute none.
TrainingGames simulate_training_games(std::size_t n_games, std::uint64_t seed);

/// Reaction pairs as (before, after) real vectors.
std::vector<nn::Sample> reaction_samples(const std::vector<ReactionPair>& pairs);

/// Distribution of the moved cell among training pairs whose mover-perspective
/// board equals `board`. Throws InputError if the board never occurs.
markov::DiscreteDistribution training_reaction_distribution(const std::vector<ReactionPair>& pairs,
                                                            const Board& board);

enum class Seat { kNetwork, kRules };

/// The network plays O (+1), the rule-based player X (-1); `first_mover`
/// picks who opens. One seeded stream feeds both the network's r draws and
/// the rules' random moves.
GameRecord play_game(const nn::Network& net, Seat first_mover, std::uint64_t seed);

struct Evaluation {
  std::size_t wins = 0;
  std::size_t draws = 0;
  std::size_t losses = 0;

  std::size_t total() const { return wins + draws + losses; }
  double loss_rate() const { return total() ? static_cast<double>(losses) / static_cast<double>(total()) : 0.0; }
};

/// Network vs rules, the network opening even-numbered games; game i is seeded
/// with derive_seed(seed, i). Counts are from the network's point of view.
Evaluation evaluate(const nn::Network& net, std::size_t n_games, std::uint64_t seed);

/// The same schedule with a second rule-based player in the network's seat.
Evaluation evaluate_rules_baseline(std::size_t n_games, std::uint64_t seed);

/// Frequencies of network_move over `trials` fresh r draws.
markov::DiscreteDistribution reaction_distribution(const nn::Network& net, const Board& board, int player,
                                                   std::size_t trials, std::uint64_t seed);

struct TttTrainOptions {
  std::vector<std::size_t> hidden{80, 30};
  std::size_t pairs_per_input = 32;
  std::size_t multi_outcome_pairs_per_input = 960;  // 0: same as pairs_per_input
  nn::TrainConfig train{.learning_rate = 0.3, .epochs = 200, .batch_size = 16, .rng_seed = 0, .shuffle = true};
  std::uint64_t seed = 0;
};

/// Estimates winner-reaction conditionals and fits the [10:80:30:9] network.
markov::McTrainResult train_tictactoe_net(const std::vector<ReactionPair>& pairs, const TttTrainOptions& options,
                                          const nn::EpochCallback& on_epoch = {});

/// The same generated pairs with the switch value removed, fitted by a
/// [9:80:30:9] network; used to compare loss curves.
markov::McTrainResult train_classical_tictactoe_net(const std::vector<ReactionPair>& pairs,
                                                    const TttTrainOptions& options,
                                                    const nn::EpochCallback& on_epoch = {});

// Reaction dataset file: 8-byte magic "MCNNTTT\0", uint32 version (1),
// uint64 record count, then per record a uint8 length (18) followed by nine
// int8 cells before and nine after. Integers are little-endian.
void write_reaction_dataset(std::ostream& out, const std::vector<ReactionPair>& pairs);
std::vector<ReactionPair> read_reaction_dataset(std::istream& in);

/// One `mover,cell` line per move, then `outcome,<name>`.
void write_game_log(std::ostream& out, const GameRecord& game);

}  // namespace mcnn::ttt
