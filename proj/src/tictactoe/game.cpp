#include "mcnn/tictactoe/game.hpp"

#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include "mcnn/errors.hpp"
#include "mcnn/markov/empirical.hpp"

namespace mcnn::ttt {

namespace {

void require_playable(const Board& board, int player) {
  if (player != kX && player != kO) throw InputError("player must be -1 or 1");
  if (winner(board) != Outcome::kOngoing) throw InputError("game is already decided");
  if (!is_turn_of(board, player)) throw InputError("it is not player " + std::to_string(player) + "'s turn");
}

}  // namespace

std::vector<std::size_t> winning_cells(const Board& board, int player) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < 9; ++c) {
    if (board[c] != 0) continue;
    const Board next = board.with_move(c, player);
    for (const auto& line : kLines) {
      if (next[line[0]] == player && next[line[1]] == player && next[line[2]] == player) {
        out.push_back(c);
        break;
      }
    }
  }
  return out;
}

int threat_count(const Board& board, int player) {
  int n = 0;
  for (const auto& line : kLines) {
    int own = 0;
    int empty = 0;
    for (std::size_t c : line) {
      own += board[c] == player ? 1 : 0;
      empty += board[c] == 0 ? 1 : 0;
    }
    n += own == 2 && empty == 1 ? 1 : 0;
  }
  return n;
}

std::size_t rule_based_move(const Board& board, int player, Rng& rng) {
  require_playable(board, player);
  if (const auto win = winning_cells(board, player); !win.empty()) return win.front();
  if (const auto block = winning_cells(board, -player); !block.empty()) return block.front();
  for (std::size_t c = 0; c < 9; ++c) {
    if (board[c] == 0 && threat_count(board.with_move(c, player), player) >= 2) return c;
  }
  const auto empty = board.empty_cells();
  return empty[rng.below(empty.size())];
}

std::size_t network_move(const nn::Network& net, const Board& board, int player, double r) {
  if (board.full()) throw InputError("no empty cell left");
  const Vector out = nn::forward(net, markov::augment(board.as_input(player), r));
  if (out.size() != 9) throw ShapeError("tic-tac-toe network must have 9 outputs");
  std::size_t best = 9;
  for (std::size_t c = 0; c < 9; ++c) {
    if (board[c] != 0) continue;
    if (best == 9 || out(static_cast<Eigen::Index>(c)) > out(static_cast<Eigen::Index>(best))) best = c;
  }
  return best;
}

Board GameRecord::final_board() const {
  if (moves.empty()) return Board{};
  const MoveRecord& last = moves.back();
  return last.before.with_move(last.cell, last.mover);
}

TrainingGames simulate_training_games(std::size_t n_games, std::uint64_t seed) {
  if (n_games == 0) throw InputError("need at least one game");
  TrainingGames out;
  out.games.reserve(n_games);
  for (std::size_t g = 0; g < n_games; ++g) {
    Rng rng(derive_seed(seed, g));
    GameRecord game;
    Board board;
    int mover = g % 2 == 0 ? kX : kO;
    while ((game.outcome = winner(board)) == Outcome::kOngoing) {
      const std::size_t cell = rule_based_move(board, mover, rng);
      game.moves.push_back({board, mover, cell});
      board = board.with_move(cell, mover);
      mover = -mover;
    }
    if (game.outcome == Outcome::kXWins || game.outcome == Outcome::kOWins) {
      const int champion = game.outcome == Outcome::kXWins ? kX : kO;
      for (const MoveRecord& m : game.moves) {
        if (m.mover != champion) continue;
        out.pairs.push_back({m.before.canonical(champion), m.before.with_move(m.cell, m.mover).canonical(champion)});
      }
    }
    out.games.push_back(std::move(game));
  }
  return out;
}

std::vector<nn::Sample> reaction_samples(const std::vector<ReactionPair>& pairs) {
  std::vector<nn::Sample> out;
  out.reserve(pairs.size());
  for (const ReactionPair& p : pairs) out.push_back({p.before.as_input(kO), p.after.as_input(kO)});
  return out;
}

markov::DiscreteDistribution training_reaction_distribution(const std::vector<ReactionPair>& pairs,
                                                            const Board& board) {
  std::vector<std::size_t> counts(9, 0);
  std::size_t total = 0;
  for (const ReactionPair& p : pairs) {
    if (!(p.before == board)) continue;
    for (std::size_t c = 0; c < 9; ++c) {
      if (p.before[c] != p.after[c]) ++counts[c];
    }
    ++total;
  }
  if (total == 0) throw InputError("board " + board.to_string() + " never occurs in the training pairs");
  return markov::DiscreteDistribution::from_counts(counts);
}

GameRecord play_game(const nn::Network& net, Seat first_mover, std::uint64_t seed) {
  Rng rng(seed);
  GameRecord game;
  Board board;
  int mover = first_mover == Seat::kNetwork ? kO : kX;
  while ((game.outcome = winner(board)) == Outcome::kOngoing) {
    const std::size_t cell =
        mover == kO ? network_move(net, board, kO, rng.uniform01()) : rule_based_move(board, kX, rng);
    game.moves.push_back({board, mover, cell});
    board = board.with_move(cell, mover);
    mover = -mover;
  }
  return game;
}

namespace {

void tally(Evaluation& e, Outcome o) {
  switch (o) {
    case Outcome::kOWins: ++e.wins; break;
    case Outcome::kXWins: ++e.losses; break;
    default: ++e.draws; break;
  }
}

}  // namespace

Evaluation evaluate(const nn::Network& net, std::size_t n_games, std::uint64_t seed) {
  if (n_games == 0) throw InputError("need at least one game");
  Evaluation e;
  for (std::size_t i = 0; i < n_games; ++i) {
    tally(e, play_game(net, i % 2 == 0 ? Seat::kNetwork : Seat::kRules, derive_seed(seed, i)).outcome);
  }
  return e;
}

Evaluation evaluate_rules_baseline(std::size_t n_games, std::uint64_t seed) {
  if (n_games == 0) throw InputError("need at least one game");
  Evaluation e;
  for (std::size_t i = 0; i < n_games; ++i) {
    Rng rng(derive_seed(seed, i));
    Board board;
    int mover = i % 2 == 0 ? kO : kX;
    Outcome o;
    while ((o = winner(board)) == Outcome::kOngoing) {
      board = board.with_move(rule_based_move(board, mover, rng), mover);
      mover = -mover;
    }
    tally(e, o);
  }
  return e;
}

markov::DiscreteDistribution reaction_distribution(const nn::Network& net, const Board& board, int player,
                                                   std::size_t trials, std::uint64_t seed) {
  require_playable(board, player);
  if (trials == 0) throw InputError("need at least one trial");
  Rng rng(seed);
  std::vector<std::size_t> counts(9, 0);
  for (std::size_t t = 0; t < trials; ++t) ++counts[network_move(net, board, player, rng.uniform01())];
  return markov::DiscreteDistribution::from_counts(counts);
}

namespace {

markov::McTrainOptions mc_options(const TttTrainOptions& options) {
  markov::McTrainOptions mc;
  mc.hidden = options.hidden;
  mc.pairs_per_input = options.pairs_per_input;
  mc.multi_outcome_pairs_per_input = options.multi_outcome_pairs_per_input;
  mc.train = options.train;
  mc.seed = options.seed;
  return mc;
}

}  // namespace

markov::McTrainResult train_tictactoe_net(const std::vector<ReactionPair>& pairs, const TttTrainOptions& options,
                                          const nn::EpochCallback& on_epoch) {
  return markov::train_markov_network(markov::estimate_empirical(reaction_samples(pairs)), mc_options(options),
                                      on_epoch);
}

markov::McTrainResult train_classical_tictactoe_net(const std::vector<ReactionPair>& pairs,
                                                    const TttTrainOptions& options,
                                                    const nn::EpochCallback& on_epoch) {
  const auto emp = markov::estimate_empirical(reaction_samples(pairs));
  const markov::McTrainOptions mc = mc_options(options);
  nn::Dataset data = markov::strip_switch(markov::training_pairs(emp, mc));
  std::vector<std::size_t> dims{9};
  dims.insert(dims.end(), options.hidden.begin(), options.hidden.end());
  dims.push_back(9);
  markov::McTrainResult out;
  out.pair_count = data.size();
  auto trained = nn::train(nn::init_network(nn::mlp_specs(dims), derive_seed(options.seed, 0)), data, options.train, on_epoch);
  out.net = std::move(trained.net);
  out.loss_history = std::move(trained.loss_history);
  return out;
}

namespace {

constexpr char kMagic[8] = {'M', 'C', 'N', 'N', 'T', 'T', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kRecordLength = 18;

template <typename T>
void put_le(std::ostream& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(std::istream& in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw ParseError("reaction dataset is truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(v);
}

}  // namespace

void write_reaction_dataset(std::ostream& out, const std::vector<ReactionPair>& pairs) {
  out.write(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, pairs.size());
  for (const ReactionPair& p : pairs) {
    out.put(static_cast<char>(kRecordLength));
    for (int c : p.before.cells()) out.put(static_cast<char>(static_cast<std::int8_t>(c)));
    for (int c : p.after.cells()) out.put(static_cast<char>(static_cast<std::int8_t>(c)));
  }
}

std::vector<ReactionPair> read_reaction_dataset(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ParseError("not a reaction dataset (bad magic)");
  }
  if (const auto version = get_le<std::uint32_t>(in); version != kVersion) {
    throw ParseError("unsupported reaction dataset version " + std::to_string(version));
  }
  const auto count = get_le<std::uint64_t>(in);
  std::vector<ReactionPair> pairs;
  pairs.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t r = 0; r < count; ++r) {
    if (get_le<std::uint8_t>(in) != kRecordLength) throw ParseError("unexpected record length");
    std::array<int, 9> before{};
    std::array<int, 9> after{};
    for (int& c : before) c = static_cast<std::int8_t>(get_le<std::uint8_t>(in));
    for (int& c : after) c = static_cast<std::int8_t>(get_le<std::uint8_t>(in));
    try {
      pairs.push_back({Board(before), Board(after)});
    } catch (const InputError& e) {
      throw ParseError(std::string("bad record: ") + e.what());
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after the last record");
  return pairs;
}

void write_game_log(std::ostream& out, const GameRecord& game) {
  for (const MoveRecord& m : game.moves) out << m.mover << ',' << m.cell << '\n';
  out << "outcome," << outcome_name(game.outcome) << '\n';
}

}  // namespace mcnn::ttt
