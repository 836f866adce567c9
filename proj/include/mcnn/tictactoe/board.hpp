#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mcnn/nn/network.hpp"

namespace mcnn::ttt {

inline constexpr int kX = -1;  // black, conventionally the first mover
inline constexpr int kO = 1;   // white

enum class Outcome { kOngoing, kXWins, kOWins, kDraw };

/// "x_wins" | "o_wins" | "draw" | "ongoing"
std::string_view outcome_name(Outcome o);

/// 3x3 board, row-major (cell = 3 * row + col), -1 = X, 0 = empty, +1 = O.
class Board {
 public:
  Board() { cells_.fill(0); }
  /// Throws InputError if any cell lies outside {-1, 0, 1}. Game-level
  /// consistency is checked by is_valid().
  explicit Board(const std::array<int, 9>& cells);

  /// Parses "0,0,0,0,-1,0,0,0,0".
  static Board parse(std::string_view text);

  int operator[](std::size_t cell) const { return cells_[cell]; }
  const std::array<int, 9>& cells() const { return cells_; }

  int count(int mark) const;
  std::vector<std::size_t> empty_cells() const;
  bool full() const { return count(0) == 0; }

  /// Mark counts differ by at most one and at most one player has a line.
  bool is_valid() const;

  /// Throws InputError if the cell is occupied or out of range.
  Board with_move(std::size_t cell, int player) const;

  /// Every cell multiplied by `mover`, so the mover's marks become +1.
  Board canonical(int mover) const;

  /// player * cells, the network's view of the board.
  Vector as_input(int player) const;

  std::string to_string() const;

  bool operator==(const Board& other) const { return cells_ == other.cells_; }

 private:
  std::array<int, 9> cells_;
};

/// The eight winning lines.
inline constexpr std::array<std::array<std::size_t, 3>, 8> kLines{{
    {0, 1, 2}, {3, 4, 5}, {6, 7, 8},  // rows
    {0, 3, 6}, {1, 4, 7}, {2, 5, 8},  // columns
    {0, 4, 8}, {2, 4, 6},             // diagonals
}};

/// Throws InputError on boards violating the Board invariants.
Outcome winner(const Board& board);

/// A player may move when they have not placed more marks than the opponent.
bool is_turn_of(const Board& board, int player);

}  // namespace mcnn::ttt
