#include "mcnn/tictactoe/board.hpp"

#include <charconv>
#include <cstdlib>

#include "mcnn/errors.hpp"

namespace mcnn::ttt {

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kXWins: return "x_wins";
    case Outcome::kOWins: return "o_wins";
    case Outcome::kDraw: return "draw";
    case Outcome::kOngoing: break;
  }
  return "ongoing";
}

Board::Board(const std::array<int, 9>& cells) : cells_(cells) {
  for (int c : cells_) {
    if (c < -1 || c > 1) throw InputError("board cells must be -1, 0 or 1");
  }
}

Board Board::parse(std::string_view text) {
  std::array<int, 9> cells{};
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view tok = text.substr(pos, end - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    int v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
      throw InputError("cannot parse board cell '" + std::string(tok) + "'");
    }
    if (n == 9) throw InputError("board must have exactly 9 cells");
    cells[n++] = v;
    pos = end + 1;
  }
  if (n != 9) throw InputError("board must have exactly 9 cells");
  return Board(cells);
}

int Board::count(int mark) const {
  int n = 0;
  for (int c : cells_) n += c == mark ? 1 : 0;
  return n;
}

std::vector<std::size_t> Board::empty_cells() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < 9; ++i) {
    if (cells_[i] == 0) out.push_back(i);
  }
  return out;
}

namespace {

bool has_line(const std::array<int, 9>& c, int mark) {
  for (const auto& line : kLines) {
    if (c[line[0]] == mark && c[line[1]] == mark && c[line[2]] == mark) return true;
  }
  return false;
}

}  // namespace

bool Board::is_valid() const {
  if (std::abs(count(kX) - count(kO)) > 1) return false;
  return !(has_line(cells_, kX) && has_line(cells_, kO));
}

Board Board::with_move(std::size_t cell, int player) const {
  if (cell >= 9) throw InputError("cell index " + std::to_string(cell) + " out of range");
  if (player != kX && player != kO) throw InputError("player must be -1 or 1");
  if (cells_[cell] != 0) throw InputError("cell " + std::to_string(cell) + " is occupied");
  Board next = *this;
  next.cells_[cell] = player;
  return next;
}

Board Board::canonical(int mover) const {
  Board out = *this;
  for (int& c : out.cells_) c *= mover;
  return out;
}

Vector Board::as_input(int player) const {
  Vector v(9);
  for (std::size_t i = 0; i < 9; ++i) v(static_cast<Eigen::Index>(i)) = static_cast<double>(player * cells_[i]);
  return v;
}

std::string Board::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < 9; ++i) {
    if (i > 0) s.push_back(',');
    s += std::to_string(cells_[i]);
  }
  return s;
}

Outcome winner(const Board& board) {
  if (!board.is_valid()) throw InputError("invalid board " + board.to_string());
  if (has_line(board.cells(), kX)) return Outcome::kXWins;
  if (has_line(board.cells(), kO)) return Outcome::kOWins;
  return board.full() ? Outcome::kDraw : Outcome::kOngoing;
}

bool is_turn_of(const Board& board, int player) {
  return board.count(player) <= board.count(-player);
}

}  // namespace mcnn::ttt
