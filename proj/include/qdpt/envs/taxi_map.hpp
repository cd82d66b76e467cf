#pragma once

#include "qdpt/core/errors.hpp"
#include "qdpt/core/random.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qdpt::taxi {

// Map glyphs. The file is a (2H+1) x (2W+1) character grid; cell (r, c) sits at
// line 2r+1, column 2c+1 (0-based), and the characters between cells encode
// the edges:
//
//   '+'        corner (even line, even column)
//   '-' / ' '  wall / opening between vertically adjacent cells
//   '|' / ' '  wall / opening between horizontally adjacent cells (':' also opens)
//   '.'        free cell
//   '#'        blocked cell (never entered, never a start cell)
//   'A'..'Z'   free cell holding a landmark; landmark index = alphabetical rank
//
// The outer border must be walls. Blank trailing lines are ignored.
inline constexpr std::string_view kDefaultMap =
    "+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+\n"
    "|A . . .|. . . . . . . . .|. . . . B|\n"
    "+ + + + + + + + + + + + + + + + + + +\n"
    "|. . . .|. . . . . . . . .|. . . . .|\n"
    "+ + + + + + + + + + + + + + + + + + +\n"
    "|. . . .|. . . . . . . . .|. . . . .|\n"
    "+ + + + +-+-+-+-+ + + + + + + + + + +\n"
    "|. . . .|. . . . .|. . . . . . . . .|\n"
    "+ + + + + + + + + + + + + + + + + + +\n"
    "|. . . . . . . . .|. . . . . . . . .|\n"
    "+ + + + + + + + + + +-+-+-+-+-+-+ + +\n"
    "|. . . . . . . . .|. . . . . .|. . .|\n"
    "+ + + + + + + + + + + + + + + + + + +\n"
    "|. . . . . E . . .|. . . . . .|. . .|\n"
    "+-+-+-+ + + + + + + + + + + + + + + +\n"
    "|. . . . . . . . .|. . . . . .|. . .|\n"
    "+ + + + +-+-+-+ + + + + + + + + + + +\n"
    "|. . . . . . . . . . . . . .|.|. . .|\n"
    "+ + + + + + + + + +-+-+-+-+ + + + + +\n"
    "|. . . .|. . . . . . . . . .|. . . .|\n"
    "+ + + + + + + + + + + + + + + +-+-+-+\n"
    "|. . . .|. . . .|. . F . . .|. . . .|\n"
    "+ + + + + + + + + + + + + + + + + + +\n"
    "|. . . .|. . . .|. . . . . .|. . . .|\n"
    "+ + + + + + + + + + + + + + + + + + +\n"
    "|C . . .|. . . .|. . . . . .|. . . D|\n"
    "+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+\n";

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

class TaxiMap {
 public:
  static TaxiMap parse(std::string_view text);
  static TaxiMap default_map() { return parse(kDefaultMap); }

  int width() const { return width_; }
  int height() const { return height_; }
  int landmark_count() const { return static_cast<int>(landmarks_.size()); }
  const std::vector<Cell>& landmarks() const { return landmarks_; }
  const std::vector<char>& landmark_glyphs() const { return glyphs_; }

  bool blocked(int row, int col) const { return blocked_[static_cast<std::size_t>(row * width_ + col)]; }
  bool wall_north(int row, int col) const { return hwall_[static_cast<std::size_t>(row * width_ + col)]; }
  bool wall_south(int row, int col) const { return hwall_[static_cast<std::size_t>((row + 1) * width_ + col)]; }
  bool wall_west(int row, int col) const { return vwall_[static_cast<std::size_t>(row * (width_ + 1) + col)]; }
  bool wall_east(int row, int col) const { return vwall_[static_cast<std::size_t>(row * (width_ + 1) + col + 1)]; }

  /// FNV-1a of the normalized map text; stored in Q-table headers.
  std::uint64_t hash() const { return hash_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Cell> landmarks_;
  std::vector<char> glyphs_;
  std::vector<bool> blocked_;
  std::vector<bool> hwall_;  // (height + 1) x width, edge above cell (r, c)
  std::vector<bool> vwall_;  // height x (width + 1), edge left of cell (r, c)
  std::uint64_t hash_ = 0;
};

inline TaxiMap TaxiMap::parse(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char ch : text) {
      if (ch == '\r') continue;
      if (ch == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) lines.push_back(cur);
    while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos) lines.pop_back();
  }
  if (lines.size() < 3) throw MapParseError(static_cast<int>(lines.size()) + 1, 1, "map needs at least 3 lines");
  if (lines.size() % 2 == 0) throw MapParseError(static_cast<int>(lines.size()), 1, "map must have an odd number of lines");
  const std::size_t ncols = lines[0].size();
  if (ncols < 3 || ncols % 2 == 0) throw MapParseError(1, static_cast<int>(ncols), "map lines must have odd length >= 3");

  TaxiMap m;
  m.height_ = static_cast<int>(lines.size() / 2);
  m.width_ = static_cast<int>(ncols / 2);
  m.blocked_.assign(static_cast<std::size_t>(m.width_ * m.height_), false);
  m.hwall_.assign(static_cast<std::size_t>((m.height_ + 1) * m.width_), false);
  m.vwall_.assign(static_cast<std::size_t>(m.height_ * (m.width_ + 1)), false);

  std::vector<std::pair<char, Cell>> found;
  std::string normalized;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    const int lineno = static_cast<int>(li) + 1;
    if (line.size() != ncols) {
      throw MapParseError(lineno, static_cast<int>(std::min(line.size(), ncols)) + 1,
                          "line length " + std::to_string(line.size()) + " differs from " + std::to_string(ncols));
    }
    const bool border_line = li == 0 || li + 1 == lines.size();
    for (std::size_t ci = 0; ci < ncols; ++ci) {
      const char g = line[ci];
      const int colno = static_cast<int>(ci) + 1;
      const bool even_line = li % 2 == 0;
      const bool even_col = ci % 2 == 0;
      const bool border_col = ci == 0 || ci + 1 == ncols;
      auto bad = [&](const char* what) { throw MapParseError(lineno, colno, std::string(what) + " '" + g + "'"); };
      if (even_line && even_col) {
        if (g != '+') bad("expected corner");
      } else if (even_line) {
        const int r = static_cast<int>(li / 2);
        const int c = static_cast<int>(ci / 2);
        if (g == '-') m.hwall_[static_cast<std::size_t>(r * m.width_ + c)] = true;
        else if (g != ' ') bad("expected horizontal edge");
        if (border_line && g != '-') bad("border must be a wall, got");
      } else if (even_col) {
        const int r = static_cast<int>(li / 2);
        const int c = static_cast<int>(ci / 2);
        if (g == '|') m.vwall_[static_cast<std::size_t>(r * (m.width_ + 1) + c)] = true;
        else if (g != ' ' && g != ':') bad("expected vertical edge");
        if (border_col && g != '|') bad("border must be a wall, got");
      } else {
        const Cell cell{static_cast<int>(li / 2), static_cast<int>(ci / 2)};
        if (g == '#') {
          m.blocked_[static_cast<std::size_t>(cell.row * m.width_ + cell.col)] = true;
        } else if (g >= 'A' && g <= 'Z') {
          for (const auto& f : found) {
            if (f.first == g) bad("duplicate landmark");
          }
          found.emplace_back(g, cell);
        } else if (g != '.') {
          bad("unknown cell glyph");
        }
      }
    }
    normalized += line;
    normalized += '\n';
  }
  if (found.size() < 2) throw MapParseError(1, 1, "map needs at least two landmarks");
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [g, cell] : found) {
    m.glyphs_.push_back(g);
    m.landmarks_.push_back(cell);
  }
  m.hash_ = fnv1a64(normalized);
  return m;
}

}  // namespace qdpt::taxi
