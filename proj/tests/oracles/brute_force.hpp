#pragma once

// Reference implementations used only by tests. They share no code with the
// library paths they check: distances are fully sorted rather than selected,
// mixture densities are summed directly, archives are rebuilt from scratch,
// and Taxi geometry is read straight from the map text.

#include "qdpt/baselines/gmm.hpp"
#include "qdpt/core/types.hpp"
#include "qdpt/qd/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (long double)(a[i] - b[i]) * (a[i] - b[i]);
  return double(std::sqrt(s));
}

inline double novelty(const qdpt::Behavior& b, const std::vector<qdpt::Behavior>& refs, int k,
                      std::optional<std::size_t> self = std::nullopt) {
  std::vector<double> d;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (self && *self == i) continue;
    d.push_back(dist({b[0], b[1]}, {refs[i][0], refs[i][1]}));
  }
  if (d.empty()) return std::numeric_limits<double>::infinity();
  std::sort(d.begin(), d.end());
  const std::size_t m = std::min<std::size_t>(std::size_t(k), d.size());
  long double s = 0;
  for (std::size_t i = 0; i < m; ++i) s += d[i];
  return double(s / m);
}

inline double knn_sparseness(const std::vector<std::vector<double>>& pts, int k) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> matrix(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) matrix[i][j] = dist(pts[i], pts[j]);
  }
  long double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(matrix[i][j]);
    }
    std::sort(row.begin(), row.end());
    const std::size_t m = std::min<std::size_t>(std::size_t(k), row.size());
    long double s = 0;
    for (std::size_t t = 0; t < m; ++t) s += row[t];
    total += s / m;
  }
  return double(total / n);
}

/// log of the directly summed mixture density.
inline double gmm_log_density(const qdpt::GmmModel& m, const std::vector<double>& x) {
  long double p = 0;
  for (const auto& c : m.components) {
    long double g = c.weight;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const long double v = c.variance[d];
      const long double z = x[d] - c.mean[d];
      g *= std::exp(-z * z / (2 * v)) / std::sqrt(2 * std::numbers::pi_v<long double> * v);
    }
    p += g;
  }
  return double(std::log(p));
}

inline std::pair<int, int> bin(const qdpt::BehaviorSpace& s, int res, const qdpt::Behavior& b) {
  int out[2];
  for (int d = 0; d < 2; ++d) {
    const double w = (s.upper[d] - s.lower[d]) / res;
    int i = 0;
    // Linear scan instead of the closed-form floor.
    while (i < res - 1 && b[d] >= s.lower[d] + (i + 1) * w) ++i;
    out[d] = i;
  }
  return {out[0], out[1]};
}

struct GridCell {
  double fitness;
  std::size_t discovery;
};

/// Per-bin minimum fitness with the first record that attained it.
inline std::map<std::pair<int, int>, GridCell> grid_minima(const qdpt::CampaignLog& log, const qdpt::BehaviorSpace& s,
                                                           int res) {
  std::map<std::pair<int, int>, GridCell> cells;
  for (const auto& r : log.records) {
    const auto key = bin(s, res, r.behavior);
    auto it = cells.find(key);
    if (it == cells.end() || r.fitness < it->second.fitness) cells[key] = {r.fitness, r.index};
  }
  return cells;
}

/// Log indices that a per-iteration novelty archive must contain: each batch
/// is judged against the archive before the batch plus the whole batch.
inline std::vector<std::size_t> novelty_insertions(const qdpt::CampaignLog& log, std::size_t population,
                                                   double threshold, int k) {
  std::vector<qdpt::Behavior> archive;
  std::vector<std::size_t> sources;
  for (std::size_t start = 0; start < log.records.size(); start += population) {
    std::vector<qdpt::Behavior> refs = archive;
    for (std::size_t j = start; j < start + population; ++j) refs.push_back(log.records[j].behavior);
    std::vector<std::size_t> batch;
    for (std::size_t j = 0; j < population; ++j) {
      const double s = novelty(log.records[start + j].behavior, refs, k, archive.size() + j);
      if (s > threshold) batch.push_back(start + j);
    }
    for (std::size_t j : batch) {
      archive.push_back(log.records[j].behavior);
      sources.push_back(log.records[j].index);
    }
  }
  return sources;
}

inline std::vector<std::string> map_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) lines.push_back(l);
  return lines;
}

/// Whether a move (0 north, 1 south, 2 east, 3 west) from (r, c) stays on a
/// free cell without crossing a wall glyph.
inline bool taxi_can_move(const std::string& text, int r, int c, int move) {
  const auto lines = map_lines(text);
  const int h = int(lines.size() - 1) / 2;
  const int w = int(lines[0].size() - 1) / 2;
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, 1, -1};
  const int nr = r + dr[move];
  const int nc = c + dc[move];
  if (nr < 0 || nc < 0 || nr >= h || nc >= w) return false;
  const char wall = lines[std::size_t(2 * r + 1 + dr[move])][std::size_t(2 * c + 1 + dc[move])];
  if (wall == '-' || wall == '|') return false;
  return lines[std::size_t(2 * nr + 1)][std::size_t(2 * nc + 1)] != '#';
}

/// Shortest-path length between two cells, read directly from the map text
/// (cell (r, c) sits at text line 2r+1, column 2c+1).
inline int taxi_distance(const std::string& text, int r0, int c0, int r1, int c1) {
  const auto lines = map_lines(text);
  const int h = int(lines.size() - 1) / 2;
  const int w = int(lines[0].size() - 1) / 2;
  std::vector<int> seen(std::size_t(h * w), -1);
  std::deque<std::pair<int, int>> q{{r0, c0}};
  seen[std::size_t(r0 * w + c0)] = 0;
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, 1, -1};
  while (!q.empty()) {
    auto [r, c] = q.front();
    q.pop_front();
    if (r == r1 && c == c1) return seen[std::size_t(r * w + c)];
    for (int a = 0; a < 4; ++a) {
      const int nr = r + dr[a];
      const int nc = c + dc[a];
      if (nr < 0 || nc < 0 || nr >= h || nc >= w) continue;
      const char wall = lines[std::size_t(2 * r + 1 + dr[a])][std::size_t(2 * c + 1 + dc[a])];
      if (wall == '-' || wall == '|') continue;
      if (lines[std::size_t(2 * nr + 1)][std::size_t(2 * nc + 1)] == '#') continue;
      if (seen[std::size_t(nr * w + nc)] >= 0) continue;
      seen[std::size_t(nr * w + nc)] = seen[std::size_t(r * w + c)] + 1;
      q.emplace_back(nr, nc);
    }
  }
  return -1;
}

}  // namespace oracle
