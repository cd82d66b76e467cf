#pragma once

#include "qdpt/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace qdpt {

/// Mean Euclidean distance from `b` to its k nearest entries of `refs`.
/// `self` names an index of `refs` to skip (the candidate itself). With fewer
/// than k references the mean runs over all of them; with none it is +inf.
inline double novelty_score(const Behavior& b, std::span<const Behavior> refs, int k = 3,
                            std::optional<std::size_t> self = std::nullopt) {
  std::vector<double> d;
  d.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (self && *self == i) continue;
    d.push_back(std::hypot(b[0] - refs[i][0], b[1] - refs[i][1]));
  }
  if (d.empty()) return std::numeric_limits<double>::infinity();
  const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(k), d.size());
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(m - 1), d.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) sum += d[i];
  return sum / double(m);
}

/// Unstructured archive of behaviors admitted by a novelty threshold.
class NoveltyArchive {
 public:
  explicit NoveltyArchive(double threshold, int k = 3) : threshold_(threshold), k_(k) {}

  double threshold() const { return threshold_; }
  int k() const { return k_; }
  const std::vector<Behavior>& behaviors() const { return behaviors_; }
  std::size_t size() const { return behaviors_.size(); }

  /// Log index of the evaluation behind each entry.
  const std::vector<std::size_t>& sources() const { return sources_; }

  bool admits(double novelty) const { return novelty > threshold_; }

  void append(const Behavior& b, std::size_t source) {
    behaviors_.push_back(b);
    sources_.push_back(source);
  }

 private:
  double threshold_;
  int k_;
  std::vector<Behavior> behaviors_;
  std::vector<std::size_t> sources_;
};

}  // namespace qdpt
