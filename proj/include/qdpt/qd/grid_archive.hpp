#pragma once

#include "qdpt/core/types.hpp"

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace qdpt {

struct Elite {
  SolutionInput input;
  Behavior behavior{};
  double fitness = 0.0;
  bool oracle = false;
  std::size_t discovery = 0;  // log index of the evaluation that placed it
};

enum class AddStatus { inserted_new, replaced_elite, rejected };

using BinIndex = std::pair<int, int>;

/// floor((b - lo) / (hi - lo) * res) per dimension, clamped into [0, res - 1].
inline BinIndex bin_index(const BehaviorSpace& space, int resolution, const Behavior& b) {
  int idx[2];
  for (std::size_t d = 0; d < 2; ++d) {
    // Multiplying first keeps integer-valued behaviors on exact bin edges.
    const double raw = std::floor((b[d] - space.lower[d]) * resolution / (space.upper[d] - space.lower[d]));
    if (std::isnan(raw) || raw < 0) idx[d] = 0;
    else if (raw >= resolution) idx[d] = resolution - 1;
    else idx[d] = static_cast<int>(raw);
  }
  return {idx[0], idx[1]};
}

/// MAP-Elites container: a res x res grid over a 2-D behavior space keeping
/// the lowest-fitness solution per cell.
class GridArchive {
 public:
  explicit GridArchive(BehaviorSpace space, int resolution = 50)
      : space_(std::move(space)), res_(resolution), cells_(static_cast<std::size_t>(resolution * resolution)) {}

  BinIndex bin_index(const Behavior& b) const { return qdpt::bin_index(space_, res_, b); }

  std::size_t flat_index(BinIndex bin) const { return static_cast<std::size_t>(bin.first * res_ + bin.second); }

  /// Local competition under minimization; ties keep the incumbent.
  AddStatus attempt_to_add(const SolutionInput& input, const Behavior& behavior, double fitness, bool oracle,
                           std::size_t discovery) {
    const std::size_t at = flat_index(bin_index(behavior));
    auto& cell = cells_[at];
    if (!cell) {
      cell = Elite{input, behavior, fitness, oracle, discovery};
      occupied_.push_back(at);
      return AddStatus::inserted_new;
    }
    if (fitness < cell->fitness) {
      *cell = Elite{input, behavior, fitness, oracle, discovery};
      return AddStatus::replaced_elite;
    }
    return AddStatus::rejected;
  }

  const std::optional<Elite>& cell(BinIndex bin) const { return cells_[flat_index(bin)]; }

  /// Elites in order of first occupation of their cell.
  const Elite& elite(std::size_t i) const { return *cells_[occupied_[i]]; }
  std::size_t size() const { return occupied_.size(); }
  bool empty() const { return occupied_.empty(); }
  int resolution() const { return res_; }
  const BehaviorSpace& space() const { return space_; }

 private:
  BehaviorSpace space_;
  int res_;
  std::vector<std::optional<Elite>> cells_;
  std::vector<std::size_t> occupied_;
};

}  // namespace qdpt
