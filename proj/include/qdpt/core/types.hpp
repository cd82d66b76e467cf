#pragma once

#include "qdpt/core/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace qdpt {

using Observation = std::vector<double>;
/// Discrete environments use a single-element action holding the action index.
using Action = std::vector<double>;
using Behavior = std::array<double, 2>;

enum class Termination { goal, fault, step_limit };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::goal: return "goal";
    case Termination::fault: return "fault";
    case Termination::step_limit: return "step-limit";
  }
  return "?";
}

/// A point of the simulator's parameter space.
struct SolutionInput {
  std::vector<double> values;
  std::string env;

  bool operator==(const SolutionInput&) const = default;
};

struct InputSpace {
  enum class Kind { integer, real };
  Kind kind = Kind::real;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
};

struct ObservationSpace {
  std::size_t dim = 0;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct ActionSpace {
  bool discrete = true;
  int count = 0;          // discrete: number of actions
  std::size_t dim = 1;    // continuous: vector length
  std::vector<double> lower;
  std::vector<double> upper;
};

struct Trajectory {
  std::vector<Observation> states;
  std::vector<Action> actions;
  std::vector<double> rewards;
  Termination terminated_by = Termination::step_limit;

  const Observation& final_state() const { return states.back(); }
  std::size_t length() const { return actions.size(); }

  bool operator==(const Trajectory&) const = default;
};

struct BehaviorSpace {
  std::string name;
  Behavior lower{};
  Behavior upper{};
  /// Which extractor the owning environment applies (environment-specific).
  std::string extractor;

  Behavior clip(Behavior b) const {
    for (std::size_t i = 0; i < 2; ++i) {
      if (std::isnan(b[i])) b[i] = lower[i];
      b[i] = std::min(std::max(b[i], lower[i]), upper[i]);
    }
    return b;
  }
};

struct EvalResult {
  Behavior behavior{};
  double fitness = 0.0;
  bool oracle = false;
  Observation final_state;
  SolutionInput input;
};

}  // namespace qdpt
