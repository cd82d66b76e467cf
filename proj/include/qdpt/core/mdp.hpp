#pragma once

#include "qdpt/core/random.hpp"
#include "qdpt/core/types.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace qdpt {

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool terminal = false;
  bool fault = false;
};

/// A deterministic episodic simulator whose initial situation is chosen by a
/// SolutionInput. Instances carry episode state and are not shared between
/// concurrent episodes; use clone() to hand one to each worker.
class Mdp {
 public:
  virtual ~Mdp() = default;

  virtual std::string_view name() const = 0;
  virtual const InputSpace& input_space() const = 0;
  virtual const ObservationSpace& observation_space() const = 0;
  virtual const ActionSpace& action_space() const = 0;
  virtual int max_steps() const = 0;

  virtual Observation reset(const SolutionInput& input, std::uint64_t seed) = 0;
  /// Throws ContractViolation once the episode has terminated.
  virtual StepOutcome step(const Action& action) = 0;

  virtual SolutionInput sample_input(Rng& rng) const = 0;
  virtual SolutionInput mutate(const SolutionInput& input, Rng& rng) const = 0;

  virtual std::vector<BehaviorSpace> behavior_spaces() const = 0;
  /// Raw descriptor, before clipping into the space's bounds.
  virtual Behavior raw_behavior(const BehaviorSpace& space, const Trajectory& trajectory) const = 0;

  virtual std::unique_ptr<Mdp> clone() const = 0;

  /// Length, integrality and bounds. Environments add their own invariants.
  virtual void validate_input(const SolutionInput& input) const {
    const InputSpace& space = input_space();
    if (input.values.size() != space.size()) {
      throw RejectedInputError(std::string(name()) + ": input has " + std::to_string(input.values.size()) +
                               " values, expected " + std::to_string(space.size()));
    }
    for (std::size_t i = 0; i < space.size(); ++i) {
      const double v = input.values[i];
      if (!std::isfinite(v) || v < space.lower[i] || v > space.upper[i]) {
        throw RejectedInputError(std::string(name()) + ": input component " + std::to_string(i) + " out of bounds");
      }
      if (space.kind == InputSpace::Kind::integer && v != std::floor(v)) {
        throw RejectedInputError(std::string(name()) + ": input component " + std::to_string(i) + " is not integral");
      }
    }
  }

  BehaviorSpace behavior_space(std::string_view space_name) const;

  Behavior extract_behavior(const BehaviorSpace& space, const Trajectory& trajectory) const {
    return space.clip(raw_behavior(space, trajectory));
  }

 protected:
  Mdp() = default;
  Mdp(const Mdp&) = default;
  Mdp& operator=(const Mdp&) = default;
};

inline BehaviorSpace Mdp::behavior_space(std::string_view space_name) const {
  for (auto& s : behavior_spaces()) {
    if (s.name == space_name) return s;
  }
  throw ConfigError("unknown behavior space '" + std::string(space_name) + "' for environment " + std::string(name()));
}

/// A deterministic policy: identical observations give identical actions.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(std::span<const double> observation) const = 0;
};

}  // namespace qdpt
