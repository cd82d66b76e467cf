#pragma once

#include "qdpt/core/mdp.hpp"
#include "qdpt/envs/taxi_map.hpp"

#include <array>
#include <memory>
#include <optional>

namespace qdpt::taxi {

enum Move : int { north = 0, south = 1, east = 2, west = 3, pickup = 4, dropoff = 5 };
inline constexpr int kActionCount = 6;

inline constexpr double kStepReward = -1.0;
inline constexpr double kDeliveryBonus = 20.0;
inline constexpr double kFaultReward = -10.0;
inline constexpr int kDefaultMaxSteps = 400;

/// `passenger` is a landmark index, or landmark_count() while riding.
struct TaxiState {
  int row = 0;
  int col = 0;
  int passenger = 0;
  int destination = 1;

  bool operator==(const TaxiState&) const = default;
};

struct TaxiStep {
  TaxiState state;
  double reward = 0.0;
  bool terminal = false;
  bool fault = false;
};

/// One transition of the taxi world. Pure.
inline TaxiStep taxi_step(const TaxiMap& map, TaxiState s, int action) {
  TaxiStep out{s, kStepReward, false, false};
  auto collide = [&] {
    out.reward = kFaultReward;
    out.terminal = true;
    out.fault = true;
    return out;
  };
  const int riding = map.landmark_count();
  switch (action) {
    case north:
      if (s.row == 0 || map.wall_north(s.row, s.col) || map.blocked(s.row - 1, s.col)) return collide();
      --out.state.row;
      return out;
    case south:
      if (s.row + 1 == map.height() || map.wall_south(s.row, s.col) || map.blocked(s.row + 1, s.col)) return collide();
      ++out.state.row;
      return out;
    case east:
      if (s.col + 1 == map.width() || map.wall_east(s.row, s.col) || map.blocked(s.row, s.col + 1)) return collide();
      ++out.state.col;
      return out;
    case west:
      if (s.col == 0 || map.wall_west(s.row, s.col) || map.blocked(s.row, s.col - 1)) return collide();
      --out.state.col;
      return out;
    case pickup: {
      if (s.passenger == riding) return collide();
      const Cell at = map.landmarks()[static_cast<std::size_t>(s.passenger)];
      if (at.row != s.row || at.col != s.col) return collide();
      out.state.passenger = riding;
      return out;
    }
    case dropoff: {
      if (s.passenger != riding) return collide();
      const Cell dest = map.landmarks()[static_cast<std::size_t>(s.destination)];
      if (dest.row != s.row || dest.col != s.col) return collide();
      out.state.passenger = s.destination;
      out.reward = kStepReward + kDeliveryBonus;
      out.terminal = true;
      return out;
    }
    default:
      throw ContractViolation("taxi: action index out of range");
  }
}

/// Dense index over (row, col, passenger location incl. riding, destination).
inline std::size_t state_index(const TaxiMap& map, const TaxiState& s) {
  const auto L = static_cast<std::size_t>(map.landmark_count());
  return ((static_cast<std::size_t>(s.row) * static_cast<std::size_t>(map.width()) + static_cast<std::size_t>(s.col)) *
              (L + 1) +
          static_cast<std::size_t>(s.passenger)) *
             L +
         static_cast<std::size_t>(s.destination);
}

inline std::size_t state_count(const TaxiMap& map) {
  const auto L = static_cast<std::size_t>(map.landmark_count());
  return static_cast<std::size_t>(map.width() * map.height()) * (L + 1) * L;
}

inline TaxiState state_from_observation(std::span<const double> obs) {
  return {static_cast<int>(obs[0]), static_cast<int>(obs[1]), static_cast<int>(obs[2]), static_cast<int>(obs[3])};
}

inline Observation to_observation(const TaxiState& s) {
  return {double(s.row), double(s.col), double(s.passenger), double(s.destination)};
}

/// Input (taxi row, taxi col, passenger landmark, destination landmark).
class TaxiWorld final : public Mdp {
 public:
  explicit TaxiWorld(std::shared_ptr<const TaxiMap> map = std::make_shared<const TaxiMap>(TaxiMap::default_map()),
                     int max_steps = kDefaultMaxSteps)
      : map_(std::move(map)), max_steps_(max_steps) {
    const double L = map_->landmark_count();
    inputs_.kind = InputSpace::Kind::integer;
    inputs_.lower = {0, 0, 0, 0};
    inputs_.upper = {double(map_->height() - 1), double(map_->width() - 1), L - 1, L - 1};
    observations_.dim = 4;
    observations_.lower = {0, 0, 0, 0};
    observations_.upper = {double(map_->height() - 1), double(map_->width() - 1), L, L - 1};
    actions_.discrete = true;
    actions_.count = kActionCount;
  }

  const TaxiMap& map() const { return *map_; }
  std::shared_ptr<const TaxiMap> shared_map() const { return map_; }

  std::string_view name() const override { return "taxi"; }
  const InputSpace& input_space() const override { return inputs_; }
  const ObservationSpace& observation_space() const override { return observations_; }
  const ActionSpace& action_space() const override { return actions_; }
  int max_steps() const override { return max_steps_; }

  void validate_input(const SolutionInput& input) const override {
    Mdp::validate_input(input);
    const auto& v = input.values;
    if (v[2] == v[3]) throw RejectedInputError("taxi: passenger landmark equals destination");
    if (map_->blocked(int(v[0]), int(v[1]))) throw RejectedInputError("taxi: start cell is blocked");
  }

  bool is_valid(const SolutionInput& input) const {
    try {
      validate_input(input);
      return true;
    } catch (const RejectedInputError&) {
      return false;
    }
  }

  Observation reset(const SolutionInput& input, std::uint64_t /*seed*/) override {
    validate_input(input);
    const auto& v = input.values;
    state_ = {int(v[0]), int(v[1]), int(v[2]), int(v[3])};
    done_ = false;
    return to_observation(state_);
  }

  StepOutcome step(const Action& action) override {
    if (done_) throw ContractViolation("taxi: step after episode end");
    const TaxiStep s = taxi_step(*map_, state_, static_cast<int>(action.at(0)));
    state_ = s.state;
    done_ = s.terminal;
    return {to_observation(state_), s.reward, s.terminal, s.fault};
  }

  const TaxiState& state() const { return state_; }

  SolutionInput sample_input(Rng& rng) const override {
    const int L = map_->landmark_count();
    int row = 0;
    int col = 0;
    do {
      row = int(uniform_int(rng, 0, map_->height() - 1));
      col = int(uniform_int(rng, 0, map_->width() - 1));
    } while (map_->blocked(row, col));
    const int pass = int(uniform_int(rng, 0, L - 1));
    int dest = int(uniform_int(rng, 0, L - 2));
    if (dest >= pass) ++dest;
    return {{double(row), double(col), double(pass), double(dest)}, "taxi"};
  }

  /// Adds `delta` to one component and clips. Returns nullopt when the clipped
  /// result breaks an input invariant.
  std::optional<SolutionInput> shift_component(const SolutionInput& input, std::size_t component, int delta) const {
    SolutionInput out = input;
    out.values[component] =
        std::clamp(out.values[component] + delta, inputs_.lower[component], inputs_.upper[component]);
    if (!is_valid(out)) return std::nullopt;
    return out;
  }

  /// Moves one component by +/-1 (clipped). Invalid outcomes are redrawn among
  /// the remaining (component, direction) pairs.
  SolutionInput mutate(const SolutionInput& input, Rng& rng) const override {
    std::vector<std::pair<std::size_t, int>> options;
    for (std::size_t c = 0; c < 4; ++c) {
      options.emplace_back(c, +1);
      options.emplace_back(c, -1);
    }
    while (!options.empty()) {
      const std::size_t pick = uniform_index(rng, options.size());
      const auto [component, delta] = options[pick];
      if (auto out = shift_component(input, component, delta)) return *out;
      options.erase(options.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return input;
  }

  std::vector<BehaviorSpace> behavior_spaces() const override {
    const double hi = max_steps_;
    return {{"pickup-dropoff", {0.0, 0.0}, {hi, hi}, "pickup-dropoff"}};
  }

  /// (actions until pickup, actions from pickup to episode end); a passenger
  /// never picked up gives (episode length, 0).
  Behavior raw_behavior(const BehaviorSpace& space, const Trajectory& traj) const override {
    if (space.extractor != "pickup-dropoff") throw ConfigError("taxi: unknown behavior extractor " + space.extractor);
    const double riding = map_->landmark_count();
    const std::size_t len = traj.length();
    for (std::size_t t = 1; t < traj.states.size(); ++t) {
      if (traj.states[t][2] == riding) return {double(t), double(len - t)};
    }
    return {double(len), 0.0};
  }

  std::unique_ptr<Mdp> clone() const override { return std::make_unique<TaxiWorld>(*this); }

 private:
  std::shared_ptr<const TaxiMap> map_;
  int max_steps_;
  InputSpace inputs_;
  ObservationSpace observations_;
  ActionSpace actions_;
  TaxiState state_;
  bool done_ = true;
};

}  // namespace qdpt::taxi
