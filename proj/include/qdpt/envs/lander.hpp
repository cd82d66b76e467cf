#pragma once

#include "qdpt/core/mdp.hpp"

#include <cmath>
#include <memory>

namespace qdpt::lander {

enum Engine : int { idle = 0, left_engine = 1, main_engine = 2, right_engine = 3 };
inline constexpr int kActionCount = 4;

/// Point mass with orientation over flat ground (y = 0) and a pad centred at x = 0.
struct LanderPhysics {
  double gravity = 9.8;
  double dt = 0.02;
  double main_accel = 16.0;     // along the hull's up axis
  double side_angular = 4.0;    // rad/s^2 from one orientation engine
  double side_lateral = 1.5;    // units/s^2 sideways push from one orientation engine
  double start_x = 0.0;
  double start_y = 10.0;
  double force_to_velocity = 0.006;   // initial force -> initial velocity
  double force_to_spin = 0.0003;      // initial lateral force -> initial angular velocity
  double crash_speed = 4.0;
  double tip_angle = 0.8;
  double pad_half_width = 1.0;
  double viewport_half_width = 10.0;
  double viewport_top = 14.0;
  double goal_reward = 100.0;
  double fault_reward = -100.0;
  double force_limit = 1000.0;
};

struct LanderState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double angle = 0.0;
  double omega = 0.0;
  bool contact = false;

  bool operator==(const LanderState&) const = default;
};

struct LanderStep {
  LanderState state;
  double reward = 0.0;
  bool terminal = false;
  bool fault = false;
};

/// Negated (distance to pad centre + speed); reward is its per-step increase.
inline double shaping(const LanderState& s) {
  return -(std::hypot(s.x, s.y) + std::hypot(s.vx, s.vy));
}

/// Semi-implicit Euler step. Ground contact ends the episode: a gentle, upright
/// touchdown on the pad is a goal, anything else is a fault. Leaving the
/// viewport is a fault.
inline LanderStep lander_step(const LanderPhysics& p, const LanderState& s, int action) {
  LanderState n = s;
  double ax = 0.0;
  double ay = -p.gravity;
  double alpha = 0.0;
  switch (action) {
    case idle: break;
    case main_engine:
      ax += -std::sin(s.angle) * p.main_accel;
      ay += std::cos(s.angle) * p.main_accel;
      break;
    case left_engine:
      alpha -= p.side_angular;
      ax += p.side_lateral;
      break;
    case right_engine:
      alpha += p.side_angular;
      ax -= p.side_lateral;
      break;
    default: throw ContractViolation("lander: action index out of range");
  }
  n.vx += ax * p.dt;
  n.vy += ay * p.dt;
  n.omega += alpha * p.dt;
  n.x += n.vx * p.dt;
  n.y += n.vy * p.dt;
  n.angle += n.omega * p.dt;

  LanderStep out{n, shaping(n) - shaping(s), false, false};
  if (n.y <= 0.0) {
    out.state.y = 0.0;
    out.state.contact = true;
    out.terminal = true;
    out.fault = std::abs(n.vy) > p.crash_speed || std::abs(n.angle) > p.tip_angle || std::abs(n.x) > p.pad_half_width;
  } else if (std::abs(n.x) > p.viewport_half_width || n.y > p.viewport_top) {
    out.terminal = true;
    out.fault = true;
  }
  if (out.terminal) out.reward += out.fault ? p.fault_reward : p.goal_reward;
  return out;
}

inline Observation to_observation(const LanderState& s) {
  return {s.x, s.y, s.vx, s.vy, s.angle, s.omega, s.contact ? 1.0 : 0.0};
}

inline LanderState state_from_observation(std::span<const double> o) {
  return {o[0], o[1], o[2], o[3], o[4], o[5], o[6] != 0.0};
}

inline constexpr int kDefaultMaxSteps = 1000;

/// Input: initial force (fx, fy) in [-1000, 1000]^2 applied at the top centre.
class LanderWorld final : public Mdp {
 public:
  explicit LanderWorld(LanderPhysics physics = {}, double mutation_sigma = 50.0, int max_steps = kDefaultMaxSteps)
      : physics_(physics), sigma_(mutation_sigma), max_steps_(max_steps) {
    inputs_.kind = InputSpace::Kind::real;
    inputs_.lower = {-physics_.force_limit, -physics_.force_limit};
    inputs_.upper = {physics_.force_limit, physics_.force_limit};
    const double w = physics_.viewport_half_width;
    observations_.dim = 7;
    observations_.lower = {-w, 0, -50, -50, -M_PI, -50, 0};
    observations_.upper = {w, physics_.viewport_top, 50, 50, M_PI, 50, 1};
    actions_.discrete = true;
    actions_.count = kActionCount;
  }

  const LanderPhysics& physics() const { return physics_; }
  double mutation_sigma() const { return sigma_; }

  std::string_view name() const override { return "lander"; }
  const InputSpace& input_space() const override { return inputs_; }
  const ObservationSpace& observation_space() const override { return observations_; }
  const ActionSpace& action_space() const override { return actions_; }
  int max_steps() const override { return max_steps_; }

  LanderState initial_state(const SolutionInput& input) const {
    LanderState s;
    s.x = physics_.start_x;
    s.y = physics_.start_y;
    s.vx = input.values[0] * physics_.force_to_velocity;
    s.vy = input.values[1] * physics_.force_to_velocity;
    s.omega = -input.values[0] * physics_.force_to_spin;
    return s;
  }

  Observation reset(const SolutionInput& input, std::uint64_t /*seed*/) override {
    validate_input(input);
    return reset_to(initial_state(input));
  }

  /// Starts an episode from an arbitrary state.
  Observation reset_to(const LanderState& s) {
    state_ = s;
    done_ = false;
    return to_observation(state_);
  }

  StepOutcome step(const Action& action) override {
    if (done_) throw ContractViolation("lander: step after episode end");
    const LanderStep s = lander_step(physics_, state_, static_cast<int>(action.at(0)));
    state_ = s.state;
    done_ = s.terminal;
    return {to_observation(state_), s.reward, s.terminal, s.fault};
  }

  SolutionInput sample_input(Rng& rng) const override {
    const double f = physics_.force_limit;
    const double fx = uniform_real(rng, -f, f);
    const double fy = uniform_real(rng, -f, f);
    return {{fx, fy}, "lander"};
  }

  /// Gaussian perturbation, clipped to the force box.
  SolutionInput mutate(const SolutionInput& input, Rng& rng) const override {
    SolutionInput out = input;
    if (sigma_ <= 0.0) return out;
    for (std::size_t i = 0; i < 2; ++i) {
      out.values[i] = std::clamp(out.values[i] + normal(rng, 0.0, sigma_), inputs_.lower[i], inputs_.upper[i]);
    }
    return out;
  }

  std::vector<BehaviorSpace> behavior_spaces() const override {
    const double w = physics_.viewport_half_width;
    return {{"touchdown", {-w, -8.0}, {w, 0.0}, "touchdown"}};
  }

  /// (x, vy) at the first ground contact, or the last observed values when the
  /// episode ends without contact.
  Behavior raw_behavior(const BehaviorSpace& space, const Trajectory& traj) const override {
    if (space.extractor != "touchdown") throw ConfigError("lander: unknown behavior extractor " + space.extractor);
    for (const auto& s : traj.states) {
      if (s[6] != 0.0) return {s[0], s[3]};
    }
    const auto& last = traj.final_state();
    return {last[0], last[3]};
  }

  std::unique_ptr<Mdp> clone() const override { return std::make_unique<LanderWorld>(*this); }

 private:
  LanderPhysics physics_;
  double sigma_;
  int max_steps_;
  InputSpace inputs_;
  ObservationSpace observations_;
  ActionSpace actions_;
  LanderState state_;
  bool done_ = true;
};

}  // namespace qdpt::lander
