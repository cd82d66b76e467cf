#pragma once

#include "qdpt/core/mdp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>

namespace qdpt::walker {

enum Obstacle : int { flat = 0, pit = 1, steps = 2, stump = 3 };
inline constexpr std::size_t kSlots = 15;
inline constexpr int kDefaultMaxSteps = 2000;

/// Stylized two-hip walker. The hull pitches like a damped pendulum driven by
/// the common-mode hip motion and by obstacle shocks; falling past
/// `fall_angle` is a ground collision.
struct WalkerPhysics {
  double dt = 0.05;
  double hip_rate = 3.0;          // rad/s at |action| = 1
  double hip_limit = 1.0;         // rad
  double stride = 2.0;            // forward speed per unit of differential hip speed
  double spring = 6.0;            // hull pitch restoring stiffness
  double damping = 2.5;
  double lean = 1.5;              // common-mode hip speed -> pitch acceleration
  double fall_angle = 1.0;
  double first_slot = 6.0;
  double slot_spacing = 4.0;
  double goal_margin = 6.0;       // goal sits this far past the last slot
  double pit_half_width = 0.5;
  double pit_fall_rate = 20.0;    // pitch acceleration while standing over a pit
  double steps_half_width = 1.5;
  double steps_shock = 0.9;       // pitch-rate kick per step edge
  int steps_period = 6;           // simulation steps between step edges
  double steps_slowdown = 0.6;
  double stump_shock = 1.6;       // pitch-rate kick per unit speed when tripping
  double stump_graze = 0.3;       // kick when clearing a stump airborne
  double jump_threshold = 0.9;    // both hip actions at or above this start a jump
  int air_steps = 20;
  double jump_boost = 1.3;        // forward speed multiplier while airborne
  double takeoff_kick = -0.6;
  double landing_kick = 0.5;      // per unit speed
  double sensor_range = 10.0;
  double progress_reward = 1.0;
  double torque_cost = 0.02;
  double fall_reward = -100.0;
};

struct WalkerState {
  double x = 0.0;
  double angle = 0.0;
  double omega = 0.0;
  std::array<double, 2> hip{0.0, 0.0};
  std::array<double, 2> hip_speed{0.0, 0.0};
  std::array<bool, 2> contact{true, true};
  double torque = 0.0;
  double speed = 0.0;
  int air_left = 0;
  int tick = 0;

  bool operator==(const WalkerState&) const = default;
};

using Course = std::array<int, kSlots>;

struct WalkerStep {
  WalkerState state;
  double reward = 0.0;
  bool terminal = false;
  bool fault = false;
};

// Observation layout. Indices 0, 1, 9, 10 and the hip entries are the raw
// material of every descriptor.
enum Feature : std::size_t {
  f_distance = 0,
  f_hull_angle = 1,
  f_hull_omega = 2,
  f_hip0 = 3,
  f_hip1 = 4,
  f_hip_speed0 = 5,
  f_hip_speed1 = 6,
  f_contact0 = 7,
  f_contact1 = 8,
  f_torque = 9,
  f_jump = 10,
  f_next_type = 11,
  f_next_distance = 12,
  f_speed = 13,
  f_x = 14,
  kObservationDim = 15
};

inline double slot_center(const WalkerPhysics& p, std::size_t i) { return p.first_slot + p.slot_spacing * double(i); }
inline double goal_position(const WalkerPhysics& p) { return slot_center(p, kSlots - 1) + p.goal_margin; }

inline double half_width(const WalkerPhysics& p, int type) {
  switch (type) {
    case pit: return p.pit_half_width;
    case steps: return p.steps_half_width;
    default: return 0.0;
  }
}

/// Next non-flat obstacle whose far edge is still ahead of x.
inline std::pair<int, double> next_obstacle(const WalkerPhysics& p, const Course& course, double x) {
  for (std::size_t i = 0; i < kSlots; ++i) {
    if (course[i] == flat) continue;
    const double c = slot_center(p, i);
    const double hw = half_width(p, course[i]);
    if (c + hw >= x) return {course[i], std::clamp(c - hw - x, 0.0, p.sensor_range)};
  }
  return {flat, p.sensor_range};
}

inline Observation to_observation(const WalkerPhysics& p, const Course& course, const WalkerState& s) {
  Observation o(kObservationDim, 0.0);
  const auto [type, dist] = next_obstacle(p, course, s.x);
  o[f_distance] = goal_position(p) - s.x;
  o[f_hull_angle] = s.angle;
  o[f_hull_omega] = s.omega;
  o[f_hip0] = s.hip[0];
  o[f_hip1] = s.hip[1];
  o[f_hip_speed0] = s.hip_speed[0];
  o[f_hip_speed1] = s.hip_speed[1];
  o[f_contact0] = s.contact[0] ? 1.0 : 0.0;
  o[f_contact1] = s.contact[1] ? 1.0 : 0.0;
  o[f_torque] = s.torque;
  o[f_jump] = (!s.contact[0] && !s.contact[1]) ? 1.0 : 0.0;
  o[f_next_type] = dist < p.sensor_range ? double(type) : 0.0;
  o[f_next_distance] = dist;
  o[f_speed] = s.speed;
  o[f_x] = s.x;
  return o;
}

/// One control step. `action` holds the two hip speed commands in [-1, 1].
inline WalkerStep walker_step(const WalkerPhysics& p, const Course& course, const WalkerState& s,
                              std::span<const double> action) {
  WalkerState n = s;
  ++n.tick;
  const double a0 = std::clamp(action[0], -1.0, 1.0);
  const double a1 = std::clamp(action[1], -1.0, 1.0);
  n.torque = 0.5 * (std::abs(a0) + std::abs(a1));

  const bool airborne = s.air_left > 0;
  double kick = 0.0;  // instantaneous pitch-rate change

  // Hips.
  const std::array<double, 2> cmd{a0, a1};
  for (std::size_t i = 0; i < 2; ++i) {
    const double before = n.hip[i];
    n.hip[i] = std::clamp(before + cmd[i] * p.hip_rate * p.dt, -p.hip_limit, p.hip_limit);
    n.hip_speed[i] = (n.hip[i] - before) / (p.hip_rate * p.dt);
  }

  // Locomotion.
  if (airborne) {
    n.air_left = s.air_left - 1;
    if (n.air_left == 0) kick += p.landing_kick * s.speed;
  } else if (a0 >= p.jump_threshold && a1 >= p.jump_threshold) {
    n.air_left = p.air_steps;
    n.speed = s.speed * p.jump_boost;
    kick += p.takeoff_kick;
  } else {
    n.speed = p.stride * 0.5 * std::abs(n.hip_speed[0] - n.hip_speed[1]);
  }
  const bool in_air = n.air_left > 0;
  if (in_air) {
    n.contact = {false, false};
  } else {
    const double diff = n.hip_speed[0] - n.hip_speed[1];
    n.contact = {diff <= 0.1, diff >= -0.1};
  }

  // Obstacles under the hull.
  double alpha = -p.spring * s.angle - p.damping * s.omega + p.lean * 0.5 * (n.hip_speed[0] + n.hip_speed[1]);
  double speed = n.speed;
  for (std::size_t i = 0; i < kSlots; ++i) {
    const int type = course[i];
    if (type == flat) continue;
    const double c = slot_center(p, i);
    const double hw = half_width(p, type);
    if (type == steps && !in_air && s.x >= c - hw && s.x <= c + hw) {
      speed *= p.steps_slowdown;
      if (n.tick % p.steps_period == 0) kick += ((n.tick / p.steps_period) % 2 == 0 ? 1.0 : -1.0) * p.steps_shock;
    }
    if (type == pit && !in_air && s.x >= c - hw && s.x <= c + hw) alpha += p.pit_fall_rate;
  }
  n.speed = speed;
  n.x = s.x + speed * p.dt;
  for (std::size_t i = 0; i < kSlots; ++i) {
    if (course[i] != stump) continue;
    const double c = slot_center(p, i);
    if (s.x < c && n.x >= c) kick += in_air ? p.stump_graze : p.stump_shock * speed;
  }

  n.omega = s.omega + alpha * p.dt + kick;
  n.angle = s.angle + n.omega * p.dt;

  WalkerStep out{n, p.progress_reward * (n.x - s.x) - p.torque_cost * n.torque, false, false};
  if (std::abs(n.angle) > p.fall_angle) {
    out.terminal = true;
    out.fault = true;
    out.reward += p.fall_reward;
  } else if (n.x >= goal_position(p)) {
    out.terminal = true;
  }
  return out;
}

/// Descriptor bounds measured from the reference controller on 1000 random
/// courses (5th-95th percentile, widened by 25%). Regenerate with
/// measure_descriptor_bounds after changing WalkerPhysics or the controller.
struct DescriptorBounds {
  const char* name;
  double lower;
  double upper;
};

inline constexpr std::array<DescriptorBounds, 6> kDescriptorBounds{{
    {"distance", 29.4127, 49.7946},
    {"hull_angle", -0.00222517, 0.0223699},
    {"torque", 0.586973, 0.692337},
    {"jump", 0.0463837, 0.221014},
    {"hip_angle", 0.435327, 0.459165},
    {"hip_speed", 0.574498, 0.671899},
}};

/// Per-observation value of a named descriptor.
inline double descriptor_feature(std::string_view name, std::span<const double> o) {
  if (name == "distance") return o[f_distance];
  if (name == "hull_angle") return o[f_hull_angle];
  if (name == "torque") return o[f_torque];
  if (name == "jump") return o[f_jump];
  if (name == "hip_angle") return 0.5 * (std::abs(o[f_hip0]) + std::abs(o[f_hip1]));
  if (name == "hip_speed") return 0.5 * (std::abs(o[f_hip_speed0]) + std::abs(o[f_hip_speed1]));
  throw ConfigError("walker: unknown descriptor '" + std::string(name) + "'");
}

/// Mean of a descriptor over the observation sequence.
inline double descriptor_mean(std::string_view name, const Trajectory& traj) {
  double sum = 0.0;
  for (const auto& s : traj.states) sum += descriptor_feature(name, s);
  return sum / double(traj.states.size());
}

/// The four descriptor pairs; the first is the default space.
inline constexpr std::array<std::pair<const char*, const char*>, 4> kDescriptorPairs{{
    {"distance", "hull_angle"},
    {"hip_angle", "hip_speed"},
    {"torque", "jump"},
    {"distance", "jump"},
}};

inline DescriptorBounds descriptor_bounds(std::string_view name) {
  for (const auto& b : kDescriptorBounds) {
    if (name == b.name) return b;
  }
  throw ConfigError("walker: unknown descriptor '" + std::string(name) + "'");
}

/// Input: 15 obstacle slots, each in {0: flat, 1: pit, 2: steps, 3: stump}.
class WalkerWorld final : public Mdp {
 public:
  explicit WalkerWorld(WalkerPhysics physics = {}, double geometric_p = 0.5, int max_steps = kDefaultMaxSteps)
      : physics_(physics), geometric_p_(geometric_p), max_steps_(max_steps) {
    inputs_.kind = InputSpace::Kind::integer;
    inputs_.lower.assign(kSlots, 0.0);
    inputs_.upper.assign(kSlots, 3.0);
    observations_.dim = kObservationDim;
    observations_.lower.assign(kObservationDim, -1e3);
    observations_.upper.assign(kObservationDim, 1e3);
    actions_.discrete = false;
    actions_.dim = 2;
    actions_.lower = {-1.0, -1.0};
    actions_.upper = {1.0, 1.0};
  }

  const WalkerPhysics& physics() const { return physics_; }
  const Course& course() const { return course_; }
  const WalkerState& state() const { return state_; }
  double geometric_p() const { return geometric_p_; }

  std::string_view name() const override { return "walker"; }
  const InputSpace& input_space() const override { return inputs_; }
  const ObservationSpace& observation_space() const override { return observations_; }
  const ActionSpace& action_space() const override { return actions_; }
  int max_steps() const override { return max_steps_; }

  static Course to_course(const SolutionInput& input) {
    Course c{};
    for (std::size_t i = 0; i < kSlots; ++i) c[i] = static_cast<int>(input.values[i]);
    return c;
  }

  Observation reset(const SolutionInput& input, std::uint64_t /*seed*/) override {
    validate_input(input);
    course_ = to_course(input);
    return reset_to(WalkerState{});
  }

  Observation reset_to(const WalkerState& s) {
    state_ = s;
    done_ = false;
    return to_observation(physics_, course_, state_);
  }

  StepOutcome step(const Action& action) override {
    if (done_) throw ContractViolation("walker: step after episode end");
    if (action.size() != 2) throw ContractViolation("walker: action must have two components");
    const WalkerStep s = walker_step(physics_, course_, state_, action);
    state_ = s.state;
    done_ = s.terminal;
    return {to_observation(physics_, course_, state_), s.reward, s.terminal, s.fault};
  }

  SolutionInput sample_input(Rng& rng) const override {
    SolutionInput in{std::vector<double>(kSlots), "walker"};
    for (auto& v : in.values) v = double(uniform_int(rng, 0, 3));
    return in;
  }

  /// Number of slots to redraw: geometric with parameter p on {1, 2, ...},
  /// capped at the slot count.
  std::size_t draw_mutation_size(Rng& rng) const {
    std::size_t n = 1;
    while (n < kSlots && uniform_real(rng, 0.0, 1.0) >= geometric_p_) ++n;
    return n;
  }

  /// Redraws a random nonempty subset of slots uniformly over {0,1,2,3}.
  SolutionInput mutate(const SolutionInput& input, Rng& rng) const override {
    SolutionInput out = input;
    std::array<std::size_t, kSlots> order{};
    for (std::size_t i = 0; i < kSlots; ++i) order[i] = i;
    const std::size_t n = draw_mutation_size(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + uniform_index(rng, kSlots - i);
      std::swap(order[i], order[j]);
      out.values[order[i]] = double(uniform_int(rng, 0, 3));
    }
    return out;
  }

  std::vector<BehaviorSpace> behavior_spaces() const override {
    std::vector<BehaviorSpace> spaces;
    for (const auto& [a, b] : kDescriptorPairs) {
      const auto ba = descriptor_bounds(a);
      const auto bb = descriptor_bounds(b);
      const std::string n = std::string(a) + "+" + b;
      spaces.push_back({n, {ba.lower, bb.lower}, {ba.upper, bb.upper}, n});
    }
    return spaces;
  }

  Behavior raw_behavior(const BehaviorSpace& space, const Trajectory& traj) const override {
    const auto plus = space.extractor.find('+');
    if (plus == std::string::npos) throw ConfigError("walker: unknown behavior extractor " + space.extractor);
    const std::string a = space.extractor.substr(0, plus);
    const std::string b = space.extractor.substr(plus + 1);
    return {descriptor_mean(a, traj), descriptor_mean(b, traj)};
  }

  std::unique_ptr<Mdp> clone() const override { return std::make_unique<WalkerWorld>(*this); }

 private:
  WalkerPhysics physics_;
  double geometric_p_;
  int max_steps_;
  InputSpace inputs_;
  ObservationSpace observations_;
  ActionSpace actions_;
  Course course_{};
  WalkerState state_;
  bool done_ = true;
};

}  // namespace qdpt::walker
