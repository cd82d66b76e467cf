#pragma once

#include "qdpt/core/mdp.hpp"
#include "qdpt/envs/lander.hpp"

#include <algorithm>
#include <cmath>

namespace qdpt::lander {

struct LanderGains {
  double position_to_angle = 0.1;
  double velocity_to_angle = 0.4;
  double max_tilt = 0.4;
  double angle_gain = 0.5;
  double spin_gain = 1.0;
  double hover_per_offset = 0.1;
  double height_gain = 0.5;
  double descent_gain = 0.5;
  double deadband = 0.05;
};

/// Proportional controller: orientation engines steer the hull toward a tilt
/// that carries the craft over the pad, the main engine fires whenever the
/// descent is faster than the envelope allows at the current height.
class HeuristicLanderPolicy final : public Policy {
 public:
  explicit HeuristicLanderPolicy(LanderGains gains = {}) : g_(gains) {}

  Action act(std::span<const double> obs) const override { return {double(decide(state_from_observation(obs)))}; }

  int decide(const LanderState& s) const {
    const double angle_target =
        std::clamp(g_.position_to_angle * s.x + g_.velocity_to_angle * s.vx, -g_.max_tilt, g_.max_tilt);
    const double angle_todo = (angle_target - s.angle) * g_.angle_gain - s.omega * g_.spin_gain;
    const double hover_target = g_.hover_per_offset * std::abs(s.x);
    const double hover_todo = (hover_target - s.y) * g_.height_gain - s.vy * g_.descent_gain;

    if (hover_todo > std::abs(angle_todo) && hover_todo > g_.deadband) return main_engine;
    if (angle_todo > g_.deadband) return right_engine;
    if (angle_todo < -g_.deadband) return left_engine;
    return idle;
  }

  const LanderGains& gains() const { return g_; }

 private:
  LanderGains g_;
};

}  // namespace qdpt::lander
