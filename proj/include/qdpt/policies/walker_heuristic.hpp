#pragma once

#include "qdpt/core/mdp.hpp"
#include "qdpt/core/episode.hpp"
#include "qdpt/envs/walker.hpp"
#include "qdpt/metrics/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qdpt::walker {

struct WalkerGains {
  double amplitude = 0.7;
  double steps_amplitude = 0.5;
  double swing_limit = 0.8;     // hip angle at which a leg reverses
  double pitch_gain = 0.8;
  double pitch_rate_gain = 0.3;
  double max_balance = 0.3;
  double jump_distance = 0.5;   // take off when the next pit/stump is this close
};

/// Bang-bang hip oscillator read off the hip angles and speeds, a pitch
/// stabilizer added to both hips, and a jump reflex for pits and stumps.
class HeuristicWalkerPolicy final : public Policy {
 public:
  explicit HeuristicWalkerPolicy(WalkerGains gains = {}) : g_(gains) {}

  Action act(std::span<const double> o) const override {
    const bool grounded = o[f_contact0] != 0.0 || o[f_contact1] != 0.0;
    const int next = static_cast<int>(o[f_next_type]);
    const double dist = o[f_next_distance];
    if (grounded && (next == pit || next == stump) && dist <= g_.jump_distance && dist > 0.0) return {1.0, 1.0};

    const double hip = o[f_hip0];
    const double speed = o[f_hip_speed0];
    double dir = 0.0;
    if (speed > 0.0) dir = hip < g_.swing_limit ? 1.0 : -1.0;
    else if (speed < 0.0) dir = hip > -g_.swing_limit ? -1.0 : 1.0;
    else dir = hip < g_.swing_limit ? 1.0 : -1.0;

    const double amp = (next == steps && dist == 0.0) ? g_.steps_amplitude : g_.amplitude;
    const double balance = std::clamp(-g_.pitch_gain * o[f_hull_angle] - g_.pitch_rate_gain * o[f_hull_omega],
                                      -g_.max_balance, g_.max_balance);
    return {std::clamp(amp * dir + balance, -1.0, 1.0), std::clamp(-amp * dir + balance, -1.0, 1.0)};
  }

  const WalkerGains& gains() const { return g_; }

 private:
  WalkerGains g_;
};

/// Re-derives the descriptor bounds table: the reference controller runs on
/// `courses` random inputs, and each descriptor's 5th-95th percentile range is
/// widened by 25% of its width (half on each side).
inline std::vector<DescriptorBounds> measure_descriptor_bounds(const WalkerWorld& prototype, const Policy& policy,
                                                               int courses = 1000, std::uint64_t seed = 0) {
  auto env = prototype.clone();
  Rng rng(seed);
  std::vector<std::vector<double>> samples(kDescriptorBounds.size());
  for (int i = 0; i < courses; ++i) {
    const Trajectory traj = run_episode(*env, policy, env->sample_input(rng));
    for (std::size_t d = 0; d < kDescriptorBounds.size(); ++d) {
      samples[d].push_back(descriptor_mean(kDescriptorBounds[d].name, traj));
    }
  }
  std::vector<DescriptorBounds> out;
  for (std::size_t d = 0; d < kDescriptorBounds.size(); ++d) {
    const double lo = sample_quantile(samples[d], 0.05);
    const double hi = sample_quantile(samples[d], 0.95);
    const double pad = 0.125 * (hi - lo);
    out.push_back({kDescriptorBounds[d].name, lo - pad, hi + pad});
  }
  return out;
}

}  // namespace qdpt::walker
