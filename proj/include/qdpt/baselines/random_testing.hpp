#pragma once

#include "qdpt/qd/campaign.hpp"

namespace qdpt {

/// N independent uniform inputs, all drawn from the init stream.
inline CampaignLog random_testing_run(const Mdp& mdp, const Policy& policy, const BehaviorSpace& space,
                                      const CampaignConfig& config, CampaignRng& rng) {
  config.validate();
  CampaignLog log;
  log.method = "random";
  log.env = mdp.name();
  log.behavior_space = space.name;
  log.records.reserve(static_cast<std::size_t>(config.budget));
  Evaluator eval(mdp, policy, space, config.sim_seed);
  for (int i = 0; i < config.budget; ++i) log.append(eval(eval.mdp().sample_input(rng.init)));
  return log;
}

}  // namespace qdpt
