#pragma once

#include "qdpt/baselines/mdpfuzz.hpp"
#include "qdpt/baselines/random_testing.hpp"
#include "qdpt/envs/lander.hpp"
#include "qdpt/envs/taxi.hpp"
#include "qdpt/envs/walker.hpp"
#include "qdpt/harness/config.hpp"
#include "qdpt/policies/lander_heuristic.hpp"
#include "qdpt/policies/q_learning.hpp"
#include "qdpt/policies/walker_heuristic.hpp"
#include "qdpt/qd/map_elites.hpp"
#include "qdpt/qd/novelty_search.hpp"

#include <filesystem>
#include <memory>

namespace qdpt::harness {

inline std::unique_ptr<Mdp> make_environment(const ExperimentSpec& s) {
  const int limit = s.env.max_steps;
  if (s.environment == "taxi") {
    return std::make_unique<taxi::TaxiWorld>(std::make_shared<const taxi::TaxiMap>(taxi::TaxiMap::default_map()),
                                             limit ? limit : taxi::kDefaultMaxSteps);
  }
  if (s.environment == "lander") {
    return std::make_unique<lander::LanderWorld>(lander::LanderPhysics{}, s.env.lander_sigma,
                                                 limit ? limit : lander::kDefaultMaxSteps);
  }
  if (s.environment == "walker") {
    return std::make_unique<walker::WalkerWorld>(walker::WalkerPhysics{}, s.env.walker_geometric_p,
                                                 limit ? limit : walker::kDefaultMaxSteps);
  }
  throw ConfigError("unknown environment '" + s.environment + "'");
}

/// Behavior spaces an experiment config names, defaulting to the environment's first.
inline std::vector<BehaviorSpace> resolve_spaces(const ExperimentSpec& s, const Mdp& mdp) {
  std::vector<BehaviorSpace> out;
  if (s.behavior_spaces.empty()) {
    out.push_back(mdp.behavior_spaces().front());
  } else {
    for (const auto& name : s.behavior_spaces) out.push_back(mdp.behavior_space(name));
  }
  return out;
}

/// Full check, including names that need an environment instance.
inline void validate_spec(const ExperimentSpec& s) {
  validate_spec_shape(s);
  resolve_spaces(s, *make_environment(s));
}

struct PolicyHandle {
  std::shared_ptr<const Policy> policy;
  std::string description;
  std::shared_ptr<const taxi::QTable> qtable;  // taxi only
};

/// Taxi loads the configured Q-table or trains one; the other environments
/// use their built-in heuristic controllers.
inline PolicyHandle make_policy(const ExperimentSpec& s, const Mdp& mdp) {
  if (s.environment == "taxi") {
    const auto& world = dynamic_cast<const taxi::TaxiWorld&>(mdp);
    std::shared_ptr<const taxi::QTable> table;
    std::string how;
    if (!s.policy.qtable.empty()) {
      table = std::make_shared<const taxi::QTable>(taxi::load_qtable(s.policy.qtable, world.map()));
      how = "q-table loaded from " + s.policy.qtable;
    } else {
      table = std::make_shared<const taxi::QTable>(taxi::train_q_learning(world, s.policy.training));
      how = "q-table trained in-process";
    }
    return {std::make_shared<const taxi::QTablePolicy>(table, world.shared_map()), how, table};
  }
  if (s.environment == "lander") return {std::make_shared<const lander::HeuristicLanderPolicy>(), "heuristic policy built-in", nullptr};
  if (s.environment == "walker") return {std::make_shared<const walker::HeuristicWalkerPolicy>(), "heuristic policy built-in", nullptr};
  throw ConfigError("unknown environment '" + s.environment + "'");
}

inline CampaignLog run_method(std::string_view method, const Mdp& mdp, const Policy& policy, const BehaviorSpace& space,
                              const CampaignConfig& config, CampaignRng& rng) {
  if (method == "random") return random_testing_run(mdp, policy, space, config, rng);
  if (method == "map-elites") return map_elites_run(mdp, policy, space, config, rng).log;
  if (method == "novelty-search") return novelty_search_run(mdp, policy, space, config, rng).log;
  if (method == "mdpfuzz") return mdpfuzz_run(mdp, policy, space, config, rng).log;
  throw ConfigError("unknown method '" + std::string(method) + "'");
}

}  // namespace qdpt::harness
