#pragma once

#include "qdpt/qd/campaign.hpp"
#include "qdpt/qd/grid_archive.hpp"

namespace qdpt {

struct MapElitesResult {
  GridArchive archive;
  CampaignLog log;
};

/// MAP-Elites for policy testing. The first N_init inputs are uniform random
/// draws; afterwards a parent is chosen uniformly among the current elites and
/// mutated. Parent scores are never fed back (no curiosity), so the final
/// score-update step of the generic QD loop does nothing here.
inline MapElitesResult map_elites_run(const Mdp& mdp, const Policy& policy, const BehaviorSpace& space,
                                      const CampaignConfig& config, CampaignRng& rng) {
  config.validate();
  MapElitesResult out{GridArchive(space, config.grid_resolution), {}};
  out.log.method = "map-elites";
  out.log.env = mdp.name();
  out.log.behavior_space = space.name;
  out.log.records.reserve(static_cast<std::size_t>(config.budget));
  Evaluator eval(mdp, policy, space, config.sim_seed);
  const Mdp& env = eval.mdp();
  for (int i = 0; i < config.budget; ++i) {
    SolutionInput x;
    if (i < config.init_budget || out.archive.empty()) {
      x = env.sample_input(rng.init);
    } else {
      const Elite& parent = out.archive.elite(uniform_index(rng.search, out.archive.size()));
      x = env.mutate(parent.input, rng.search);
    }
    const EvalRecord& r = out.log.append(eval(x));
    out.archive.attempt_to_add(r.input, r.behavior, r.fitness, r.oracle, r.index);
  }
  return out;
}

}  // namespace qdpt
