#pragma once

#include "qdpt/qd/campaign.hpp"
#include "qdpt/qd/novelty.hpp"

namespace qdpt {

struct NoveltySearchResult {
  NoveltyArchive archive;
  CampaignLog log;
};

/// Novelty Search for policy testing.
///
/// Iteration 1 evaluates a uniform random population. Each later iteration
/// scores the previous population once against archive ∪ population, picks
/// parents by tournament on those scores and mutates them. Archive insertion
/// is decided per iteration against the archive as it stood when the
/// iteration began plus the whole current population, so the outcome does not
/// depend on evaluation order inside the batch.
inline NoveltySearchResult novelty_search_run(const Mdp& mdp, const Policy& policy, const BehaviorSpace& space,
                                              const CampaignConfig& config, CampaignRng& rng) {
  config.validate_novelty();
  NoveltySearchResult out{NoveltyArchive(config.ns_threshold, config.ns_k), {}};
  out.log.method = "novelty-search";
  out.log.env = mdp.name();
  out.log.behavior_space = space.name;
  out.log.records.reserve(static_cast<std::size_t>(config.budget));
  Evaluator eval(mdp, policy, space, config.sim_seed);
  const Mdp& env = eval.mdp();
  const auto pop = static_cast<std::size_t>(config.ns_population);

  std::vector<SolutionInput> parents;
  std::vector<Behavior> parent_behaviors;
  std::vector<Behavior> refs;
  for (int it = 0; it < config.ns_iterations; ++it) {
    std::vector<SolutionInput> batch;
    batch.reserve(pop);
    if (it == 0) {
      for (std::size_t j = 0; j < pop; ++j) batch.push_back(env.sample_input(rng.init));
    } else {
      refs = out.archive.behaviors();
      const std::size_t offset = refs.size();
      refs.insert(refs.end(), parent_behaviors.begin(), parent_behaviors.end());
      std::vector<double> score(pop);
      for (std::size_t j = 0; j < pop; ++j) score[j] = novelty_score(parent_behaviors[j], refs, config.ns_k, offset + j);
      for (std::size_t j = 0; j < pop; ++j) {
        std::size_t best = uniform_index(rng.search, pop);
        for (int t = 1; t < config.ns_tournament; ++t) {
          const std::size_t c = uniform_index(rng.search, pop);
          if (score[c] > score[best]) best = c;
        }
        batch.push_back(env.mutate(parents[best], rng.search));
      }
    }

    std::vector<Behavior> behaviors;
    std::vector<std::size_t> indices;
    behaviors.reserve(pop);
    for (const auto& x : batch) {
      const EvalRecord& r = out.log.append(eval(x));
      behaviors.push_back(r.behavior);
      indices.push_back(r.index);
    }

    refs = out.archive.behaviors();
    const std::size_t offset = refs.size();
    refs.insert(refs.end(), behaviors.begin(), behaviors.end());
    std::vector<std::size_t> admitted;
    for (std::size_t j = 0; j < pop; ++j) {
      if (out.archive.admits(novelty_score(behaviors[j], refs, config.ns_k, offset + j))) admitted.push_back(j);
    }
    for (std::size_t j : admitted) out.archive.append(behaviors[j], indices[j]);

    parents = std::move(batch);
    parent_behaviors = std::move(behaviors);
  }
  return out;
}

}  // namespace qdpt
