#pragma once

#include "qdpt/baselines/gmm.hpp"
#include "qdpt/metrics/quantile.hpp"
#include "qdpt/qd/campaign.hpp"

#include <optional>

namespace qdpt {

struct SeedEntry {
  SolutionInput input;
  double fitness = 0.0;
  bool fresh = false;  // admitted by the freshness gate rather than at initialization
};

/// GMM features of an evaluation: final state followed by the behavior.
inline std::vector<double> fuzz_features(const EvalRecord& r) {
  std::vector<double> f = r.final_state;
  f.push_back(r.behavior[0]);
  f.push_back(r.behavior[1]);
  return f;
}

struct MdpFuzzResult {
  std::vector<SeedEntry> pool;
  std::optional<GmmModel> model;
  double threshold = -std::numeric_limits<double>::infinity();
  CampaignLog log;
};

/// Simplified MDPFuzz-style fuzzer. Phase 1 fills the seed pool with N_init
/// random inputs and fits a GMM to their features. Phase 2 mutates a uniformly
/// chosen seed; a fault keeps the parent and discards the mutant, otherwise the
/// mutant joins the pool when its feature log-likelihood falls below the
/// freshness threshold. The GMM is refit on all features every R evaluations
/// and the quantile threshold is recomputed on that same data.
inline MdpFuzzResult mdpfuzz_run(const Mdp& mdp, const Policy& policy, const BehaviorSpace& space,
                                 const CampaignConfig& config, CampaignRng& rng) {
  config.validate();
  const MdpFuzzParams& p = config.mdpfuzz;
  if (p.components <= 0 || p.refit_period <= 0 || p.em_iterations < 0) throw ConfigError("mdpfuzz: invalid GMM settings");
  if (!(p.freshness_quantile >= 0.0 && p.freshness_quantile <= 1.0)) throw ConfigError("mdpfuzz: quantile outside [0, 1]");

  MdpFuzzResult out;
  out.log.method = "mdpfuzz";
  out.log.env = mdp.name();
  out.log.behavior_space = space.name;
  out.log.records.reserve(static_cast<std::size_t>(config.budget));
  Evaluator eval(mdp, policy, space, config.sim_seed);
  const Mdp& env = eval.mdp();
  std::vector<std::vector<double>> features;

  auto refit = [&] {
    const int k = std::min<int>(p.components, static_cast<int>(features.size()));
    out.model = gmm_fit(features, k, p.em_iterations, rng.search).model;
    if (p.freshness_threshold) {
      out.threshold = *p.freshness_threshold;
    } else {
      std::vector<double> ll;
      ll.reserve(features.size());
      for (const auto& f : features) ll.push_back(gmm_loglik(*out.model, f));
      out.threshold = sample_quantile(ll, p.freshness_quantile);
    }
  };
  auto admit = [&](SeedEntry e) {
    if (p.max_pool > 0 && out.pool.size() >= p.max_pool) out.pool.erase(out.pool.begin());
    out.pool.push_back(std::move(e));
  };

  for (int i = 0; i < config.budget; ++i) {
    if (i < config.init_budget || out.pool.empty()) {
      const EvalRecord& r = out.log.append(eval(env.sample_input(rng.init)));
      features.push_back(fuzz_features(r));
      admit({r.input, r.fitness, false});
      continue;
    }
    if (!out.model || i % p.refit_period == 0) refit();
    const SeedEntry& parent = out.pool[uniform_index(rng.search, out.pool.size())];
    const EvalRecord& r = out.log.append(eval(env.mutate(parent.input, rng.search)));
    features.push_back(fuzz_features(r));
    if (r.oracle) continue;
    if (gmm_loglik(*out.model, features.back()) < out.threshold) admit({r.input, r.fitness, true});
  }
  return out;
}

}  // namespace qdpt
