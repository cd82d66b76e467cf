#pragma once

#include "qdpt/policies/q_learning.hpp"
#include "qdpt/qd/campaign.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qdpt::harness {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string> kMethods{"random", "map-elites", "novelty-search", "mdpfuzz"};
inline const std::vector<std::string> kEnvironments{"taxi", "lander", "walker"};

/// Novelty thresholds per environment when the config leaves it unset.
inline double default_novelty_threshold(std::string_view env) { return env == "taxi" ? 0.9 : 0.005; }

struct EnvironmentParams {
  double lander_sigma = 50.0;
  double walker_geometric_p = 0.5;
  int max_steps = 0;  // 0 keeps the environment's own limit
};

struct PolicyParams {
  /// Taxi Q-table to load; empty trains one with `training`.
  std::string qtable;
  taxi::QLearningParams training;
};

struct ExperimentSpec {
  std::string environment = "taxi";
  std::vector<std::string> methods = kMethods;
  /// Empty selects the environment's default space.
  std::vector<std::string> behavior_spaces;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::uint64_t master_seed = 0;
  std::string output_dir = "runs";
  int workers = 1;
  CampaignConfig campaign;
  /// Unset picks default_novelty_threshold(environment).
  std::optional<double> novelty_threshold;
  EnvironmentParams env;
  PolicyParams policy;

  CampaignConfig resolved_campaign() const {
    CampaignConfig c = campaign;
    c.ns_threshold = novelty_threshold.value_or(default_novelty_threshold(environment));
    return c;
  }
};

namespace detail {

template <class T>
void take(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const Json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError("unknown config key '" + where + key + "'");
    }
  }
}

inline std::optional<double> optional_real(const Json& j, const char* key, std::optional<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_null()) return std::nullopt;
  if (j.at(key).is_string()) {
    const auto s = j.at(key).get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError(std::string("config key '") + key + "' must be a number, \"inf\", \"-inf\" or null");
  }
  if (!j.at(key).is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
  return j.at(key).get<double>();
}

inline Json real_or_text(std::optional<double> v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return *v;
}

}  // namespace detail

inline Json to_json(const ExperimentSpec& s) {
  const auto& c = s.campaign;
  const auto& f = c.mdpfuzz;
  const auto& t = s.policy.training;
  return Json{
      {"environment", s.environment},
      {"methods", s.methods},
      {"behavior_spaces", s.behavior_spaces},
      {"seeds", s.seeds},
      {"master_seed", s.master_seed},
      {"output_dir", s.output_dir},
      {"workers", s.workers},
      {"campaign",
       {{"budget", c.budget},
        {"init_budget", c.init_budget},
        {"grid_resolution", c.grid_resolution},
        {"sim_seed", c.sim_seed},
        {"novelty_search",
         {{"population", c.ns_population},
          {"iterations", c.ns_iterations},
          {"threshold", detail::real_or_text(s.novelty_threshold)},
          {"k", c.ns_k},
          {"tournament", c.ns_tournament}}},
        {"mdpfuzz",
         {{"components", f.components},
          {"em_iterations", f.em_iterations},
          {"refit_period", f.refit_period},
          {"freshness_quantile", f.freshness_quantile},
          {"freshness_threshold", detail::real_or_text(f.freshness_threshold)},
          {"max_pool", f.max_pool}}}}},
      {"mutation", {{"lander_sigma", s.env.lander_sigma}, {"walker_geometric_p", s.env.walker_geometric_p}}},
      {"max_steps", s.env.max_steps},
      {"policy",
       {{"qtable", s.policy.qtable},
        {"training",
         {{"alpha", t.alpha},
          {"gamma", t.gamma},
          {"epsilon_start", t.epsilon_start},
          {"epsilon_end", t.epsilon_end},
          {"decay_fraction", t.decay_fraction},
          {"episodes", t.episodes},
          {"seed", t.seed},
          {"max_episode_steps", t.max_episode_steps},
          {"gate_instances", t.gate_instances},
          {"gate_solve_rate", t.gate_solve_rate},
          {"gate_seed", t.gate_seed},
          {"retries", t.retries}}}}},
  };
}

/// Applies `j` on top of `base`. Unknown keys are errors.
inline ExperimentSpec spec_from_json(const Json& j, ExperimentSpec s = {}) {
  using detail::take;
  detail::reject_unknown(j,
                         {"preset", "environment", "methods", "behavior_spaces", "seeds", "master_seed", "output_dir",
                          "workers", "campaign", "mutation", "max_steps", "policy"},
                         "");
  take(j, "environment", s.environment);
  take(j, "methods", s.methods);
  take(j, "behavior_spaces", s.behavior_spaces);
  take(j, "seeds", s.seeds);
  take(j, "master_seed", s.master_seed);
  take(j, "output_dir", s.output_dir);
  take(j, "workers", s.workers);
  take(j, "max_steps", s.env.max_steps);
  if (j.contains("campaign")) {
    const Json& c = j.at("campaign");
    detail::reject_unknown(c, {"budget", "init_budget", "grid_resolution", "sim_seed", "novelty_search", "mdpfuzz"},
                           "campaign.");
    take(c, "budget", s.campaign.budget);
    take(c, "init_budget", s.campaign.init_budget);
    take(c, "grid_resolution", s.campaign.grid_resolution);
    take(c, "sim_seed", s.campaign.sim_seed);
    if (c.contains("novelty_search")) {
      const Json& n = c.at("novelty_search");
      detail::reject_unknown(n, {"population", "iterations", "threshold", "k", "tournament"}, "campaign.novelty_search.");
      take(n, "population", s.campaign.ns_population);
      take(n, "iterations", s.campaign.ns_iterations);
      take(n, "k", s.campaign.ns_k);
      take(n, "tournament", s.campaign.ns_tournament);
      s.novelty_threshold = detail::optional_real(n, "threshold", s.novelty_threshold);
    }
    if (c.contains("mdpfuzz")) {
      const Json& f = c.at("mdpfuzz");
      detail::reject_unknown(
          f, {"components", "em_iterations", "refit_period", "freshness_quantile", "freshness_threshold", "max_pool"},
          "campaign.mdpfuzz.");
      auto& m = s.campaign.mdpfuzz;
      take(f, "components", m.components);
      take(f, "em_iterations", m.em_iterations);
      take(f, "refit_period", m.refit_period);
      take(f, "freshness_quantile", m.freshness_quantile);
      take(f, "max_pool", m.max_pool);
      m.freshness_threshold = detail::optional_real(f, "freshness_threshold", m.freshness_threshold);
    }
  }
  if (j.contains("mutation")) {
    const Json& m = j.at("mutation");
    detail::reject_unknown(m, {"lander_sigma", "walker_geometric_p"}, "mutation.");
    take(m, "lander_sigma", s.env.lander_sigma);
    take(m, "walker_geometric_p", s.env.walker_geometric_p);
  }
  if (j.contains("policy")) {
    const Json& p = j.at("policy");
    detail::reject_unknown(p, {"qtable", "training"}, "policy.");
    take(p, "qtable", s.policy.qtable);
    if (p.contains("training")) {
      const Json& t = p.at("training");
      detail::reject_unknown(t,
                             {"alpha", "gamma", "epsilon_start", "epsilon_end", "decay_fraction", "episodes", "seed",
                              "max_episode_steps", "gate_instances", "gate_solve_rate", "gate_seed", "retries"},
                             "policy.training.");
      auto& q = s.policy.training;
      take(t, "alpha", q.alpha);
      take(t, "gamma", q.gamma);
      take(t, "epsilon_start", q.epsilon_start);
      take(t, "epsilon_end", q.epsilon_end);
      take(t, "decay_fraction", q.decay_fraction);
      take(t, "episodes", q.episodes);
      take(t, "seed", q.seed);
      take(t, "max_episode_steps", q.max_episode_steps);
      take(t, "gate_instances", q.gate_instances);
      take(t, "gate_solve_rate", q.gate_solve_rate);
      take(t, "gate_seed", q.gate_seed);
      take(t, "retries", q.retries);
    }
  }
  return s;
}

/// Full scale ("paper" preset): N=5000, N_init=1000, NS 100 x 50, seeds 0..9.
inline ExperimentSpec paper_preset() { return ExperimentSpec{}; }

/// Desk scale: N=500, N_init=100, NS 50 x 10, seeds 0..4, GMM refit every 100.
inline ExperimentSpec desk_preset() {
  ExperimentSpec s;
  s.seeds = {0, 1, 2, 3, 4};
  s.campaign.budget = 500;
  s.campaign.init_budget = 100;
  s.campaign.ns_population = 50;
  s.campaign.ns_iterations = 10;
  s.campaign.mdpfuzz.refit_period = 100;
  return s;
}

inline ExperimentSpec preset(std::string_view name) {
  if (name == "paper") return paper_preset();
  if (name == "desk") return desk_preset();
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected desk or paper)");
}

/// Name-level checks that need no environment instance.
inline void validate_spec_shape(const ExperimentSpec& s) {
  if (std::find(kEnvironments.begin(), kEnvironments.end(), s.environment) == kEnvironments.end()) {
    throw ConfigError("unknown environment '" + s.environment + "'");
  }
  if (s.methods.empty()) throw ConfigError("method list is empty");
  std::set<std::string> methods;
  for (const auto& m : s.methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) throw ConfigError("unknown method '" + m + "'");
    if (!methods.insert(m).second) throw ConfigError("duplicate method '" + m + "'");
  }
  if (s.seeds.empty()) throw ConfigError("seed list is empty");
  if (std::set<std::uint64_t>(s.seeds.begin(), s.seeds.end()).size() != s.seeds.size()) {
    throw ConfigError("seed list contains duplicates");
  }
  if (std::set<std::string>(s.behavior_spaces.begin(), s.behavior_spaces.end()).size() != s.behavior_spaces.size()) {
    throw ConfigError("behavior space list contains duplicates");
  }
  if (s.workers <= 0) throw ConfigError("workers must be positive");
  if (s.env.max_steps < 0) throw ConfigError("max_steps must be non-negative");
  if (!(s.env.walker_geometric_p > 0.0 && s.env.walker_geometric_p <= 1.0)) {
    throw ConfigError("walker_geometric_p must lie in (0, 1]");
  }
  if (!(s.env.lander_sigma >= 0.0)) throw ConfigError("lander_sigma must be non-negative");
  const CampaignConfig c = s.resolved_campaign();
  if (methods.count("novelty-search")) c.validate_novelty();
  else c.validate();
  const auto& f = c.mdpfuzz;
  if (f.components <= 0 || f.refit_period <= 0 || f.em_iterations < 0) throw ConfigError("mdpfuzz: invalid GMM settings");
  if (!(f.freshness_quantile >= 0.0 && f.freshness_quantile <= 1.0)) throw ConfigError("mdpfuzz: quantile outside [0, 1]");
  if (s.environment == "taxi") {
    try {
      s.policy.training.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
  }
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

/// Resolves a config: preset (flag wins over the file's "preset" key, which
/// wins over the "paper" preset), then the file's own keys on top.
inline ExperimentSpec load_spec(const std::optional<std::filesystem::path>& path,
                                const std::optional<std::string>& preset_flag) {
  Json j = path ? read_json_file(*path) : Json::object();
  std::string base = "paper";
  if (j.contains("preset")) base = j.at("preset").get<std::string>();
  if (preset_flag) base = *preset_flag;
  return spec_from_json(j, preset(base));
}

}  // namespace qdpt::harness
