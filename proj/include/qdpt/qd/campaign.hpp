#pragma once

#include "qdpt/core/episode.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qdpt {

struct MdpFuzzParams {
  int components = 10;
  int em_iterations = 50;
  int refit_period = 500;
  double freshness_quantile = 0.1;
  /// When set, replaces the quantile-derived threshold (may be -inf).
  std::optional<double> freshness_threshold;
  /// 0 = unbounded pool.
  std::size_t max_pool = 0;
};

/// Budget and optimizer knobs of one test campaign.
struct CampaignConfig {
  int budget = 5000;
  int init_budget = 1000;
  int ns_population = 100;
  int ns_iterations = 50;
  double ns_threshold = 0.9;
  int ns_k = 3;
  int ns_tournament = 2;
  int grid_resolution = 50;
  std::uint64_t sim_seed = 0;
  MdpFuzzParams mdpfuzz;

  void validate() const {
    if (budget < 0) throw ConfigError("budget must be non-negative");
    if (init_budget < 0 || init_budget > budget) throw ConfigError("init_budget must lie in [0, budget]");
    if (grid_resolution <= 0) throw ConfigError("grid_resolution must be positive");
    if (ns_k <= 0) throw ConfigError("novelty k must be positive");
    if (ns_tournament <= 0) throw ConfigError("tournament size must be positive");
    if (std::isnan(ns_threshold)) throw ConfigError("novelty threshold is NaN");
  }

  /// Novelty search additionally needs population x iterations = budget.
  void validate_novelty() const {
    validate();
    if (ns_population <= 0 || ns_iterations < 0) throw ConfigError("novelty search population must be positive");
    if (static_cast<long>(ns_population) * ns_iterations != budget) {
      throw ConfigError("novelty search population x iterations must equal the budget");
    }
  }
};

/// Two independent streams. `init` drives uniform initial sampling only, so
/// campaigns that differ just in their behavior space share the same initial
/// inputs; `search` drives selection and variation.
struct CampaignRng {
  Rng init;
  Rng search;

  CampaignRng(std::uint64_t init_seed, std::uint64_t search_seed) : init(init_seed), search(search_seed) {}
  explicit CampaignRng(std::uint64_t seed) : init(mix64(seed)), search(mix64(seed ^ 0xa5a5a5a5a5a5a5a5ULL)) {}
};

namespace detail {

inline std::uint64_t hash_field(std::uint64_t h, std::string_view field) {
  // A separator byte keeps ("ab", "c") and ("a", "bc") apart.
  return fnv1a64("\x1f", fnv1a64(field, h));
}

inline std::uint64_t hash_field(std::uint64_t h, std::uint64_t v) {
  char buf[24];
  const int n = std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(v));
  return hash_field(h, std::string_view(buf, static_cast<std::size_t>(n)));
}

}  // namespace detail

/// Stable campaign stream derivation: FNV-1a 64 over the decimal master seed,
/// method name and seed index (plus the behavior space name for the search
/// stream), finished with SplitMix64. The init stream ignores the behavior
/// space, so sweeps over spaces replay the same initial inputs.
inline CampaignRng derive_campaign_rng(std::uint64_t master, std::string_view method, std::uint64_t seed_index,
                                       std::string_view behavior_space) {
  std::uint64_t h = detail::hash_field(0xcbf29ce484222325ULL, master);
  h = detail::hash_field(h, method);
  h = detail::hash_field(h, seed_index);
  const std::uint64_t init = mix64(detail::hash_field(h, "init"));
  const std::uint64_t search = mix64(detail::hash_field(detail::hash_field(h, behavior_space), "search"));
  return CampaignRng(init, search);
}

struct EvalRecord {
  std::size_t index = 0;  // 1-based
  SolutionInput input;
  Behavior behavior{};
  double fitness = 0.0;
  bool oracle = false;
  Observation final_state;
};

struct CampaignLog {
  std::string method;
  std::uint64_t seed = 0;
  std::string env;
  std::string behavior_space;
  std::vector<EvalRecord> records;

  std::size_t size() const { return records.size(); }

  const EvalRecord& append(const EvalResult& r) {
    EvalRecord rec;
    rec.index = records.size() + 1;
    rec.input = r.input;
    rec.behavior = r.behavior;
    rec.fitness = r.fitness;
    rec.oracle = r.oracle;
    rec.final_state = r.final_state;
    records.push_back(std::move(rec));
    return records.back();
  }
};

/// Evaluates inputs on a private environment instance.
class Evaluator {
 public:
  Evaluator(const Mdp& mdp, const Policy& policy, BehaviorSpace space, std::uint64_t sim_seed = 0)
      : mdp_(mdp.clone()), policy_(&policy), space_(std::move(space)), seed_(sim_seed) {}

  EvalResult operator()(const SolutionInput& input) { return evaluate(*mdp_, *policy_, input, space_, seed_); }

  const Mdp& mdp() const { return *mdp_; }
  const BehaviorSpace& space() const { return space_; }

 private:
  std::unique_ptr<Mdp> mdp_;
  const Policy* policy_;
  BehaviorSpace space_;
  std::uint64_t seed_;
};

/// Fault records of a log, deduplicated by exact input, in discovery order.
inline std::vector<EvalRecord> faults_from_log(const CampaignLog& log) {
  std::vector<EvalRecord> out;
  std::set<std::vector<double>> seen;
  for (const auto& r : log.records) {
    if (r.oracle && seen.insert(r.input.values).second) out.push_back(r);
  }
  return out;
}

// CSV: index, method, seed, input_*, behavior_0, behavior_1, fitness, oracle,
// final_state_*. Reals use "%.8e" (9 significant digits) so files compare
// byte for byte across platforms.

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

inline void write_log_csv(std::ostream& os, const CampaignLog& log) {
  const std::size_t nin = log.records.empty() ? 0 : log.records.front().input.values.size();
  const std::size_t nfs = log.records.empty() ? 0 : log.records.front().final_state.size();
  os << "index,method,seed";
  for (std::size_t i = 0; i < nin; ++i) os << ",input_" << i;
  os << ",behavior_0,behavior_1,fitness,oracle";
  for (std::size_t i = 0; i < nfs; ++i) os << ",final_state_" << i;
  os << '\n';
  for (const auto& r : log.records) {
    os << r.index << ',' << log.method << ',' << log.seed;
    for (double v : r.input.values) os << ',' << format_real(v);
    os << ',' << format_real(r.behavior[0]) << ',' << format_real(r.behavior[1]) << ',' << format_real(r.fitness) << ','
       << (r.oracle ? 1 : 0);
    for (double v : r.final_state) os << ',' << format_real(v);
    os << '\n';
  }
}

inline CampaignLog read_log_csv(std::istream& is, const std::string& env = {}, const std::string& space = {}) {
  CampaignLog log;
  log.env = env;
  log.behavior_space = space;
  std::string line;
  if (!std::getline(is, line)) return log;
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::size_t nin = 0;
  std::size_t nfs = 0;
  for (const auto& h : header) {
    if (h.rfind("input_", 0) == 0) ++nin;
    if (h.rfind("final_state_", 0) == 0) ++nfs;
  }
  if (header.size() != 3 + nin + 4 + nfs) throw std::runtime_error("campaign log: unexpected header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw std::runtime_error("campaign log: ragged row");
    EvalRecord r;
    std::size_t c = 0;
    r.index = std::stoul(cells[c++]);
    log.method = cells[c++];
    log.seed = std::stoull(cells[c++]);
    r.input.env = env;
    for (std::size_t i = 0; i < nin; ++i) r.input.values.push_back(std::stod(cells[c++]));
    r.behavior[0] = std::stod(cells[c++]);
    r.behavior[1] = std::stod(cells[c++]);
    r.fitness = std::stod(cells[c++]);
    r.oracle = cells[c++] == "1";
    for (std::size_t i = 0; i < nfs; ++i) r.final_state.push_back(std::stod(cells[c++]));
    log.records.push_back(std::move(r));
  }
  return log;
}

}  // namespace qdpt
