#pragma once

#include "qdpt/core/episode.hpp"
#include "qdpt/envs/taxi.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace qdpt::taxi {

struct QLearningParams {
  double alpha = 0.1;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double decay_fraction = 0.8;  // share of episodes over which epsilon decays linearly
  long episodes = 200000;
  std::uint64_t seed = 0;
  int max_episode_steps = 400;
  // Acceptance gate on the greedy policy.
  int gate_instances = 1000;
  double gate_solve_rate = 0.9;
  std::uint64_t gate_seed = 0x5eed;
  int retries = 2;  // each retry doubles the episode count

  double epsilon_at(long episode) const {
    const double horizon = decay_fraction * double(episodes);
    if (horizon <= 0.0 || double(episode) >= horizon) return epsilon_end;
    return epsilon_start + (epsilon_end - epsilon_start) * (double(episode) / horizon);
  }

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("q-learning: alpha must lie in (0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("q-learning: gamma must lie in (0, 1]");
    if (episodes <= 0 || max_episode_steps <= 0) throw ParameterError("q-learning: episode counts must be positive");
    if (!(epsilon_start >= epsilon_end && epsilon_end >= 0.0 && epsilon_start <= 1.0)) {
      throw ParameterError("q-learning: epsilon schedule must be non-increasing within [0, 1]");
    }
    if (!(decay_fraction >= 0.0 && decay_fraction <= 1.0)) throw ParameterError("q-learning: decay fraction outside [0, 1]");
  }

  bool operator==(const QLearningParams&) const = default;
};

/// Watkins update Q <- Q + alpha (r + gamma max_a' Q(s', a') - Q).
inline double q_update(double q, double reward, double max_next, double alpha, double gamma) {
  return q + alpha * (reward + gamma * max_next - q);
}

class QTable {
 public:
  QTable() = default;
  QTable(std::uint64_t map_hash, std::size_t states) : map_hash_(map_hash), values_(states * kActionCount, 0.0) {}

  std::size_t state_count() const { return values_.size() / kActionCount; }
  std::uint64_t map_hash() const { return map_hash_; }

  double& at(std::size_t state, int action) { return values_[state * kActionCount + std::size_t(action)]; }
  double at(std::size_t state, int action) const { return values_[state * kActionCount + std::size_t(action)]; }

  /// Lowest index wins ties.
  int greedy(std::size_t state) const {
    int best = 0;
    for (int a = 1; a < kActionCount; ++a) {
      if (at(state, a) > at(state, best)) best = a;
    }
    return best;
  }

  double max_value(std::size_t state) const { return at(state, greedy(state)); }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool operator==(const QTable&) const = default;

  // Provenance echoed into the file header.
  QLearningParams params;
  double solve_rate = 0.0;

 private:
  std::uint64_t map_hash_ = 0;
  std::vector<double> values_;
};

class QTablePolicy final : public Policy {
 public:
  QTablePolicy(std::shared_ptr<const QTable> table, std::shared_ptr<const TaxiMap> map)
      : table_(std::move(table)), map_(std::move(map)) {
    if (table_->map_hash() != map_->hash()) throw ConfigError("q-table was trained on a different taxi map");
    if (table_->state_count() != state_count(*map_)) throw ConfigError("q-table state count does not match the map");
  }

  Action act(std::span<const double> obs) const override {
    return {double(table_->greedy(state_index(*map_, state_from_observation(obs))))};
  }

  const QTable& table() const { return *table_; }

 private:
  std::shared_ptr<const QTable> table_;
  std::shared_ptr<const TaxiMap> map_;
};

/// Share of `instances` random valid inputs on which the greedy policy delivers.
inline double greedy_solve_rate(const TaxiWorld& world, const Policy& policy, int instances, std::uint64_t seed) {
  TaxiWorld env = world;
  Rng rng(seed);
  int solved = 0;
  for (int i = 0; i < instances; ++i) {
    const Trajectory t = run_episode(env, policy, env.sample_input(rng));
    if (t.terminated_by == Termination::goal) ++solved;
  }
  return double(solved) / double(instances);
}

namespace detail {

inline void train_episodes(const TaxiWorld& world, const QLearningParams& p, QTable& q) {
  const TaxiMap& map = world.map();
  Rng rng(p.seed);
  for (long ep = 0; ep < p.episodes; ++ep) {
    const double eps = p.epsilon_at(ep);
    const SolutionInput start = world.sample_input(rng);
    TaxiState s{int(start.values[0]), int(start.values[1]), int(start.values[2]), int(start.values[3])};
    std::size_t si = state_index(map, s);
    for (int t = 0; t < p.max_episode_steps; ++t) {
      int a = 0;
      if (uniform_real(rng, 0.0, 1.0) < eps) a = int(uniform_int(rng, 0, kActionCount - 1));
      else a = q.greedy(si);
      TaxiStep step = taxi_step(map, s, a);
      // Classic training dynamics: bumping a wall is a wasted step and an
      // illegal pickup/dropoff costs the fault penalty; neither ends the
      // episode. Under the testing semantics a long delivery is worth less than
      // an immediate -10 crash, so training on those would teach the taxi to crash.
      if (step.fault) {
        step.state = s;
        step.terminal = false;
        if (a < pickup) step.reward = kStepReward;
      }
      const std::size_t ni = state_index(map, step.state);
      const double next = step.terminal ? 0.0 : q.max_value(ni);
      q.at(si, a) = q_update(q.at(si, a), step.reward, next, p.alpha, p.gamma);
      if (step.terminal) break;
      s = step.state;
      si = ni;
    }
  }
}

}  // namespace detail

/// Tabular Q-learning with a solve-rate gate. A table failing the gate is
/// retrained from scratch with twice the episodes, up to `retries` times.
inline QTable train_q_learning(const TaxiWorld& world, QLearningParams params) {
  params.validate();
  for (int attempt = 0; attempt <= params.retries; ++attempt) {
    QTable q(world.map().hash(), state_count(world.map()));
    detail::train_episodes(world, params, q);
    q.params = params;
    auto shared = std::make_shared<const QTable>(q);
    const QTablePolicy policy(shared, world.shared_map());
    q.solve_rate = greedy_solve_rate(world, policy, params.gate_instances, params.gate_seed);
    if (q.solve_rate >= params.gate_solve_rate) return q;
    params.episodes *= 2;
  }
  throw TrainingFailure("q-learning: greedy policy missed the solve-rate gate after all retries");
}

// Text persistence. Values are written with 17 significant digits so a reload
// reproduces the table bit for bit.

inline void save_qtable(std::ostream& os, const QTable& q) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(q.map_hash()));
  const auto& p = q.params;
  os << "qdpt-qtable v1\n";
  os << "map_hash " << buf << '\n';
  os << "states " << q.state_count() << '\n';
  os << "actions " << kActionCount << '\n';
  std::snprintf(buf, sizeof buf, "%.17g %.17g", p.alpha, p.gamma);
  os << "alpha_gamma " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", p.epsilon_start, p.epsilon_end, p.decay_fraction);
  os << "epsilon " << buf << '\n';
  os << "episodes " << p.episodes << '\n';
  os << "seed " << p.seed << '\n';
  os << "max_episode_steps " << p.max_episode_steps << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", q.solve_rate);
  os << "solve_rate " << buf << '\n';
  os << "values\n";
  for (std::size_t s = 0; s < q.state_count(); ++s) {
    for (int a = 0; a < kActionCount; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", q.at(s, a));
      os << (a ? " " : "") << buf;
    }
    os << '\n';
  }
}

inline QTable load_qtable(std::istream& is, const TaxiMap& map) {
  auto fail = [](const std::string& what) -> QTable { throw ConfigError("q-table: " + what); };
  std::string line;
  if (!std::getline(is, line) || line != "qdpt-qtable v1") return fail("unsupported header");
  std::uint64_t hash = 0;
  std::size_t states = 0;
  QLearningParams p;
  double solve_rate = 0.0;
  while (std::getline(is, line) && line != "values") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "map_hash") {
      std::string hex;
      ls >> hex;
      hash = std::stoull(hex, nullptr, 16);
    } else if (key == "states") {
      ls >> states;
    } else if (key == "actions") {
      int n = 0;
      ls >> n;
      if (n != kActionCount) return fail("action count mismatch");
    } else if (key == "alpha_gamma") {
      ls >> p.alpha >> p.gamma;
    } else if (key == "epsilon") {
      ls >> p.epsilon_start >> p.epsilon_end >> p.decay_fraction;
    } else if (key == "episodes") {
      ls >> p.episodes;
    } else if (key == "seed") {
      ls >> p.seed;
    } else if (key == "max_episode_steps") {
      ls >> p.max_episode_steps;
    } else if (key == "solve_rate") {
      ls >> solve_rate;
    } else {
      return fail("unknown header key '" + key + "'");
    }
  }
  if (line != "values") return fail("missing values section");
  if (hash != map.hash()) return fail("map hash does not match the current taxi map");
  if (states != state_count(map)) return fail("state count does not match the current taxi map");
  QTable q(hash, states);
  for (double& v : q.values()) {
    std::string tok;
    if (!(is >> tok)) return fail("truncated values");
    v = std::stod(tok);
  }
  q.params = p;
  q.solve_rate = solve_rate;
  return q;
}

inline void save_qtable(const std::string& path, const QTable& q) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write q-table to " + path);
  save_qtable(os, q);
}

inline QTable load_qtable(const std::string& path, const TaxiMap& map) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read q-table from " + path);
  return load_qtable(is, map);
}

}  // namespace qdpt::taxi
