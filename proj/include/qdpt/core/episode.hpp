#pragma once

#include "qdpt/core/mdp.hpp"

#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace qdpt {

namespace detail {

inline void check_action(const ActionSpace& space, const Action& action) {
  if (space.discrete) {
    if (action.size() != 1 || action[0] != std::floor(action[0]) || action[0] < 0 || action[0] >= space.count) {
      throw ContractViolation("policy emitted an action outside the discrete action space");
    }
    return;
  }
  if (action.size() != space.dim) throw ContractViolation("policy emitted an action of the wrong dimension");
  for (std::size_t i = 0; i < space.dim; ++i) {
    if (!(action[i] >= space.lower[i] && action[i] <= space.upper[i])) {
      throw ContractViolation("policy emitted an out-of-range continuous action");
    }
  }
}

}  // namespace detail

/// Rolls the policy out from the initial situation encoded by `input`.
inline Trajectory run_episode(Mdp& mdp, const Policy& policy, const SolutionInput& input, std::uint64_t seed = 0) {
  mdp.validate_input(input);
  Trajectory traj;
  traj.states.push_back(mdp.reset(input, seed));
  const ActionSpace& aspace = mdp.action_space();
  for (int t = 0; t < mdp.max_steps(); ++t) {
    Action action = policy.act(traj.states.back());
    detail::check_action(aspace, action);
    StepOutcome out = mdp.step(action);
    traj.actions.push_back(std::move(action));
    traj.rewards.push_back(out.reward);
    traj.states.push_back(std::move(out.observation));
    if (out.terminal) {
      traj.terminated_by = out.fault ? Termination::fault : Termination::goal;
      return traj;
    }
  }
  traj.terminated_by = Termination::step_limit;
  return traj;
}

/// R = sum_t gamma^(t-1) r_t. gamma = 1 gives the plain sum used as fitness.
inline double discounted_return(const Trajectory& trajectory, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("discount factor must lie in (0, 1]");
  double total = 0.0;
  double weight = 1.0;
  for (double r : trajectory.rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

inline EvalResult evaluate_trajectory(const Mdp& mdp, const Trajectory& traj, const BehaviorSpace& space,
                                      const SolutionInput& input) {
  EvalResult r;
  r.behavior = mdp.extract_behavior(space, traj);
  r.fitness = discounted_return(traj, 1.0);
  r.oracle = traj.terminated_by == Termination::fault;
  r.final_state = traj.final_state();
  r.input = input;
  return r;
}

/// Behavior, fitness (undiscounted return) and fault verdict of one input.
inline EvalResult evaluate(Mdp& mdp, const Policy& policy, const SolutionInput& input, const BehaviorSpace& space,
                           std::uint64_t seed = 0) {
  return evaluate_trajectory(mdp, run_episode(mdp, policy, input, seed), space, input);
}

// Trajectory text format, one step per line:
//
//   # qdpt-trajectory v1 <termination>
//   step <s_0 ...> ; <a ...> ; <r>
//   ...
//   final <s_T ...>

namespace detail {

inline void write_values(std::ostream& os, const std::vector<double>& v) {
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    if (i) os << ' ';
    os << buf;
  }
}

inline std::vector<double> read_values(const std::string& text) {
  std::istringstream is(text);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(std::stod(tok));
  return out;
}

}  // namespace detail

inline void write_trajectory(std::ostream& os, const Trajectory& traj) {
  os << "# qdpt-trajectory v1 " << to_string(traj.terminated_by) << '\n';
  for (std::size_t t = 0; t < traj.actions.size(); ++t) {
    os << "step ";
    detail::write_values(os, traj.states[t]);
    os << " ; ";
    detail::write_values(os, traj.actions[t]);
    os << " ; ";
    detail::write_values(os, {traj.rewards[t]});
    os << '\n';
  }
  os << "final ";
  detail::write_values(os, traj.final_state());
  os << '\n';
}

inline Trajectory read_trajectory(std::istream& is) {
  Trajectory traj;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# qdpt-trajectory v1 ", 0) != 0) {
    throw std::runtime_error("trajectory: missing header");
  }
  const std::string term = line.substr(21);
  if (term == "goal") traj.terminated_by = Termination::goal;
  else if (term == "fault") traj.terminated_by = Termination::fault;
  else if (term == "step-limit") traj.terminated_by = Termination::step_limit;
  else throw std::runtime_error("trajectory: unknown termination '" + term + "'");

  while (std::getline(is, line)) {
    if (line.rfind("step ", 0) == 0) {
      const auto a = line.find(" ; ");
      const auto b = line.find(" ; ", a + 3);
      if (a == std::string::npos || b == std::string::npos) throw std::runtime_error("trajectory: malformed step");
      traj.states.push_back(detail::read_values(line.substr(5, a - 5)));
      traj.actions.push_back(detail::read_values(line.substr(a + 3, b - a - 3)));
      traj.rewards.push_back(std::stod(line.substr(b + 3)));
    } else if (line.rfind("final ", 0) == 0) {
      traj.states.push_back(detail::read_values(line.substr(6)));
      return traj;
    }
  }
  throw std::runtime_error("trajectory: missing final state");
}

}  // namespace qdpt
