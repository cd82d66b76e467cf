#pragma once

#include "qdpt/core/episode.hpp"
#include "qdpt/envs/lander.hpp"
#include "qdpt/envs/taxi.hpp"
#include "qdpt/envs/walker.hpp"
#include "qdpt/policies/lander_heuristic.hpp"
#include "qdpt/policies/q_learning.hpp"
#include "qdpt/policies/walker_heuristic.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace testing_support {

/// Emits the same action whatever it observes.
class ConstantPolicy final : public qdpt::Policy {
 public:
  explicit ConstantPolicy(qdpt::Action a) : a_(std::move(a)) {}
  qdpt::Action act(std::span<const double>) const override { return a_; }

 private:
  qdpt::Action a_;
};

/// Default-parameter Q-table, trained once per test binary.
inline std::shared_ptr<const qdpt::taxi::QTable> trained_table() {
  static const auto table = [] {
    const qdpt::taxi::TaxiWorld world;
    return std::make_shared<const qdpt::taxi::QTable>(qdpt::taxi::train_q_learning(world, {}));
  }();
  return table;
}

inline std::shared_ptr<const qdpt::taxi::QTablePolicy> taxi_policy() {
  static const auto policy = std::make_shared<const qdpt::taxi::QTablePolicy>(
      trained_table(), std::make_shared<const qdpt::taxi::TaxiMap>(qdpt::taxi::TaxiMap::default_map()));
  return policy;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("qdpt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
