#include "oracles/brute_force.hpp"
#include "support.hpp"

#include "qdpt/baselines/mdpfuzz.hpp"
#include "qdpt/baselines/random_testing.hpp"
#include "qdpt/qd/map_elites.hpp"
#include "qdpt/qd/novelty_search.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

using namespace qdpt;
using testing_support::ConstantPolicy;

namespace {

const BehaviorSpace kUnit{"unit", {-1.0, -1.0}, {1.0, 1.0}, "unit"};

CampaignConfig small_config(int budget, int init, int pop = 10) {
  CampaignConfig c;
  c.budget = budget;
  c.init_budget = init;
  c.ns_population = pop;
  c.ns_iterations = pop ? budget / pop : 0;
  c.mdpfuzz.refit_period = 50;
  c.mdpfuzz.components = 4;
  c.mdpfuzz.em_iterations = 10;
  return c;
}

/// Re-evaluates every logged input on a fresh environment.
void expect_replay(const Mdp& mdp, const Policy& policy, const BehaviorSpace& space, const CampaignLog& log) {
  auto env = mdp.clone();
  for (const auto& r : log.records) {
    const EvalResult e = evaluate(*env, policy, r.input, space);
    ASSERT_EQ(e.behavior, r.behavior) << r.index;
    ASSERT_NEAR(e.fitness, r.fitness, 1e-9) << r.index;
    ASSERT_EQ(e.oracle, r.oracle) << r.index;
    ASSERT_EQ(e.final_state, r.final_state) << r.index;
  }
}

void expect_dense(const CampaignLog& log, std::size_t n) {
  ASSERT_EQ(log.size(), n);
  for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(log.records[i].index, i + 1);
}

int hamming(const SolutionInput& a, const SolutionInput& b) {
  int n = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) n += a.values[i] != b.values[i];
  return n;
}

}  // namespace

// ---------------------------------------------------------------- grid archive

TEST(BinIndex, Examples) {
  EXPECT_EQ(bin_index(kUnit, 50, {0.0, 0.0}), (BinIndex{25, 25}));
  EXPECT_EQ(bin_index(kUnit, 50, {1.0, 1.0}), (BinIndex{49, 49}));
  EXPECT_EQ(bin_index(kUnit, 50, {-3.0, 0.0}).first, 0);
  EXPECT_EQ(bin_index(kUnit, 50, {-1.0, 5.0}), (BinIndex{0, 49}));
  EXPECT_EQ(bin_index(kUnit, 50, {std::nan(""), 0.0}).first, 0);
}

TEST(BinIndex, IntegerBehaviorsOnTaxiBinEdges) {
  const BehaviorSpace taxi_space{"pd", {0, 0}, {400, 400}, "pd"};
  for (int v = 0; v <= 400; ++v) {
    const auto b = bin_index(taxi_space, 50, {double(v), double(v)});
    ASSERT_EQ(b.first, std::min(v / 8, 49)) << v;
  }
}

TEST(BinIndex, MatchesLinearScanOracle) {
  Rng rng(1);
  for (int i = 0; i < 20000; ++i) {
    const Behavior b{uniform_real(rng, -1.2, 1.2), uniform_real(rng, -1.2, 1.2)};
    const int res = int(uniform_int(rng, 1, 60));
    ASSERT_EQ(bin_index(kUnit, res, b), oracle::bin(kUnit, res, b)) << b[0] << "," << b[1] << " res " << res;
  }
}

TEST(GridArchive, AddStatuses) {
  GridArchive a(kUnit, 50);
  const SolutionInput x{{1.0}, "t"};
  EXPECT_EQ(a.attempt_to_add(x, {0.1, 0.1}, 10.0, false, 1), AddStatus::inserted_new);
  EXPECT_EQ(a.attempt_to_add(x, {0.1, 0.1}, 5.0, true, 2), AddStatus::replaced_elite);
  EXPECT_EQ(a.attempt_to_add(x, {0.1, 0.1}, 5.0, false, 3), AddStatus::rejected);
  EXPECT_EQ(a.attempt_to_add(x, {0.1, 0.1}, 7.0, false, 4), AddStatus::rejected);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a.elite(0).discovery, 2u);
  EXPECT_TRUE(a.elite(0).oracle);
  EXPECT_EQ(a.attempt_to_add(x, {-0.9, 0.9}, 0.0, false, 5), AddStatus::inserted_new);
  EXPECT_EQ(a.size(), 2u);
  EXPECT_TRUE(a.cell(a.bin_index({0.1, 0.1})).has_value());
  EXPECT_FALSE(a.cell({10, 10}).has_value());
}

TEST(GridArchive, StoresMinimumPerCell) {
  GridArchive a(kUnit, 5);
  Rng rng(2);
  std::map<BinIndex, double> best;
  for (std::size_t i = 1; i <= 5000; ++i) {
    const Behavior b{uniform_real(rng, -1, 1), uniform_real(rng, -1, 1)};
    const double f = std::round(uniform_real(rng, 0, 20));
    a.attempt_to_add({{double(i)}, "t"}, b, f, false, i);
    const auto bin = bin_index(kUnit, 5, b);
    if (!best.count(bin) || f < best[bin]) best[bin] = f;
  }
  ASSERT_EQ(a.size(), best.size());
  for (const auto& [bin, f] : best) EXPECT_EQ(a.cell(bin)->fitness, f);
}

// ---------------------------------------------------------------- novelty

TEST(NoveltyScore, Examples) {
  const std::vector<Behavior> refs{{0, 0}, {1, 0}, {0, 1}};
  EXPECT_DOUBLE_EQ(novelty_score({0, 0}, refs, 3, 0), 1.0);
  EXPECT_NEAR(novelty_score({2, 0}, refs, 3), (2.0 + 1.0 + std::sqrt(5.0)) / 3.0, 1e-15);
  EXPECT_EQ(novelty_score({2, 0}, {}, 3), std::numeric_limits<double>::infinity());
  EXPECT_EQ(novelty_score({0, 0}, std::vector<Behavior>{{0, 0}}, 3, 0), std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(novelty_score({0, 0}, std::vector<Behavior>{{3, 4}}, 3), 5.0);
}

TEST(NoveltyScore, MatchesBruteForce) {
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = std::size_t(uniform_int(rng, 0, 500));
    std::vector<Behavior> refs(n);
    for (auto& r : refs) r = {uniform_real(rng, -5, 5), uniform_real(rng, -5, 5)};
    const Behavior b{uniform_real(rng, -5, 5), uniform_real(rng, -5, 5)};
    const int k = int(uniform_int(rng, 1, 6));
    std::optional<std::size_t> self;
    if (n > 0 && uniform_int(rng, 0, 1)) self = uniform_index(rng, n);
    const double got = novelty_score(b, refs, k, self);
    const double want = oracle::novelty(b, refs, k, self);
    if (std::isinf(want)) ASSERT_TRUE(std::isinf(got));
    else ASSERT_NEAR(got, want, 1e-9);
  }
}

TEST(NoveltyArchive, StrictThreshold) {
  NoveltyArchive a(0.5);
  EXPECT_FALSE(a.admits(0.5));
  EXPECT_TRUE(a.admits(0.50001));
  a.append({1, 2}, 7);
  EXPECT_EQ(a.size(), 1u);
  EXPECT_EQ(a.sources().front(), 7u);
}

// ---------------------------------------------------------------- seeds

TEST(CampaignRng, DerivationIsStableAndKeyed) {
  auto draw = [](CampaignRng r) { return std::pair{r.init(), r.search()}; };
  const auto base = draw(derive_campaign_rng(0, "map-elites", 3, "a"));
  EXPECT_EQ(base, draw(derive_campaign_rng(0, "map-elites", 3, "a")));
  const auto other_space = draw(derive_campaign_rng(0, "map-elites", 3, "b"));
  EXPECT_EQ(base.first, other_space.first);
  EXPECT_NE(base.second, other_space.second);
  EXPECT_NE(base.first, draw(derive_campaign_rng(0, "random", 3, "a")).first);
  EXPECT_NE(base.first, draw(derive_campaign_rng(0, "map-elites", 4, "a")).first);
  EXPECT_NE(base.first, draw(derive_campaign_rng(1, "map-elites", 3, "a")).first);
  // Field separators keep concatenations apart.
  EXPECT_NE(draw(derive_campaign_rng(1, "1", 1, "x")).first, draw(derive_campaign_rng(11, "", 1, "x")).first);
}

TEST(CampaignRng, PinnedFirstDraw) {
  // Pins the hash chain so a refactor cannot silently change every campaign.
  CampaignRng r = derive_campaign_rng(0, "random", 0, "touchdown");
  std::uint64_t h = fnv1a64("\x1f", fnv1a64("0"));
  h = fnv1a64("\x1f", fnv1a64("random", h));
  h = fnv1a64("\x1f", fnv1a64("0", h));
  Rng expect(mix64(fnv1a64("\x1f", fnv1a64("init", h))));
  EXPECT_EQ(r.init(), expect());
}

// ---------------------------------------------------------------- config

TEST(CampaignConfig, Validation) {
  CampaignConfig c;
  EXPECT_NO_THROW(c.validate_novelty());
  c.init_budget = 6000;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.ns_iterations = 49;
  EXPECT_THROW(c.validate_novelty(), ConfigError);
  c = {};
  c.grid_resolution = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

// ---------------------------------------------------------------- map-elites

TEST(MapElites, ZeroBudget) {
  taxi::TaxiWorld world;
  CampaignRng rng(1);
  const auto r = map_elites_run(world, ConstantPolicy({0.0}), world.behavior_spaces()[0], small_config(0, 0), rng);
  EXPECT_TRUE(r.archive.empty());
  EXPECT_EQ(r.log.size(), 0u);
}

TEST(MapElites, InitOnlyBudgetMatchesRandomTesting) {
  lander::LanderWorld world;
  const lander::HeuristicLanderPolicy policy;
  const auto space = world.behavior_spaces()[0];
  CampaignRng a(5), b(5);
  const auto me = map_elites_run(world, policy, space, small_config(100, 100), a);
  const auto rt = random_testing_run(world, policy, space, small_config(100, 100), b);
  ASSERT_EQ(me.log.size(), 100u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(me.log.records[i].input, rt.records[i].input);
}

TEST(MapElites, TaxiReplayAndEliteDominance) {
  taxi::TaxiWorld world;
  const auto& policy = *testing_support::taxi_policy();
  const auto space = world.behavior_spaces()[0];
  CampaignRng rng = derive_campaign_rng(0, "map-elites", 0, space.name);
  const auto r = map_elites_run(world, policy, space, small_config(200, 50), rng);
  expect_dense(r.log, 200);
  expect_replay(world, policy, space, r.log);
  const auto cells = oracle::grid_minima(r.log, space, 50);
  ASSERT_EQ(cells.size(), r.archive.size());
  for (const auto& [bin, cell] : cells) {
    const auto& elite = r.archive.cell(bin);
    ASSERT_TRUE(elite.has_value());
    EXPECT_EQ(elite->fitness, cell.fitness);
    EXPECT_EQ(elite->discovery, cell.discovery);
  }
  // Every post-initialization input is a one-step mutation of an earlier input
  // (a shift clipped at the map edge leaves it unchanged).
  for (std::size_t i = 50; i < r.log.size(); ++i) {
    bool found = false;
    for (std::size_t j = 0; j < i && !found; ++j) found = hamming(r.log.records[i].input, r.log.records[j].input) <= 1;
    EXPECT_TRUE(found) << i;
  }
}

TEST(MapElites, SeedDeterminism) {
  walker::WalkerWorld world;
  const walker::HeuristicWalkerPolicy policy;
  const auto space = world.behavior_spaces()[0];
  auto run = [&] {
    CampaignRng rng = derive_campaign_rng(4, "map-elites", 1, space.name);
    std::ostringstream os;
    write_log_csv(os, map_elites_run(world, policy, space, small_config(120, 40), rng).log);
    return os.str();
  };
  EXPECT_EQ(run(), run());
}

TEST(MapElites, SharedInitPrefixAcrossBehaviorSpaces) {
  walker::WalkerWorld world;
  const walker::HeuristicWalkerPolicy policy;
  const auto spaces = world.behavior_spaces();
  std::vector<CampaignLog> logs;
  for (const auto& space : spaces) {
    CampaignRng rng = derive_campaign_rng(0, "map-elites", 2, space.name);
    logs.push_back(map_elites_run(world, policy, space, small_config(60, 30), rng).log);
  }
  for (std::size_t s = 1; s < logs.size(); ++s) {
    for (std::size_t i = 0; i < 30; ++i) ASSERT_EQ(logs[s].records[i].input, logs[0].records[i].input);
  }
}

// ---------------------------------------------------------------- novelty search

TEST(NoveltySearch, LanderReplayAndInsertionOracle) {
  lander::LanderWorld world;
  const lander::HeuristicLanderPolicy policy;
  const auto space = world.behavior_spaces()[0];
  CampaignConfig c = small_config(100, 0, 20);
  c.ns_iterations = 5;
  c.ns_threshold = 0.005;
  CampaignRng rng = derive_campaign_rng(0, "novelty-search", 0, space.name);
  const auto r = novelty_search_run(world, policy, space, c, rng);
  expect_dense(r.log, 100);
  expect_replay(world, policy, space, r.log);
  EXPECT_EQ(r.archive.sources(), oracle::novelty_insertions(r.log, 20, 0.005, 3));
}

TEST(NoveltySearch, InfiniteThresholdKeepsArchiveEmpty) {
  taxi::TaxiWorld world;
  CampaignConfig c;
  c.ns_threshold = std::numeric_limits<double>::infinity();
  CampaignRng rng(3);
  const auto r = novelty_search_run(world, ConstantPolicy({double(taxi::north)}), world.behavior_spaces()[0], c, rng);
  EXPECT_EQ(r.archive.size(), 0u);
  expect_dense(r.log, 5000);
}

TEST(NoveltySearch, ZeroThresholdAdmitsEveryDistinctBehavior) {
  lander::LanderWorld world;
  const lander::HeuristicLanderPolicy policy;
  CampaignConfig c = small_config(200, 0, 20);
  c.ns_threshold = 0.0;
  CampaignRng rng(4);
  const auto r = novelty_search_run(world, policy, world.behavior_spaces()[0], c, rng);
  std::set<Behavior> distinct;
  for (const auto& rec : r.log.records) distinct.insert(rec.behavior);
  ASSERT_EQ(distinct.size(), 200u);
  EXPECT_EQ(r.archive.size(), 200u);
}

TEST(NoveltySearch, OffspringDescendFromPreviousPopulation) {
  taxi::TaxiWorld world;
  const auto& policy = *testing_support::taxi_policy();
  CampaignConfig c = small_config(100, 0, 20);
  CampaignRng rng(5);
  const auto r = novelty_search_run(world, policy, world.behavior_spaces()[0], c, rng);
  for (std::size_t i = 20; i < 100; ++i) {
    const std::size_t start = (i / 20 - 1) * 20;
    bool found = false;
    for (std::size_t j = start; j < start + 20 && !found; ++j) found = hamming(r.log.records[i].input, r.log.records[j].input) <= 1;
    EXPECT_TRUE(found) << i;
  }
}

TEST(NoveltySearch, RejectsInconsistentBudget) {
  taxi::TaxiWorld world;
  CampaignConfig c = small_config(100, 0, 30);
  CampaignRng rng(1);
  EXPECT_THROW(novelty_search_run(world, ConstantPolicy({0.0}), world.behavior_spaces()[0], c, rng), ConfigError);
}

// ---------------------------------------------------------------- faults and logs

TEST(FaultsFromLog, Examples) {
  CampaignLog log;
  EXPECT_TRUE(faults_from_log(log).empty());
  auto add = [&](std::vector<double> in, bool fault) {
    EvalResult r;
    r.input = {std::move(in), "t"};
    r.oracle = fault;
    r.final_state = {0.0};
    log.append(r);
  };
  add({1}, false);
  add({2}, true);
  add({3}, true);
  EXPECT_EQ(faults_from_log(log).size(), 2u);
  add({2}, true);
  const auto f = faults_from_log(log);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].index, 2u);
  EXPECT_EQ(f[1].index, 3u);
}

TEST(CampaignLogCsv, RoundTripIsByteStable) {
  lander::LanderWorld world;
  const lander::HeuristicLanderPolicy policy;
  CampaignRng rng(6);
  CampaignLog log = random_testing_run(world, policy, world.behavior_spaces()[0], small_config(50, 50), rng);
  log.seed = 6;
  std::stringstream a;
  write_log_csv(a, log);
  const std::string first = a.str();
  EXPECT_EQ(first.substr(0, first.find('\n')),
            "index,method,seed,input_0,input_1,behavior_0,behavior_1,fitness,oracle,final_state_0,final_state_1,"
            "final_state_2,final_state_3,final_state_4,final_state_5,final_state_6");
  const CampaignLog back = read_log_csv(a, "lander", "touchdown");
  ASSERT_EQ(back.size(), log.size());
  EXPECT_EQ(back.method, "random");
  EXPECT_EQ(back.seed, 6u);
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(back.records[i].oracle, log.records[i].oracle);
    EXPECT_NEAR(back.records[i].fitness, log.records[i].fitness, 1e-8 * std::abs(log.records[i].fitness) + 1e-300);
  }
  std::stringstream b;
  write_log_csv(b, back);
  EXPECT_EQ(b.str(), first);
}

// ---------------------------------------------------------------- random testing

TEST(RandomTesting, InputsInBoundsAndDeterministic) {
  for (auto* mdp : std::initializer_list<Mdp*>{new taxi::TaxiWorld, new lander::LanderWorld, new walker::WalkerWorld}) {
    std::unique_ptr<Mdp> own(mdp);
    const ConstantPolicy policy(mdp->action_space().discrete ? Action{0.0} : Action{0.0, 0.0});
    CampaignRng a(7), b(7);
    const auto x = random_testing_run(*mdp, policy, mdp->behavior_spaces()[0], small_config(200, 0), a);
    const auto y = random_testing_run(*mdp, policy, mdp->behavior_spaces()[0], small_config(200, 0), b);
    expect_dense(x, 200);
    for (std::size_t i = 0; i < 200; ++i) {
      EXPECT_NO_THROW(mdp->validate_input(x.records[i].input));
      EXPECT_EQ(x.records[i].input, y.records[i].input);
    }
  }
}

TEST(RandomTesting, TaxiStartCellsAreUniform) {
  taxi::TaxiWorld world;
  CampaignRng rng = derive_campaign_rng(0, "random", 0, "pickup-dropoff");
  const auto log =
      random_testing_run(world, ConstantPolicy({double(taxi::pickup)}), world.behavior_spaces()[0], small_config(5000, 0), rng);
  std::map<std::pair<int, int>, int> counts;
  for (const auto& r : log.records) ++counts[{int(r.input.values[0]), int(r.input.values[1])}];
  const int cells = world.map().width() * world.map().height();
  const double expected = 5000.0 / cells;
  double chi2 = 0.0;
  for (int r = 0; r < world.map().height(); ++r) {
    for (int c = 0; c < world.map().width(); ++c) {
      const double o = counts.count({r, c}) ? counts[{r, c}] : 0;
      chi2 += (o - expected) * (o - expected) / expected;
    }
  }
  const boost::math::chi_squared dist(cells - 1);
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.99));
}

// ---------------------------------------------------------------- mdpfuzz

TEST(MdpFuzz, TaxiReplayAndBudget) {
  taxi::TaxiWorld world;
  const auto& policy = *testing_support::taxi_policy();
  const auto space = world.behavior_spaces()[0];
  CampaignRng rng = derive_campaign_rng(0, "mdpfuzz", 0, space.name);
  const auto r = mdpfuzz_run(world, policy, space, small_config(300, 100), rng);
  expect_dense(r.log, 300);
  expect_replay(world, policy, space, r.log);
  ASSERT_TRUE(r.model.has_value());
  EXPECT_GE(r.pool.size(), 100u);
  for (const auto& e : r.pool) EXPECT_TRUE(world.is_valid(e.input));
}

TEST(MdpFuzz, InitOnlyBudgetMatchesRandomTesting) {
  lander::LanderWorld world;
  const lander::HeuristicLanderPolicy policy;
  const auto space = world.behavior_spaces()[0];
  CampaignRng a(8), b(8);
  const auto fz = mdpfuzz_run(world, policy, space, small_config(80, 80), a);
  const auto rt = random_testing_run(world, policy, space, small_config(80, 80), b);
  for (std::size_t i = 0; i < 80; ++i) EXPECT_EQ(fz.log.records[i].input, rt.records[i].input);
  EXPECT_FALSE(fz.model.has_value());
}

TEST(MdpFuzz, ClosedGateKeepsInitialPool) {
  lander::LanderWorld world;
  const lander::HeuristicLanderPolicy policy;
  CampaignConfig c = small_config(200, 50);
  c.mdpfuzz.freshness_threshold = -std::numeric_limits<double>::infinity();
  CampaignRng rng(9);
  const auto r = mdpfuzz_run(world, policy, world.behavior_spaces()[0], c, rng);
  EXPECT_EQ(r.pool.size(), 50u);
  expect_dense(r.log, 200);
}

TEST(MdpFuzz, FaultingMutantsNeverJoinThePool) {
  lander::LanderWorld world;
  const lander::HeuristicLanderPolicy policy;
  CampaignConfig c = small_config(300, 50);
  c.mdpfuzz.freshness_threshold = std::numeric_limits<double>::infinity();
  CampaignRng rng(10);
  const auto r = mdpfuzz_run(world, policy, world.behavior_spaces()[0], c, rng);
  std::size_t clean_mutants = 0;
  for (std::size_t i = 50; i < r.log.size(); ++i) clean_mutants += !r.log.records[i].oracle;
  EXPECT_EQ(r.pool.size(), 50 + clean_mutants);
  for (const auto& e : r.pool) {
    if (!e.fresh) continue;
    bool faulty = false;
    for (const auto& rec : r.log.records) faulty |= rec.input == e.input && rec.oracle;
    EXPECT_FALSE(faulty);
  }
}

TEST(MdpFuzz, BoundedPoolEvictsOldest) {
  lander::LanderWorld world;
  const lander::HeuristicLanderPolicy policy;
  CampaignConfig c = small_config(200, 50);
  c.mdpfuzz.freshness_threshold = std::numeric_limits<double>::infinity();
  c.mdpfuzz.max_pool = 60;
  CampaignRng rng(11);
  const auto r = mdpfuzz_run(world, policy, world.behavior_spaces()[0], c, rng);
  EXPECT_EQ(r.pool.size(), 60u);
  EXPECT_TRUE(r.pool.back().fresh);
}

TEST(MdpFuzz, SeedDeterminism) {
  walker::WalkerWorld world;
  const walker::HeuristicWalkerPolicy policy;
  auto run = [&] {
    CampaignRng rng = derive_campaign_rng(0, "mdpfuzz", 3, "distance+hull_angle");
    std::ostringstream os;
    write_log_csv(os, mdpfuzz_run(world, policy, world.behavior_spaces()[0], small_config(150, 50), rng).log);
    return os.str();
  };
  EXPECT_EQ(run(), run());
}
