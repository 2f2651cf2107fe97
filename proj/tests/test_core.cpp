#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "bpft/core/belief.hpp"
#include "bpft/core/config.hpp"
#include "bpft/core/model.hpp"
#include "bpft/core/rng.hpp"
#include "support/models.hpp"

using namespace bpft;

TEST(NormalizeWeights, ScalesToUnitSum) {
  const std::vector<double> raw{1.0, 3.0};
  const auto w = normalize_weights(raw);
  EXPECT_DOUBLE_EQ(w[0], 0.25);
  EXPECT_DOUBLE_EQ(w[1], 0.75);
}

TEST(NormalizeWeights, RejectsDegenerateInput) {
  EXPECT_THROW(normalize_weights(std::vector<double>{0.0, 0.0}), DegenerateWeightsError);
  EXPECT_THROW(normalize_weights(std::vector<double>{1.0, -0.5}), DegenerateWeightsError);
  EXPECT_THROW(normalize_weights(std::vector<double>{1.0, std::nan("")}), DegenerateWeightsError);
  EXPECT_THROW(normalize_weights(std::vector<double>{std::numeric_limits<double>::infinity()}), DegenerateWeightsError);
}

TEST(ParticleBelief, UniformAndValidate) {
  const auto b = ParticleBelief<double>::uniform({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(b.size(), 4u);
  for (double w : b.weights) EXPECT_DOUBLE_EQ(w, 0.25);
  EXPECT_NO_THROW(b.validate());
  EXPECT_THROW((ParticleBelief<double>({1.0}, {0.5})).validate(), DegenerateWeightsError);
  EXPECT_THROW((ParticleBelief<double>({1.0, 2.0}, {1.0})).validate(), DegenerateWeightsError);
  EXPECT_THROW((ParticleBelief<double>({}, {})).validate(), DegenerateWeightsError);
  EXPECT_THROW((ParticleBelief<double>({1.0, 2.0}, {1.5, -0.5})).validate(), DegenerateWeightsError);
}

TEST(ParticleBelief, WeightedMean) {
  const ParticleBelief<std::array<double, 2>> b({{0.0, 0.0}, {2.0, 4.0}}, {0.75, 0.25});
  const auto mean = belief_mean(b);
  EXPECT_DOUBLE_EQ(mean[0], 0.5);
  EXPECT_DOUBLE_EQ(mean[1], 1.0);
}

TEST(SeededStream, SameSeedSameSequence) {
  SeededStream a(42);
  SeededStream b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  SeededStream c(43);
  SeededStream d(42);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += c() == d();
  EXPECT_LT(equal, 3);
}

TEST(SeededStream, ForkIgnoresConsumedDraws) {
  SeededStream a(7);
  SeededStream b(7);
  for (int i = 0; i < 1000; ++i) (void)b();
  (void)b.normal();
  auto fa = a.fork("observation", 3);
  auto fb = b.fork("observation", 3);
  EXPECT_EQ(fa.key(), fb.key());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(fa.uniform(), fb.uniform());
}

TEST(SeededStream, ForkLabelsAndIndicesSeparateStreams) {
  const SeededStream root(9);
  std::set<std::uint64_t> keys;
  for (const char* label : {"observation", "update", "reuse", "rollout"}) {
    keys.insert(root.fork(label).key());
    for (std::uint64_t i = 0; i < 8; ++i) keys.insert(root.fork(label, i).key());
  }
  EXPECT_EQ(keys.size(), 4u * 9u);
}

TEST(SeededStream, UniformRangeAndIndex) {
  SeededStream s(5);
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    ASSERT_LT(s.index(7), 7u);
  }
  EXPECT_LT(lo, 0.01);
  EXPECT_GT(hi, 0.99);
}

TEST(SeededStream, NormalMoments) {
  SeededStream s(11);
  const int n = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(PlannerConfig, DefaultsValidate) {
  PlannerConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.levels, 4);
}

TEST(PlannerConfig, RejectsOutOfRange) {
  auto bad = [](auto mutate) {
    PlannerConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  bad([](PlannerConfig& c) { c.m = 0; });
  bad([](PlannerConfig& c) { c.d_max = 0; });
  bad([](PlannerConfig& c) { c.n_iter = 0; });
  bad([](PlannerConfig& c) { c.levels = 0; });
  bad([](PlannerConfig& c) { c.gamma = 1.5; });
  bad([](PlannerConfig& c) { c.gamma = -0.1; });
  bad([](PlannerConfig& c) { c.lambda = -1.0; });
}

namespace {
std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}
}  // namespace

TEST(PlannerConfig, LoadsKeysFromFile) {
  const auto path = write_temp("bpft_core_cfg.ini",
                               "m = 80\nd_max = 12\n[planner]\nn_iter = 33\nc = 2.5\ngamma = 0.9\nlambda = 3\n"
                               "k_o = 4\nalpha_o = 0.25\nM = 6\nseed = 123\n");
  const auto c = load_planner_config(path);
  EXPECT_EQ(c.m, 80u);
  EXPECT_EQ(c.d_max, 12);
  EXPECT_EQ(c.n_iter, 33u);
  EXPECT_DOUBLE_EQ(c.c, 2.5);
  EXPECT_DOUBLE_EQ(c.gamma, 0.9);
  EXPECT_DOUBLE_EQ(c.lambda, 3.0);
  EXPECT_DOUBLE_EQ(c.k_o, 4.0);
  EXPECT_DOUBLE_EQ(c.alpha_o, 0.25);
  EXPECT_EQ(c.levels, 6);
  EXPECT_EQ(c.seed, 123u);
}

TEST(PlannerConfig, BadValuesAreConfigErrors) {
  EXPECT_THROW(load_planner_config(write_temp("bpft_core_bad1.ini", "[planner]\ngamma = 2\n")), ConfigError);
  EXPECT_THROW(load_planner_config(write_temp("bpft_core_bad2.ini", "[planner]\nm = lots\n")), ConfigError);
  EXPECT_THROW(load_planner_config(write_temp("bpft_core_bad3.ini", "[planner\nm = 3\n")), ConfigError);
  EXPECT_THROW(load_planner_config(std::filesystem::temp_directory_path() / "bpft_missing_file.ini"), ConfigError);
}

TEST(StateReward, ExpectationOverParticles) {
  testing_models::TableModel m = testing_models::oracle_fixture_model();
  m.rewards = {1.0, -3.0};
  const ParticleBelief<int> b({0, 1}, {0.25, 0.75});
  EXPECT_DOUBLE_EQ(expected_state_reward(b, 0, m), 0.25 - 2.25);
}

TEST(StateReward, NonFiniteRewardThrows) {
  testing_models::TableModel m = testing_models::oracle_fixture_model();
  m.rewards = {1.0, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(expected_state_reward(ParticleBelief<int>::uniform({0, 1}), 0, m), ModelEvaluationError);
}

TEST(Model, NonTerminalActions) {
  testing_models::LinearGaussian1D m;
  m.terminal_last = true;
  EXPECT_EQ(non_terminal_actions(m), (std::vector<Action>{0, 1}));
}

TEST(Model, CountingModelCountsDensityCalls) {
  const testing_models::LinearGaussian1D inner;
  const CountingModel<testing_models::LinearGaussian1D> counted(inner);
  (void)counted.transition_density(0.0, 0.0, 1);
  (void)counted.transition_density(1.0, 0.0, 1);
  (void)counted.observation_density(0.0, 0.0);
  EXPECT_EQ(counted.transition_evaluations(), 2u);
  EXPECT_EQ(counted.observation_evaluations(), 1u);
  counted.reset_counts();
  EXPECT_EQ(counted.transition_evaluations(), 0u);
}
