#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "bpft/filter/particle_filter.hpp"
#include "support/models.hpp"

using namespace bpft;
using testing_models::LinearGaussian1D;
using testing_models::TableModel;

TEST(PickByWeight, CumulativeSearchSkipsZeroWeights) {
  const ParticleBelief<int> b({0, 1, 2, 3}, {0.0, 0.5, 0.0, 0.5});
  EXPECT_EQ(detail::pick_by_weight(b, 0.0), 1u);
  EXPECT_EQ(detail::pick_by_weight(b, 0.49), 1u);
  EXPECT_EQ(detail::pick_by_weight(b, 0.5), 3u);
  EXPECT_EQ(detail::pick_by_weight(b, 0.999999), 3u);
  EXPECT_EQ(detail::pick_by_weight(b, 1.0), 3u);  // round-off fallback
}

TEST(SystematicResample, MatchesHandComputedSelection) {
  const ParticleBelief<int> b({10, 11, 12, 13}, {0.1, 0.2, 0.3, 0.4});
  SeededStream rng(3);
  SeededStream copy(3);
  const double u0 = copy.uniform() / 4.0;
  // oracle: slot k takes the first particle whose cumulative weight exceeds u0 + k/4
  const std::vector<double> cum{0.1, 0.3, 0.6, 1.0};
  std::vector<int> expected;
  for (int k = 0; k < 4; ++k) {
    const double t = u0 + k / 4.0;
    int i = 0;
    while (t >= cum[i]) ++i;
    expected.push_back(10 + i);
  }
  const auto out = systematic_resample(b, rng);
  EXPECT_EQ(out.particles, expected);
  for (double w : out.weights) EXPECT_DOUBLE_EQ(w, 0.25);
}

TEST(SystematicResample, CountsStayWithinOneOfExpectation) {
  const std::vector<double> w{0.05, 0.15, 0.0, 0.3, 0.5};
  const ParticleBelief<int> b({0, 1, 2, 3, 4}, w);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SeededStream rng(seed);
    const auto out = systematic_resample(b, rng);
    std::map<int, int> counts;
    for (int p : out.particles) ++counts[p];
    EXPECT_EQ(counts[2], 0);
    for (int i = 0; i < 5; ++i) {
      const double expect = 5.0 * w[static_cast<std::size_t>(i)];
      EXPECT_GE(counts[i], std::floor(expect) - 1e-12);
      EXPECT_LE(counts[i], std::ceil(expect) + 1e-12);
    }
  }
}

TEST(SampleObservation, DeterministicForEqualStreams) {
  const LinearGaussian1D model;
  const auto b = ParticleBelief<double>::uniform({-1.0, 0.0, 2.0});
  SeededStream a(17);
  SeededStream c(17);
  EXPECT_EQ(sample_observation(b, 2, model, a), sample_observation(b, 2, model, c));
}

// Step-by-step oracle: replay the draws the filter should make and redo the arithmetic by hand.
TEST(PfUpdate, MatchesStepByStepOracle) {
  const LinearGaussian1D model;
  const ParticleBelief<double> b({-2.0, -0.5, 0.3, 1.7, 4.0}, {0.1, 0.3, 0.2, 0.25, 0.15});
  const Action a = 2;
  const double z = 1.1;
  SeededStream rng(99);
  SeededStream replay(99);

  const auto result = pf_update(b, a, z, model, rng);

  const std::size_t m = b.size();
  const double u0 = replay.uniform() / static_cast<double>(m);
  std::vector<double> resampled;
  for (std::size_t k = 0; k < m; ++k) {
    const double t = u0 + static_cast<double>(k) / static_cast<double>(m);
    double c = 0.0;
    std::size_t i = 0;
    for (; i < m; ++i) {
      c += b.weights[i];
      if (t < c) break;
    }
    resampled.push_back(b.particles[std::min(i, m - 1)]);
  }
  std::vector<double> next;
  for (double x : resampled) next.push_back(x + 1.0 + 0.5 * replay.normal());
  std::vector<double> lik;
  double total = 0.0;
  for (double x : next) {
    lik.push_back(std::exp(-0.5 * (z - x) * (z - x)) / std::sqrt(2.0 * std::numbers::pi));
    total += lik.back();
  }
  double r_prior = 0.0;
  for (std::size_t i = 0; i < m; ++i) r_prior += b.weights[i] * -std::abs(b.particles[i]);

  ASSERT_EQ(result.posterior.size(), m);
  EXPECT_EQ(result.prior_resampled.particles, resampled);
  for (std::size_t i = 0; i < m; ++i) {
    EXPECT_DOUBLE_EQ(result.posterior.particles[i], next[i]);
    EXPECT_NEAR(result.obs_likelihoods[i], lik[i], 1e-15);
    EXPECT_NEAR(result.posterior.weights[i], lik[i] / total, 1e-12);
    EXPECT_DOUBLE_EQ(result.prior_resampled.weights[i], 1.0 / static_cast<double>(m));
  }
  EXPECT_NEAR(result.r_x, r_prior, 1e-12);
  EXPECT_NO_THROW(result.posterior.validate());
}

TEST(PfUpdate, PosteriorRewardFlag) {
  TableModel model;
  model.trans = {{{0.0, 0.0}, {1.0, 1.0}}};  // everything moves to state 1
  model.obs = {{1.0, 1.0}};
  model.rewards = {0.0, 5.0};
  const auto b = ParticleBelief<int>::uniform({0, 0});
  SeededStream rng(1);
  EXPECT_DOUBLE_EQ(pf_update(b, 0, 0, model, rng).r_x, 0.0);
  model.posterior_reward = true;
  SeededStream rng2(1);
  EXPECT_DOUBLE_EQ(pf_update(b, 0, 0, model, rng2).r_x, 5.0);
}

TEST(PfUpdate, ZeroLikelihoodEverywhereIsDegenerate) {
  TableModel model;
  model.trans = {{{1.0, 0.0}, {0.0, 1.0}}};
  model.obs = {{0.0, 0.0}, {1.0, 1.0}};
  SeededStream rng(1);
  EXPECT_THROW(pf_update(ParticleBelief<int>::uniform({0, 1}), 0, 0, model, rng), DegeneratePosteriorError);
}

TEST(PfUpdate, InvalidLikelihoodIsModelError) {
  TableModel model;
  model.trans = {{{1.0, 0.0}, {0.0, 1.0}}};
  model.obs = {{-1.0, 1.0}};
  SeededStream rng(1);
  EXPECT_THROW(pf_update(ParticleBelief<int>::uniform({0, 1}), 0, 0, model, rng), ModelEvaluationError);
}

TEST(PfUpdate, ZeroWeightParticlesAreNeverPropagated) {
  const LinearGaussian1D model;
  const ParticleBelief<double> b({100.0, 0.0}, {0.0, 1.0});
  for (std::uint64_t s = 0; s < 50; ++s) {
    SeededStream rng(s);
    const auto r = pf_update(b, 1, 0.0, model, rng);
    for (double x : r.prior_resampled.particles) EXPECT_EQ(x, 0.0);
  }
}
