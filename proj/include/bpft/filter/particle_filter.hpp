#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bpft/core/belief.hpp"
#include "bpft/core/errors.hpp"
#include "bpft/core/model.hpp"
#include "bpft/core/rng.hpp"

namespace bpft {

template <class State>
struct PFUpdateResult {
  ParticleBelief<State> posterior;
  /// Uniform-weight particle set that was propagated; x_k in the entropy terms.
  ParticleBelief<State> prior_resampled;
  double r_x = 0.0;
  /// P_Z(z | x'_i) for every propagated particle, index-aligned with posterior.
  std::vector<double> obs_likelihoods;
};

namespace detail {

/// First index whose cumulative weight exceeds `u`; zero-weight entries are never returned.
template <class State>
std::size_t pick_by_weight(const ParticleBelief<State>& b, double u) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    cumulative += b.weights[i];
    if (u < cumulative) return i;
  }
  // Round-off left u above the final cumulative sum; fall back to the last weighted particle.
  for (std::size_t i = b.size(); i-- > 0;) {
    if (b.weights[i] > 0.0) return i;
  }
  return b.size() - 1;
}

}  // namespace detail

/// Low-variance resampling to `b.size()` uniformly weighted particles with a single uniform draw.
template <class State>
ParticleBelief<State> systematic_resample(const ParticleBelief<State>& b, SeededStream& rng) {
  const std::size_t m = b.size();
  const double step = 1.0 / static_cast<double>(m);
  const double start = rng.uniform() * step;
  std::vector<State> out;
  out.reserve(m);
  std::size_t i = 0;
  double cumulative = b.weights[0];
  for (std::size_t k = 0; k < m; ++k) {
    const double target = start + static_cast<double>(k) * step;
    while (target >= cumulative && i + 1 < m) {
      ++i;
      cumulative += b.weights[i];
    }
    // skip trailing zero-weight particles reached only through round-off
    std::size_t pick = i;
    while (b.weights[pick] <= 0.0 && pick > 0) --pick;
    out.push_back(b.particles[pick]);
  }
  return ParticleBelief<State>::uniform(std::move(out));
}

/// Draws x ~ b, x' ~ T(x, a) and returns z ~ O(x').
template <GenerativeModel Model>
typename Model::Observation sample_observation(const ParticleBelief<typename Model::State>& b, Action a,
                                               const Model& model, SeededStream& rng) {
  const std::size_t i = detail::pick_by_weight(b, rng.uniform());
  const auto next = model.sample_transition(b.particles[i], a, rng);
  return model.sample_observation(next, rng);
}

/// Resample, propagate, weight by the observation likelihood and normalize.
template <GenerativeModel Model>
PFUpdateResult<typename Model::State> pf_update(const ParticleBelief<typename Model::State>& b, Action a,
                                                const typename Model::Observation& z, const Model& model,
                                                SeededStream& rng) {
  using State = typename Model::State;
  PFUpdateResult<State> result;
  result.prior_resampled = systematic_resample(b, rng);
  const std::size_t m = b.size();

  std::vector<State> propagated;
  propagated.reserve(m);
  for (const auto& x : result.prior_resampled.particles) propagated.push_back(model.sample_transition(x, a, rng));

  result.obs_likelihoods.resize(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double p = model.observation_density(z, propagated[i]);
    if (!std::isfinite(p) || p < 0.0) {
      throw ModelEvaluationError("observation density invalid for particle " + std::to_string(i));
    }
    result.obs_likelihoods[i] = p;
    total += p;
  }
  if (!(total > 0.0)) throw DegeneratePosteriorError("observation has zero likelihood under every particle");

  std::vector<double> weights(m);
  for (std::size_t i = 0; i < m; ++i) weights[i] = result.obs_likelihoods[i] / total;
  result.posterior = ParticleBelief<State>(std::move(propagated), std::move(weights));

  result.r_x = expected_state_reward(model.reward_uses_posterior() ? result.posterior : b, a, model);
  return result;
}

}  // namespace bpft
