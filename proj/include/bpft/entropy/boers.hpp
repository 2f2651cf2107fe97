#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "bpft/core/belief.hpp"
#include "bpft/core/errors.hpp"
#include "bpft/core/model.hpp"
#include "bpft/filter/particle_filter.hpp"

namespace bpft {

/// Products below this value are clamped before taking their log.
inline constexpr double kDensityFloor = 1e-300;

/// Supremum over x' of P_T(x' | x, a).
template <GenerativeModel Model>
double max_transition_density(const Model& model, Action a) {
  const double value = model.max_transition_density(a);
  if (!std::isfinite(value) || !(value > 0.0)) {
    throw UnsupportedModelError("transition density has no finite positive maximum");
  }
  return value;
}

namespace detail {

enum class LogPolicy { strict, clamp };

inline double floored_log(double value, LogPolicy policy) {
  if (value >= kDensityFloor) return std::log(value);
  if (policy == LogPolicy::strict) throw DegenerateEntropyError("zero density product inside the estimator log");
  return std::log(kDensityFloor);
}

/// -H for posterior particles propagated index-by-index from `prior`.
template <GenerativeModel Model>
double boers_core(const ParticleBelief<typename Model::State>& prior, Action a,
                  const ParticleBelief<typename Model::State>& posterior, std::span<const double> obs_lik,
                  const Model& model, LogPolicy policy) {
  const std::size_t m = posterior.size();
  double evidence = 0.0;
  for (std::size_t i = 0; i < m; ++i) evidence += obs_lik[i] * prior.weights[i];
  double value = -floored_log(evidence, policy);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = posterior.weights[i];
    if (w == 0.0) continue;
    double mixture = 0.0;
    for (std::size_t j = 0; j < prior.size(); ++j) {
      mixture += model.transition_density(posterior.particles[i], prior.particles[j], a) * prior.weights[j];
    }
    value += w * floored_log(obs_lik[i] * mixture, policy);
  }
  return value;
}

}  // namespace detail

/// Boers estimate of minus the differential entropy of `posterior`.
///
/// Posterior particle i must be the propagation of prior particle i. Throws
/// DegenerateEntropyError when a log argument vanishes under nonzero weight.
template <GenerativeModel Model>
double boers_minus_entropy(const ParticleBelief<typename Model::State>& prior, Action a,
                           const typename Model::Observation& z, const ParticleBelief<typename Model::State>& posterior,
                           const Model& model) {
  std::vector<double> obs_lik(posterior.size());
  for (std::size_t i = 0; i < posterior.size(); ++i) obs_lik[i] = model.observation_density(z, posterior.particles[i]);
  return detail::boers_core(prior, a, posterior, obs_lik, model, detail::LogPolicy::strict);
}

/// Planner-side variant: reuses cached likelihoods and clamps vanishing products at kDensityFloor.
template <GenerativeModel Model>
double boers_minus_entropy(const PFUpdateResult<typename Model::State>& update, Action a, const Model& model) {
  return detail::boers_core(update.prior_resampled, a, update.posterior, update.obs_likelihoods, model,
                            detail::LogPolicy::clamp);
}

}  // namespace bpft
