#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bpft/core/errors.hpp"

namespace bpft {

/// Scales nonnegative raw weights so they sum to one.
inline std::vector<double> normalize_weights(std::span<const double> raw) {
  double total = 0.0;
  for (double w : raw) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DegenerateWeightsError("weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw DegenerateWeightsError("weights sum to zero");
  }
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / total;
  return out;
}

/// Weighted particle approximation of a belief over states.
template <class State>
struct ParticleBelief {
  std::vector<State> particles;
  std::vector<double> weights;

  ParticleBelief() = default;
  ParticleBelief(std::vector<State> p, std::vector<double> w) : particles(std::move(p)), weights(std::move(w)) {}

  /// Uniformly weighted belief over the given particles.
  static ParticleBelief uniform(std::vector<State> p) {
    std::vector<double> w(p.size(), p.empty() ? 0.0 : 1.0 / static_cast<double>(p.size()));
    return ParticleBelief(std::move(p), std::move(w));
  }

  [[nodiscard]] std::size_t size() const noexcept { return particles.size(); }

  /// Throws DegenerateWeightsError if the belief violates its invariants.
  void validate(double tolerance = 1e-9) const {
    if (particles.empty() || particles.size() != weights.size()) {
      throw DegenerateWeightsError("belief needs m > 0 particles with one weight each");
    }
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw DegenerateWeightsError("negative belief weight");
      total += w;
    }
    if (std::abs(total - 1.0) > tolerance) {
      throw DegenerateWeightsError("belief weights sum to " + std::to_string(total));
    }
  }
};

/// Weighted mean of vector-valued particles.
template <class State>
State belief_mean(const ParticleBelief<State>& b) {
  State mean{};
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += b.weights[i] * b.particles[i][k];
  }
  return mean;
}

}  // namespace bpft
