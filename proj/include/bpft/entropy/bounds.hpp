#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "bpft/core/errors.hpp"
#include "bpft/core/model.hpp"
#include "bpft/core/rng.hpp"
#include "bpft/entropy/boers.hpp"
#include "bpft/filter/particle_filter.hpp"

namespace bpft {

/// Bracket [lower, upper] around a minus-entropy value or its Q-level mean.
struct BoundsPair {
  double lower = 0.0;
  double upper = 0.0;

  [[nodiscard]] double gap() const noexcept { return upper - lower; }
  friend bool operator==(const BoundsPair&, const BoundsPair&) = default;
};

/// Number of indices used at simplification level s: ceil(s * m / M).
inline std::size_t subset_size(std::size_t m, int level, int levels) {
  const auto s = static_cast<std::size_t>(level);
  const auto big_m = static_cast<std::size_t>(levels);
  return (s * m + big_m - 1) / big_m;
}

/// Fixed pseudorandom permutation of {0..m-1} derived from a node key.
inline std::vector<std::uint32_t> simplification_order(std::size_t m, std::uint64_t key) {
  std::vector<std::uint32_t> order(m);
  std::iota(order.begin(), order.end(), 0u);
  std::mt19937_64 engine(detail::splitmix64(key ^ detail::fnv1a64("simplification-order")));
  std::shuffle(order.begin(), order.end(), engine);
  return order;
}

/// Incrementally refinable bounds over the Boers minus-entropy of one belief transition.
///
/// Both index sets A_k and A_{k+1} are the first ceil(s*m/M) entries of one
/// permutation. Particles are stored in that order. Rows in A_{k+1} carry
/// their complete mixture sum plus its prefix at every later level boundary;
/// all other rows carry the partial sum over A_k. Sums run left to right in
/// permutation order, so refining to level s gives the same numbers as
/// evaluating level s directly, and no (i, j) density is evaluated twice.
template <class State>
class SimplificationCache {
 public:
  template <GenerativeModel Model>
  SimplificationCache(const PFUpdateResult<State>& update, Action action, const Model& model, int levels,
                      std::vector<std::uint32_t> order)
      : order_(std::move(order)), action_(action), levels_(levels), max_density_(max_transition_density(model, action)) {
    const std::size_t m = update.posterior.size();
    if (levels_ < 1) throw ConfigError("simplification levels must be >= 1");
    if (order_.size() != m || update.prior_resampled.size() != m || update.obs_likelihoods.size() != m) {
      throw InternalConsistencyError("simplification cache inputs have mismatched sizes");
    }
    prior_.reserve(m);
    prior_weights_.reserve(m);
    next_.reserve(m);
    next_weights_.reserve(m);
    obs_lik_.reserve(m);
    for (const std::uint32_t i : order_) {
      if (i >= m) throw InternalConsistencyError("simplification order is not a permutation");
      prior_.push_back(update.prior_resampled.particles[i]);
      prior_weights_.push_back(update.prior_resampled.weights[i]);
      next_.push_back(update.posterior.particles[i]);
      next_weights_.push_back(update.posterior.weights[i]);
      obs_lik_.push_back(update.obs_likelihoods[i]);
    }
    boundaries_.resize(static_cast<std::size_t>(levels_) + 1);
    for (int s = 0; s <= levels_; ++s) boundaries_[static_cast<std::size_t>(s)] = subset_size(m, s, levels_);
    partial_.assign(m, 0.0);
    prefix_.assign(m * static_cast<std::size_t>(levels_), 0.0);

    double evidence = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      evidence += update.obs_likelihoods[i] * update.prior_resampled.weights[i];
    }
    term_a_ = -log_floored(evidence);
    promote(model);
  }

  [[nodiscard]] int level() const noexcept { return level_; }
  [[nodiscard]] int levels() const noexcept { return levels_; }
  [[nodiscard]] bool converged() const noexcept { return level_ >= levels_; }
  [[nodiscard]] std::size_t particle_count() const noexcept { return next_.size(); }
  [[nodiscard]] std::size_t active_size() const noexcept { return boundary(level_); }
  [[nodiscard]] std::span<const std::uint32_t> order() const noexcept { return order_; }
  [[nodiscard]] std::size_t transition_evaluations() const noexcept { return evaluations_; }
  /// True once any log argument had to be clamped at kDensityFloor.
  [[nodiscard]] bool clamped() const noexcept { return clamped_; }
  [[nodiscard]] double term_a() const noexcept { return term_a_; }
  [[nodiscard]] BoundsPair bounds() const noexcept { return bounds_; }

  /// Promotes to the next level, evaluating only the newly covered index pairs.
  template <GenerativeModel Model>
  BoundsPair refine(const Model& model) {
    if (converged()) throw AlreadyConvergedError("bounds already at the finest simplification level");
    promote(model);
    return bounds_;
  }

 private:
  [[nodiscard]] std::size_t boundary(int level) const { return boundaries_[static_cast<std::size_t>(level)]; }

  double log_floored(double value) {
    if (value >= kDensityFloor) return std::log(value);
    clamped_ = true;
    return std::log(kDensityFloor);
  }

  double& prefix_at(std::size_t row, int level) {
    return prefix_[row * static_cast<std::size_t>(levels_) + static_cast<std::size_t>(level - 1)];
  }

  template <GenerativeModel Model>
  double segment_sum(const Model& model, std::size_t row, std::size_t begin, std::size_t end, double acc) const {
    const State& x = next_[row];
    for (std::size_t q = begin; q < end; ++q) acc += model.transition_density(x, prior_[q], action_) * prior_weights_[q];
    return acc;
  }

  template <GenerativeModel Model>
  void promote(const Model& model) {
    const std::size_t m = next_.size();
    const std::size_t old_end = boundary(level_);
    ++level_;
    const std::size_t new_end = boundary(level_);

    // rows that stay partial gain the newly added prior indices
    for (std::size_t p = new_end; p < m; ++p) partial_[p] = segment_sum(model, p, old_end, new_end, partial_[p]);
    evaluations_ += (m - new_end) * (new_end - old_end);
    // rows entering A_{k+1} complete their mixture sum, recording later level prefixes
    for (std::size_t p = old_end; p < new_end; ++p) {
      double acc = partial_[p];
      for (int s = level_; s <= levels_; ++s) {
        acc = segment_sum(model, p, boundary(s - 1), boundary(s), acc);
        prefix_at(p, s) = acc;
      }
    }
    evaluations_ += (new_end - old_end) * (m - old_end);
    recompute_bounds();
  }

  void recompute_bounds() {
    const double log_const = std::log(max_density_);
    const std::size_t full = boundary(level_);
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t p = 0; p < next_.size(); ++p) {
      const double w = next_weights_[p];
      if (w == 0.0) continue;
      const double lz = obs_lik_[p];
      if (p < full) {
        const double* row = &prefix_[p * static_cast<std::size_t>(levels_)];
        lower += w * log_floored(lz * row[level_ - 1]);
        upper += w * log_floored(lz * row[levels_ - 1]);
      } else {
        lower += w * log_floored(lz * partial_[p]);
        upper += w * (lz >= kDensityFloor ? log_const + std::log(lz) : log_floored(max_density_ * lz));
      }
    }
    bounds_ = {term_a_ + lower, term_a_ + upper};
  }

  std::vector<std::uint32_t> order_;
  // particle data below is stored in simplification order
  std::vector<State> prior_;
  std::vector<double> prior_weights_;
  std::vector<State> next_;
  std::vector<double> next_weights_;
  std::vector<double> obs_lik_;
  std::vector<std::size_t> boundaries_;
  Action action_;
  int levels_;
  int level_ = 0;
  double max_density_;
  double term_a_ = 0.0;
  std::vector<double> partial_;
  std::vector<double> prefix_;
  BoundsPair bounds_{};
  std::size_t evaluations_ = 0;
  bool clamped_ = false;
};

/// Builds the level-1 cache and its bounds.
template <GenerativeModel Model>
std::pair<SimplificationCache<typename Model::State>, BoundsPair> init_cache(
    const PFUpdateResult<typename Model::State>& update, const Model& model, Action action, int levels,
    std::vector<std::uint32_t> order) {
  SimplificationCache<typename Model::State> cache(update, action, model, levels, std::move(order));
  const BoundsPair b = cache.bounds();
  return {std::move(cache), b};
}

/// Type-erased handle the planner uses to tighten one reward's bounds.
class RefinableBounds {
 public:
  virtual ~RefinableBounds() = default;
  [[nodiscard]] virtual int level() const = 0;
  [[nodiscard]] virtual int levels() const = 0;
  [[nodiscard]] virtual BoundsPair bounds() const = 0;
  virtual BoundsPair refine() = 0;
  [[nodiscard]] virtual std::size_t transition_evaluations() const = 0;

  [[nodiscard]] bool converged() const { return level() >= levels(); }
};

template <GenerativeModel Model>
class EntropyBounds final : public RefinableBounds {
 public:
  EntropyBounds(SimplificationCache<typename Model::State> cache, const Model& model)
      : cache_(std::move(cache)), model_(&model) {}

  [[nodiscard]] int level() const override { return cache_.level(); }
  [[nodiscard]] int levels() const override { return cache_.levels(); }
  [[nodiscard]] BoundsPair bounds() const override { return cache_.bounds(); }
  BoundsPair refine() override { return cache_.refine(*model_); }
  [[nodiscard]] std::size_t transition_evaluations() const override { return cache_.transition_evaluations(); }

  [[nodiscard]] const SimplificationCache<typename Model::State>& cache() const { return cache_; }

 private:
  SimplificationCache<typename Model::State> cache_;
  const Model* model_;
};

}  // namespace bpft
