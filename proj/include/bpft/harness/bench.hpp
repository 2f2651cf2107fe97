#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "bpft/entropy/boers.hpp"
#include "bpft/entropy/bounds.hpp"
#include "bpft/lightdark/lightdark.hpp"

namespace bpft::harness {

struct EntropyTiming {
  std::size_t m = 0;
  double exact_s = 0.0;                 ///< mean time of one exact estimate
  std::vector<double> level_s;          ///< mean time to build bounds up to each level from scratch
  std::vector<std::size_t> level_evaluations;
};

inline void to_json(nlohmann::json& j, const EntropyTiming& t) {
  j = nlohmann::json{{"m", t.m}, {"exact_s", t.exact_s}, {"level_s", t.level_s}, {"level_evaluations", t.level_evaluations}};
}

/// Times the exact estimator and the level-by-level bounds on light-dark belief transitions.
///
/// Each measurement repeats until `min_seconds` have elapsed (and at least `min_repeats` times).
inline EntropyTiming bench_entropy(std::size_t m, int levels, std::uint64_t seed = 1, double min_seconds = 0.2,
                                   std::size_t min_repeats = 3) {
  using clock = std::chrono::steady_clock;
  const lightdark::LightDarkModel model;
  SeededStream rng(seed);
  const auto b0 = lightdark::initial_belief(model.config(), m, rng);
  const Action a = 2;
  const auto z = sample_observation(b0, a, model, rng);
  const auto update = pf_update(b0, a, z, model, rng);
  const auto order = simplification_order(m, seed);

  EntropyTiming t;
  t.m = m;
  volatile double sink = 0.0;
  {
    std::size_t n = 0;
    const auto start = clock::now();
    std::chrono::duration<double> spent{};
    while (n < min_repeats || spent.count() < min_seconds) {
      sink = sink + boers_minus_entropy(update, a, model);
      ++n;
      spent = clock::now() - start;
    }
    t.exact_s = spent.count() / static_cast<double>(n);
  }
  for (int s = 1; s <= levels; ++s) {
    std::size_t n = 0;
    std::size_t evaluations = 0;
    const auto start = clock::now();
    std::chrono::duration<double> spent{};
    while (n < min_repeats || spent.count() < min_seconds) {
      SimplificationCache<lightdark::Point> cache(update, a, model, levels, order);
      while (cache.level() < s) cache.refine(model);
      sink = sink + cache.bounds().lower;
      evaluations = cache.transition_evaluations();
      ++n;
      spent = clock::now() - start;
    }
    t.level_s.push_back(spent.count() / static_cast<double>(n));
    t.level_evaluations.push_back(evaluations);
  }
  return t;
}

}  // namespace bpft::harness
