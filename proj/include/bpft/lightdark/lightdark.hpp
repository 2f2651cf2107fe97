#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "bpft/core/belief.hpp"
#include "bpft/core/config.hpp"
#include "bpft/core/errors.hpp"
#include "bpft/core/model.hpp"
#include "bpft/core/rng.hpp"

namespace bpft::lightdark {

using Point = std::array<double, 2>;

/// Parameters of the 2D light-dark domain.
///
/// None of the numeric defaults below are canonical for the domain. Every one
/// can be overridden from the [lightdark] section of a config file (keys in
/// parentheses).
struct LightDarkConfig {
  Point beacon{5.0, 0.0};                 // (beacon_x, beacon_y)
  double goal_radius = 1.0;               // (goal_radius)
  double goal_reward = 200.0;             // (goal_reward)
  double miss_penalty = -200.0;           // (miss_penalty)
  Point sigma_transition{0.1, 0.1};       // (sigma_T, or sigma_T_x / sigma_T_y)
  Point sigma_observation{1.0, 1.0};      // (sigma_O, ...)
  Point sigma_initial{2.0, 2.0};          // (sigma_0, ...)
  Point initial_mean{5.0, 5.0};           // (x0_x, x0_y)
  double step_length = 1.0;               // (step)
  double lambda = 1.0;                    // (lambda)
  double noise_floor = 1e-4;              // (noise_floor) observation variance scale at the beacon

  void validate() const {
    if (!(goal_radius > 0.0)) throw ConfigError("goal_radius must be > 0");
    for (const auto* s : {&sigma_transition, &sigma_observation, &sigma_initial}) {
      if (!((*s)[0] > 0.0 && (*s)[1] > 0.0)) throw ConfigError("light-dark covariances must be positive definite");
    }
    if (!(noise_floor > 0.0 && noise_floor <= 1.0)) throw ConfigError("noise_floor must lie in (0, 1]");
    if (!(step_length > 0.0)) throw ConfigError("step must be > 0");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  }
};

inline void apply_lightdark_keys(const boost::property_tree::ptree& tree, LightDarkConfig& cfg) {
  auto read_pair = [&](std::string_view base, Point& p) {
    if (tree.get_optional<std::string>(std::string(base))) {
      double both = 0.0;
      detail::read_key(tree, std::string(base), both);
      p = {both, both};
    }
    detail::read_key(tree, std::string(base) + "_x", p[0]);
    detail::read_key(tree, std::string(base) + "_y", p[1]);
  };
  detail::read_key(tree, "beacon_x", cfg.beacon[0]);
  detail::read_key(tree, "beacon_y", cfg.beacon[1]);
  detail::read_key(tree, "goal_radius", cfg.goal_radius);
  detail::read_key(tree, "goal_reward", cfg.goal_reward);
  detail::read_key(tree, "miss_penalty", cfg.miss_penalty);
  read_pair("sigma_T", cfg.sigma_transition);
  read_pair("sigma_O", cfg.sigma_observation);
  read_pair("sigma_0", cfg.sigma_initial);
  detail::read_key(tree, "x0_x", cfg.initial_mean[0]);
  detail::read_key(tree, "x0_y", cfg.initial_mean[1]);
  detail::read_key(tree, "step", cfg.step_length);
  detail::read_key(tree, "lambda", cfg.lambda);
  detail::read_key(tree, "noise_floor", cfg.noise_floor);
  cfg.validate();
}

inline constexpr std::size_t kNullAction = 8;
inline constexpr std::array<std::string_view, 9> kActionNames{"E", "NE", "N", "NW", "W", "SW", "S", "SE", "Null"};

/// Axis-aligned Gaussian density with per-axis standard deviations.
inline double gaussian2(const Point& x, const Point& mean, const Point& sigma) {
  const double dx = (x[0] - mean[0]) / sigma[0];
  const double dy = (x[1] - mean[1]) / sigma[1];
  return std::exp(-0.5 * (dx * dx + dy * dy)) / (2.0 * std::numbers::pi * sigma[0] * sigma[1]);
}

/// Eight compass moves of fixed length plus the terminal Null action.
class LightDarkModel {
 public:
  using State = Point;
  using Observation = Point;

  explicit LightDarkModel(LightDarkConfig cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    for (std::size_t k = 0; k < 8; ++k) {
      const double angle = static_cast<double>(k) * std::numbers::pi / 4.0;
      moves_[k] = {cfg_.step_length * std::cos(angle), cfg_.step_length * std::sin(angle)};
    }
    moves_[kNullAction] = {0.0, 0.0};
    inv_sigma_t_ = {1.0 / cfg_.sigma_transition[0], 1.0 / cfg_.sigma_transition[1]};
    norm_t_ = 1.0 / (2.0 * std::numbers::pi * cfg_.sigma_transition[0] * cfg_.sigma_transition[1]);
  }

  [[nodiscard]] const LightDarkConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const Point& move(Action a) const { return moves_.at(a); }

  std::size_t num_actions() const { return moves_.size(); }

  State sample_transition(const State& x, Action a, SeededStream& rng) const {
    const Point& d = moves_[a];
    const double n0 = rng.normal();
    const double n1 = rng.normal();
    return {x[0] + d[0] + cfg_.sigma_transition[0] * n0, x[1] + d[1] + cfg_.sigma_transition[1] * n1};
  }

  double transition_density(const State& next, const State& x, Action a) const {
    const Point& d = moves_[a];
    const double dx = (next[0] - x[0] - d[0]) * inv_sigma_t_[0];
    const double dy = (next[1] - x[1] - d[1]) * inv_sigma_t_[1];
    return norm_t_ * std::exp(-0.5 * (dx * dx + dy * dy));
  }

  /// min{1, |x - x_b|^2}, floored at noise_floor.
  double observation_scale(const State& x) const {
    const double dx = x[0] - cfg_.beacon[0];
    const double dy = x[1] - cfg_.beacon[1];
    return std::max(std::min(1.0, dx * dx + dy * dy), cfg_.noise_floor);
  }

  /// Diagonal of the observation covariance at x.
  Point observation_covariance(const State& x) const {
    const double s = observation_scale(x);
    return {s * cfg_.sigma_observation[0] * cfg_.sigma_observation[0],
            s * cfg_.sigma_observation[1] * cfg_.sigma_observation[1]};
  }

  Observation sample_observation(const State& x, SeededStream& rng) const {
    const double root = std::sqrt(observation_scale(x));
    const double n0 = rng.normal();
    const double n1 = rng.normal();
    return {x[0] + root * cfg_.sigma_observation[0] * n0, x[1] + root * cfg_.sigma_observation[1] * n1};
  }

  double observation_density(const Observation& z, const State& x) const {
    const double root = std::sqrt(observation_scale(x));
    return gaussian2(z, x, {root * cfg_.sigma_observation[0], root * cfg_.sigma_observation[1]});
  }

  double state_reward(const State& x, Action a) const {
    const double dist = std::hypot(x[0], x[1]);
    if (a == kNullAction) return dist <= cfg_.goal_radius ? cfg_.goal_reward : cfg_.miss_penalty;
    return -dist;
  }

  bool is_terminal_action(Action a) const { return a == kNullAction; }

  double max_transition_density(Action) const { return norm_t_; }

  bool reward_uses_posterior() const { return true; }

 private:
  LightDarkConfig cfg_;
  std::array<Point, 9> moves_{};
  Point inv_sigma_t_{};
  double norm_t_ = 0.0;
};

static_assert(GenerativeModel<LightDarkModel>);

/// m equally weighted draws from N(x0, Sigma_0).
inline ParticleBelief<Point> initial_belief(const LightDarkConfig& cfg, std::size_t m, SeededStream& rng) {
  std::vector<Point> particles;
  particles.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double n0 = rng.normal();
    const double n1 = rng.normal();
    particles.push_back({cfg.initial_mean[0] + cfg.sigma_initial[0] * n0, cfg.initial_mean[1] + cfg.sigma_initial[1] * n1});
  }
  return ParticleBelief<Point>::uniform(std::move(particles));
}

}  // namespace bpft::lightdark
