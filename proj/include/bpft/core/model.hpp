#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "bpft/core/belief.hpp"
#include "bpft/core/errors.hpp"
#include "bpft/core/rng.hpp"

namespace bpft {

using Action = std::size_t;

/// Generative POMDP model over fixed-dimension real states.
///
/// Densities are P_T(x' | x, a) and P_Z(z | x). `max_transition_density(a)`
/// returns the supremum of P_T over x' for the action (infinity when the
/// density is unbounded). `reward_uses_posterior()` selects whether the
/// expected state reward of a step is taken over the prior or the posterior
/// belief of that step.
template <class M>
concept GenerativeModel = requires(const M& model, const typename M::State& x, const typename M::Observation& z,
                                   Action a, SeededStream& rng) {
  typename M::State;
  typename M::Observation;
  { model.num_actions() } -> std::convertible_to<std::size_t>;
  { model.sample_transition(x, a, rng) } -> std::same_as<typename M::State>;
  { model.transition_density(x, x, a) } -> std::convertible_to<double>;
  { model.sample_observation(x, rng) } -> std::same_as<typename M::Observation>;
  { model.observation_density(z, x) } -> std::convertible_to<double>;
  { model.state_reward(x, a) } -> std::convertible_to<double>;
  { model.is_terminal_action(a) } -> std::convertible_to<bool>;
  { model.max_transition_density(a) } -> std::convertible_to<double>;
  { model.reward_uses_posterior() } -> std::convertible_to<bool>;
};

/// r_x(b, a) = sum_i w_i r(x_i, a).
template <GenerativeModel Model>
double expected_state_reward(const ParticleBelief<typename Model::State>& b, Action a, const Model& model) {
  double total = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double r = model.state_reward(b.particles[i], a);
    if (!std::isfinite(r)) {
      throw ModelEvaluationError("state reward is not finite for particle " + std::to_string(i));
    }
    total += b.weights[i] * r;
  }
  return total;
}

/// Actions a rollout policy may take.
template <GenerativeModel Model>
std::vector<Action> non_terminal_actions(const Model& model) {
  std::vector<Action> out;
  for (Action a = 0; a < model.num_actions(); ++a) {
    if (!model.is_terminal_action(a)) out.push_back(a);
  }
  return out;
}

/// Forwards to a model and counts transition-density evaluations.
template <GenerativeModel Model>
class CountingModel {
 public:
  using State = typename Model::State;
  using Observation = typename Model::Observation;

  explicit CountingModel(const Model& inner) : inner_(&inner) {}

  std::size_t num_actions() const { return inner_->num_actions(); }
  State sample_transition(const State& x, Action a, SeededStream& rng) const {
    return inner_->sample_transition(x, a, rng);
  }
  double transition_density(const State& next, const State& x, Action a) const {
    ++transition_evaluations_;
    return inner_->transition_density(next, x, a);
  }
  Observation sample_observation(const State& x, SeededStream& rng) const { return inner_->sample_observation(x, rng); }
  double observation_density(const Observation& z, const State& x) const {
    ++observation_evaluations_;
    return inner_->observation_density(z, x);
  }
  double state_reward(const State& x, Action a) const { return inner_->state_reward(x, a); }
  bool is_terminal_action(Action a) const { return inner_->is_terminal_action(a); }
  double max_transition_density(Action a) const { return inner_->max_transition_density(a); }
  bool reward_uses_posterior() const { return inner_->reward_uses_posterior(); }

  std::size_t transition_evaluations() const { return transition_evaluations_; }
  std::size_t observation_evaluations() const { return observation_evaluations_; }
  void reset_counts() const { transition_evaluations_ = observation_evaluations_ = 0; }

 private:
  const Model* inner_;
  mutable std::size_t transition_evaluations_ = 0;
  mutable std::size_t observation_evaluations_ = 0;
};

}  // namespace bpft
