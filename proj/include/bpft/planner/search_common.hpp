#pragma once

#include <chrono>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "bpft/core/config.hpp"
#include "bpft/core/errors.hpp"
#include "bpft/core/model.hpp"
#include "bpft/core/rng.hpp"
#include "bpft/filter/particle_filter.hpp"
#include "bpft/planner/report.hpp"
#include "bpft/planner/snapshot.hpp"
#include "bpft/planner/tree.hpp"
#include "bpft/planner/ucb.hpp"

namespace bpft {

/// Discounted state and information returns of one simulation.
struct SimulationReturn {
  double state = 0.0;
  BoundsPair info{};
};

template <class State, class Observation>
struct PlanResult {
  Action action = 0;
  PlanReport report;
  std::unique_ptr<BeliefNode<State, Observation>> tree;
};

namespace detail {

/// Machinery both planners share. Every random draw is taken from a stream
/// forked off the position label of the node it concerns, so two planners
/// that build the same tree consume identical randomness.
template <GenerativeModel Model>
class SearchBase {
 public:
  using State = typename Model::State;
  using Observation = typename Model::Observation;
  using Node = BeliefNode<State, Observation>;
  using ActionNodeT = ActionNode<State, Observation>;
  using Result = PlanResult<State, Observation>;

  SearchBase(const Model& model, PlannerConfig config)
      : model_(&model), config_(config), rollout_actions_(non_terminal_actions(model)) {
    config_.validate();
  }

  [[nodiscard]] const PlannerConfig& config() const noexcept { return config_; }
  [[nodiscard]] const Model& model() const noexcept { return *model_; }

  /// Compute the tree digest after the timed section (on by default).
  void set_compute_digest(bool on) noexcept { compute_digest_ = on; }

 protected:
  std::unique_ptr<Node> make_root(const ParticleBelief<State>& b0) const {
    b0.validate();
    auto root = std::make_unique<Node>();
    root->belief = b0;
    root->key = SeededStream(config_.seed).key();
    root->depth = config_.d_max;
    return root;
  }

  void ensure_actions(Node& node) const {
    if (node.actions.empty()) node.actions.resize(model_->num_actions());
  }

  static std::optional<Action> first_unvisited(const Node& node) {
    for (Action a = 0; a < node.actions.size(); ++a) {
      if (node.actions[a].visits == 0) return a;
    }
    return std::nullopt;
  }

  bool widen(const ActionNodeT& ha) const {
    return dpw_allows_new_child(ha.visits, ha.children.size(), config_.k_o, config_.alpha_o);
  }

  /// Samples a fresh observation for (h, a) and updates the belief; null on a degenerate update.
  std::optional<std::pair<std::unique_ptr<Node>, PFUpdateResult<State>>> expand(const Node& h, Action a,
                                                                                const ActionNodeT& ha) const {
    const std::size_t index = ha.children.size();
    const std::uint64_t akey = action_key(h.key, a);
    SeededStream obs_rng = stream_at(akey, "observation", index);
    const Observation z = sample_observation(h.belief, a, *model_, obs_rng);
    SeededStream update_rng = stream_at(akey, "update", index);
    std::optional<PFUpdateResult<State>> update;
    try {
      update = pf_update(h.belief, a, z, *model_, update_rng);
    } catch (const DegeneratePosteriorError&) {
      return std::nullopt;
    }
    auto child = std::make_unique<Node>();
    child->belief = update->posterior;
    child->observation = z;
    child->key = child_key(akey, index);
    child->depth = h.depth - 1;
    child->terminal = model_->is_terminal_action(a);
    child->state_reward = update->r_x;
    return std::make_pair(std::move(child), std::move(*update));
  }

  /// Child of ha revisited by the current simulation.
  std::size_t reuse_index(const Node& h, Action a, const ActionNodeT& ha) const {
    SeededStream rng = stream_at(action_key(h.key, a), "reuse", ha.visits);
    return rng.index(ha.children.size());
  }

  /// Random non-terminal rollout of `depth` steps from `node`.
  ///
  /// `reward(update, action, entry_key, entry)` fills the information-reward
  /// entry of each step; it must not draw randomness.
  template <class RewardFn>
  void rollout(Node& node, int depth, RewardFn&& reward) const {
    RolloutRecord& record = node.rollout;
    if (depth <= 0 || node.terminal || rollout_actions_.empty()) return;
    SeededStream rng = stream_at(node.key, "rollout", 0);
    ParticleBelief<State> belief = node.belief;
    double discount = 1.0;
    double state_return = 0.0;
    for (int step = 0; step < depth; ++step) {
      const Action a = rollout_actions_[rng.index(rollout_actions_.size())];
      const Observation z = sample_observation(belief, a, *model_, rng);
      std::optional<PFUpdateResult<State>> update;
      try {
        update = pf_update(belief, a, z, *model_, rng);
      } catch (const DegeneratePosteriorError&) {
        break;
      }
      RolloutEntry entry;
      entry.depth = depth - 1 - step;
      entry.discount_power = step;
      reward(*update, a, detail::splitmix64(node.key ^ (0x8ebc6af09c88c6e3ULL * (step + 1))), entry);
      state_return += discount * update->r_x;
      discount *= config_.gamma;
      record.entries.push_back(std::move(entry));
      belief = std::move(update->posterior);
    }
    record.state_return = state_return;
    record.recompute(config_.gamma);
  }

  static SeededStream stream_at(std::uint64_t key, std::string_view label, std::uint64_t index) {
    return SeededStream(key).fork(label, index);
  }

  /// Root action maximizing Q among visited actions (c = 0), lowest index on ties.
  Action best_root_action(const Node& root) const {
    Action best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (Action a = 0; a < root.actions.size(); ++a) {
      const auto& ha = root.actions[a];
      if (ha.visits == 0) continue;
      const double v = ucb(ha, root.visits, 0.0, config_.lambda);
      if (!found || v > best_value) {
        best = a;
        best_value = v;
        found = true;
      }
    }
    return best;
  }

  const Model* model_;
  PlannerConfig config_;
  std::vector<Action> rollout_actions_;
  bool compute_digest_ = true;
};

}  // namespace detail
}  // namespace bpft
