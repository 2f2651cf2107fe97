#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "bpft/core/belief.hpp"
#include "bpft/core/model.hpp"
#include "bpft/core/rng.hpp"
#include "bpft/entropy/bounds.hpp"

namespace bpft {

/// One belief reached by a rollout step and the bounds on its information reward.
struct RolloutEntry {
  std::unique_ptr<RefinableBounds> source;  ///< null when the value is exact
  BoundsPair value{};
  int depth = 0;           ///< depth of the reached belief (leaves are 0)
  int discount_power = 0;  ///< exponent of gamma inside the rollout return
};

/// Default-policy simulation launched from a freshly created belief node.
struct RolloutRecord {
  double state_return = 0.0;
  BoundsPair info_return{};
  std::vector<RolloutEntry> entries;

  /// Re-sums the discounted information return from the entries.
  void recompute(double gamma) {
    double lower = 0.0;
    double upper = 0.0;
    double discount = 1.0;
    for (const auto& e : entries) {
      lower += discount * e.value.lower;
      upper += discount * e.value.upper;
      discount *= gamma;
    }
    info_return = {lower, upper};
  }
};

template <class State, class Observation>
struct BeliefNode;

template <class State, class Observation>
struct ActionNode {
  std::size_t visits = 0;
  std::size_t aborted = 0;  ///< simulations cut short by a degenerate belief update
  double q_state = 0.0;
  BoundsPair q_info{};      ///< exact Q^I in the baseline (lower == upper)
  std::vector<std::unique_ptr<BeliefNode<State, Observation>>> children;
};

template <class State, class Observation>
struct BeliefNode {
  ParticleBelief<State> belief;
  Observation observation{};  ///< observation that led here; unused at the root
  std::uint64_t key = 0;      ///< position label used to fork random streams
  int depth = 0;              ///< remaining depth; the root has d_max
  bool terminal = false;
  std::size_t visits = 1;     ///< creation visit plus one per later simulation
  double state_reward = 0.0;  ///< r_x of the transition into this node
  BoundsPair info{};          ///< immediate information reward bounds
  std::unique_ptr<RefinableBounds> info_source;
  RolloutRecord rollout;
  std::vector<ActionNode<State, Observation>> actions;  ///< empty until first selection

  [[nodiscard]] bool has_visited_action() const {
    for (const auto& ha : actions) {
      if (ha.visits > 0) return true;
    }
    return false;
  }
};

inline std::uint64_t action_key(std::uint64_t node_key, Action a) {
  return detail::splitmix64(node_key ^ (0xa0761d6478bd642fULL * (a + 1)));
}

inline std::uint64_t child_key(std::uint64_t action_node_key, std::size_t index) {
  return detail::splitmix64(action_node_key ^ (0xe7037ed1a0b428dbULL * (index + 1)));
}

/// Visits every belief node in depth-first order.
template <class State, class Observation, class Fn>
void for_each_node(const BeliefNode<State, Observation>& node, Fn&& fn) {
  fn(node);
  for (const auto& ha : node.actions) {
    for (const auto& child : ha.children) for_each_node(*child, fn);
  }
}

template <class State, class Observation>
std::size_t count_nodes(const BeliefNode<State, Observation>& root) {
  std::size_t n = 0;
  for_each_node(root, [&](const auto&) { ++n; });
  return n;
}

}  // namespace bpft
