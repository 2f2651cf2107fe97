#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "bpft/entropy/bounds.hpp"

namespace bpft {

/// Q + c * sqrt(log(N(h)) / N(ha)) with Q = q_state + lambda * q_info; +inf for unvisited actions.
inline double ucb(double q_state, double q_info, double lambda, std::size_t parent_visits, std::size_t visits,
                  double c) {
  if (visits == 0) return std::numeric_limits<double>::infinity();
  const double q = q_state + lambda * q_info;
  if (c == 0.0) return q;
  return q + c * std::sqrt(std::log(static_cast<double>(parent_visits)) / static_cast<double>(visits));
}

template <class ActionNodeT>
double ucb(const ActionNodeT& node, std::size_t parent_visits, double c, double lambda) {
  return ucb(node.q_state, node.q_info.lower, lambda, parent_visits, node.visits, c);
}

/// UCB evaluated with the lower and the upper Q^I bound.
template <class ActionNodeT>
BoundsPair ucb_bounds(const ActionNodeT& node, std::size_t parent_visits, double c, double lambda) {
  return {ucb(node.q_state, node.q_info.lower, lambda, parent_visits, node.visits, c),
          ucb(node.q_state, node.q_info.upper, lambda, parent_visits, node.visits, c)};
}

/// Observation progressive widening: |C(ha)| <= k_o * N(ha)^alpha_o.
inline bool dpw_allows_new_child(std::size_t visits, std::size_t n_children, double k_o, double alpha_o) {
  return static_cast<double>(n_children) <= k_o * std::pow(static_cast<double>(visits), alpha_o);
}

/// gamma^(d - d') * (u' - l') > g / d, where g is the gap of the triggering
/// belief-action node at depth d and d' the depth of the candidate belief.
inline bool refine_condition(double upper, double lower, int depth, int node_depth, double trigger_gap,
                             double gamma) {
  return std::pow(gamma, depth - node_depth) * (upper - lower) > trigger_gap / static_cast<double>(depth);
}

}  // namespace bpft
