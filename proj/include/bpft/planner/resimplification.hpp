#pragma once

#include <cstddef>
#include <limits>
#include <string>

#include "bpft/core/errors.hpp"
#include "bpft/planner/tree.hpp"
#include "bpft/planner/ucb.hpp"

namespace bpft {

/// Gap of the belief-action node that triggered resimplification and the depth of its parent belief.
struct GapQuery {
  double gap = 0.0;
  int depth = 1;
};

enum class ResimplificationStrategy { specific, brute_force };

inline std::string to_string(ResimplificationStrategy s) {
  return s == ResimplificationStrategy::specific ? "specific" : "brute-force";
}

enum class SelectStatus { decided, overlap };

struct SelectBestResult {
  SelectStatus status = SelectStatus::decided;
  Action action = 0;
};

/// Bounded UCB choice among visited actions.
///
/// `decided` means the lower-UCB winner provably beats every sibling. On
/// `overlap` the returned action is the overlapping candidate with the widest
/// UCB gap, or the winner itself when every overlapping sibling is already exact.
template <class State, class Observation>
SelectBestResult select_best(const BeliefNode<State, Observation>& h, double c, double lambda) {
  Action best = 0;
  bool found = false;
  BoundsPair best_ucb{};
  for (Action a = 0; a < h.actions.size(); ++a) {
    if (h.actions[a].visits == 0) continue;
    const BoundsPair u = ucb_bounds(h.actions[a], h.visits, c, lambda);
    if (!found || u.lower > best_ucb.lower) {
      best = a;
      best_ucb = u;
      found = true;
    }
  }
  if (!found) throw InternalConsistencyError("select_best called on a node without visited actions");

  bool overlap = false;
  Action pick = best;
  double pick_gap = 0.0;
  for (Action a = 0; a < h.actions.size(); ++a) {
    if (a == best || h.actions[a].visits == 0) continue;
    const BoundsPair u = ucb_bounds(h.actions[a], h.visits, c, lambda);
    // on an exact tie the lower index has to win, so equality only clears a lower-index sibling when both are exact
    const bool overlaps = best_ucb.lower < u.upper ||
                          (best_ucb.lower == u.upper && a < best && (u.gap() > 0.0 || best_ucb.gap() > 0.0));
    if (!overlaps) continue;
    overlap = true;
    if (u.gap() > pick_gap) {
      pick = a;
      pick_gap = u.gap();
    }
  }
  return {overlap ? SelectStatus::overlap : SelectStatus::decided, overlap ? pick : best};
}

/// Rebuilds LB/UB of ha from its children's current reward bounds and the
/// means stored at the next level. Returns true when either bound changed.
template <class State, class Observation>
bool reconstruct_bounds(ActionNode<State, Observation>& ha, double gamma) {
  if (ha.visits == 0) return false;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = ha.aborted;
  for (const auto& child : ha.children) {
    const auto& o = *child;
    double sub_lower = o.rollout.info_return.lower;
    double sub_upper = o.rollout.info_return.upper;
    std::size_t inner = 0;
    for (const auto& oa : o.actions) {
      if (oa.visits == 0) continue;
      const auto n = static_cast<double>(oa.visits);
      sub_lower += n * oa.q_info.lower;
      sub_upper += n * oa.q_info.upper;
      inner += oa.visits;
    }
    if (o.depth > 0 && !o.terminal && o.visits != 1 + inner) {
      throw InternalConsistencyError("belief node visit count does not match its action nodes");
    }
    const auto n = static_cast<double>(o.visits);
    lower += n * o.info.lower + gamma * sub_lower;
    upper += n * o.info.upper + gamma * sub_upper;
    count += o.visits;
  }
  if (count != ha.visits) throw InternalConsistencyError("action node visit count does not match its children");
  const auto n = static_cast<double>(ha.visits);
  const BoundsPair rebuilt{lower / n, upper / n};
  if (rebuilt.lower > rebuilt.upper) throw InternalConsistencyError("reconstructed bounds are inverted");
  const bool changed = !(rebuilt == ha.q_info);
  ha.q_info = rebuilt;
  return changed;
}

/// Tightens reward bounds under a belief-action node until Select Best can decide.
template <class State, class Observation>
class Resimplifier {
 public:
  using Node = BeliefNode<State, Observation>;
  using ActionNodeT = ActionNode<State, Observation>;

  Resimplifier(ResimplificationStrategy strategy, double gamma, double lambda)
      : strategy_(strategy), gamma_(gamma), lambda_(lambda) {}

  [[nodiscard]] std::size_t triggers() const noexcept { return triggers_; }
  [[nodiscard]] std::size_t refinements() const noexcept { return refinements_; }
  [[nodiscard]] ResimplificationStrategy strategy() const noexcept { return strategy_; }

  /// Select Best with resimplification; `budget` caps the number of rounds.
  Action action_selection(Node& h, double c, std::size_t budget) {
    bool triggered = false;
    for (std::size_t round = 0;; ++round) {
      if (round > budget) throw InternalConsistencyError("resimplification did not settle within its budget");
      const SelectBestResult pick = select_best(h, c, lambda_);
      if (pick.status == SelectStatus::decided) return pick.action;
      if (!triggered) {
        ++triggers_;
        triggered = true;
      }
      ActionNodeT& ha = h.actions[pick.action];
      const std::size_t before = refinements_;
      resimplify(ha, {ha.q_info.gap(), h.depth});
      bool changed = reconstruct_bounds(ha, gamma_);
      if (refinements_ == before && !changed) {
        resimplify(ha, {0.0, h.depth});
        changed = reconstruct_bounds(ha, gamma_);
        if (refinements_ == before && !changed) {
          throw InternalConsistencyError("overlapping bounds but nothing left to refine");
        }
      }
    }
  }

  /// One resimplification pass over the subtree of ha (ha itself is not rebuilt).
  void resimplify(ActionNodeT& ha, const GapQuery& q) {
    for (auto& child : ha.children) {
      if (strategy_ == ResimplificationStrategy::specific) {
        resimplify_belief(*child, q);
      } else {
        refine_all(*child);
      }
    }
  }

  /// Refines at most one rollout entry of `node`: the widest one meeting the refinement condition.
  bool resimplify_rollout(Node& node, const GapQuery& q) {
    RolloutEntry* target = nullptr;
    double widest = -1.0;
    for (auto& e : node.rollout.entries) {
      if (!e.source || e.source->converged()) continue;
      if (!refine_condition(e.value.upper, e.value.lower, q.depth, e.depth, q.gap, gamma_)) continue;
      if (e.value.gap() > widest) {
        widest = e.value.gap();
        target = &e;
      }
    }
    if (target == nullptr) return false;
    target->value = target->source->refine();
    ++refinements_;
    node.rollout.recompute(gamma_);
    return true;
  }

 private:
  bool refine_if(Node& node, const GapQuery& q) {
    if (!node.info_source || node.info_source->converged()) return false;
    if (!refine_condition(node.info.upper, node.info.lower, q.depth, node.depth, q.gap, gamma_)) return false;
    node.info = node.info_source->refine();
    ++refinements_;
    return true;
  }

  void resimplify_belief(Node& node, const GapQuery& q) {
    Action widest = 0;
    double widest_weight = 0.0;
    for (Action a = 0; a < node.actions.size(); ++a) {
      const auto& oa = node.actions[a];
      if (oa.visits == 0) continue;
      const double weight = static_cast<double>(oa.visits) * oa.q_info.gap();
      if (weight > widest_weight) {
        widest = a;
        widest_weight = weight;
      }
    }
    if (widest_weight > 0.0) {
      ActionNodeT& oa = node.actions[widest];
      for (auto& child : oa.children) resimplify_belief(*child, q);
      reconstruct_bounds(oa, gamma_);
    }
    refine_if(node, q);
    resimplify_rollout(node, q);
  }

  // every reward bound below `node` moves up one level, then the action nodes are rebuilt bottom-up
  void refine_all(Node& node) {
    for (auto& oa : node.actions) {
      if (oa.visits == 0) continue;
      for (auto& child : oa.children) refine_all(*child);
      reconstruct_bounds(oa, gamma_);
    }
    if (node.info_source && !node.info_source->converged()) {
      node.info = node.info_source->refine();
      ++refinements_;
    }
    bool touched = false;
    for (auto& e : node.rollout.entries) {
      if (!e.source || e.source->converged()) continue;
      e.value = e.source->refine();
      ++refinements_;
      touched = true;
    }
    if (touched) node.rollout.recompute(gamma_);
  }

  ResimplificationStrategy strategy_;
  double gamma_;
  double lambda_;
  std::size_t triggers_ = 0;
  std::size_t refinements_ = 0;
};

}  // namespace bpft
