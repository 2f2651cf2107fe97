#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <vector>

#include "bpft/core/rng.hpp"
#include "bpft/planner/resimplification.hpp"

// Synthetic belief trees with scripted reward bounds and a log of every simulation path.
namespace testing_trees {

using namespace bpft;

using Node = BeliefNode<double, double>;
using ActionNodeT = ActionNode<double, double>;

// Replays a fixed list of bound pairs, one per level.
class ScriptedBounds final : public RefinableBounds {
 public:
  explicit ScriptedBounds(std::vector<BoundsPair> steps) : steps_(std::move(steps)) {}
  int level() const override { return static_cast<int>(at_) + 1; }
  int levels() const override { return static_cast<int>(steps_.size()); }
  BoundsPair bounds() const override { return steps_[at_]; }
  BoundsPair refine() override {
    if (converged()) throw AlreadyConvergedError("scripted bounds already exact");
    return steps_[++at_];
  }
  std::size_t transition_evaluations() const override { return 0; }

 private:
  std::vector<BoundsPair> steps_;
  std::size_t at_ = 0;
};

// Loose brackets around `exact` that shrink to it over `levels` steps.
inline std::vector<BoundsPair> shrinking(double exact, int levels, SeededStream& rng) {
  std::vector<BoundsPair> out;
  double below = 1.0 + 3.0 * rng.uniform();
  double above = 1.0 + 3.0 * rng.uniform();
  for (int s = 1; s < levels; ++s) {
    out.push_back({exact - below, exact + above});
    below *= rng.uniform();
    above *= rng.uniform();
  }
  out.push_back({exact, exact});
  return out;
}

inline void set_source(Node& n, std::unique_ptr<RefinableBounds> s) {
  n.info = s->bounds();
  n.info_source = std::move(s);
}

// Every simulation that passed through each action node.
struct Shadow {
  // per simulation through an action node: the belief nodes visited after it, and whether the last one was expanded
  struct Path {
    std::vector<Node*> nodes;
    bool expanded = false;
  };
  std::map<const ActionNodeT*, std::vector<Path>> log;
};

inline BoundsPair path_return(const Shadow::Path& p, double gamma) {
  double lower = 0.0;
  double upper = 0.0;
  double discount = 1.0;
  for (std::size_t k = 0; k < p.nodes.size(); ++k) {
    lower += discount * p.nodes[k]->info.lower;
    upper += discount * p.nodes[k]->info.upper;
    if (k + 1 < p.nodes.size()) discount *= gamma;
  }
  if (p.expanded) {
    lower += discount * gamma * p.nodes.back()->rollout.info_return.lower;
    upper += discount * gamma * p.nodes.back()->rollout.info_return.upper;
  }
  return {lower, upper};
}

// Grows a random tree by planner-like descents and records every simulation path per action node.
class RandomTree {
 public:
  RandomTree(std::uint64_t seed, double gamma) : rng_(seed), gamma_(gamma) {
    root_.depth = 1 + static_cast<int>(rng_.index(4));
    actions_ = 1 + rng_.index(3);
    levels_ = 1 + static_cast<int>(rng_.index(4));
    const std::size_t sims = 5 + rng_.index(40);
    for (std::size_t i = 0; i < sims; ++i) descend(root_);
  }

  Node& root() { return root_; }
  const Shadow& shadow() const { return shadow_; }

  // every bound in the tree, in a random order
  std::vector<RefinableBounds*> sources() {
    std::vector<RefinableBounds*> out;
    collect(root_, out);
    return out;
  }

  // re-sums the cached info of every node from its source after refinements done behind its back
  void sync(Node& n) {
    if (n.info_source) n.info = n.info_source->bounds();
    for (auto& e : n.rollout.entries) e.value = e.source->bounds();
    n.rollout.recompute(gamma_);
    for (auto& ha : n.actions) {
      for (auto& c : ha.children) sync(*c);
    }
  }

  // reconstructs bottom-up
  void rebuild(Node& n) {
    for (auto& ha : n.actions) {
      for (auto& c : ha.children) rebuild(*c);
      reconstruct_bounds(ha, gamma_);
    }
  }

  SeededStream& rng() { return rng_; }

 private:
  Shadow::Path descend(Node& h) {
    if (h.depth == 0 || h.terminal) {
      ++h.visits;
      return {};
    }
    if (h.actions.empty()) h.actions.resize(actions_);
    ActionNodeT& ha = h.actions[rng_.index(actions_)];
    Shadow::Path path;
    if (ha.children.empty() || rng_.uniform() < 0.35) {
      if (rng_.uniform() < 0.1) {
        ++ha.aborted;
      } else {
        auto child = std::make_unique<Node>();
        child->depth = h.depth - 1;
        child->terminal = rng_.uniform() < 0.1;
        set_source(*child, std::make_unique<ScriptedBounds>(shrinking(rng_.normal(), levels_, rng_)));
        const int steps = child->terminal ? 0 : static_cast<int>(rng_.index(static_cast<std::size_t>(child->depth) + 1));
        for (int s = 0; s < steps; ++s) {
          RolloutEntry e;
          e.source = std::make_unique<ScriptedBounds>(shrinking(rng_.normal(), levels_, rng_));
          e.value = e.source->bounds();
          e.depth = child->depth - 1 - s;
          e.discount_power = s;
          child->rollout.entries.push_back(std::move(e));
        }
        child->rollout.recompute(gamma_);
        path.nodes.push_back(child.get());
        path.expanded = true;
        ha.children.push_back(std::move(child));
      }
    } else {
      Node& child = *ha.children[rng_.index(ha.children.size())];
      const Shadow::Path below = descend(child);
      path.nodes.push_back(&child);
      path.nodes.insert(path.nodes.end(), below.nodes.begin(), below.nodes.end());
      path.expanded = below.expanded;
    }
    ++h.visits;
    ++ha.visits;
    shadow_.log[&ha].push_back(path);
    return path;
  }

  void collect(Node& n, std::vector<RefinableBounds*>& out) {
    if (n.info_source) out.push_back(n.info_source.get());
    for (auto& e : n.rollout.entries) out.push_back(e.source.get());
    for (auto& ha : n.actions) {
      for (auto& c : ha.children) collect(*c, out);
    }
  }

  SeededStream rng_;
  double gamma_;
  Node root_;
  std::size_t actions_ = 1;
  int levels_ = 1;
  Shadow shadow_;
};


// Mean per-simulation return of every logged action node next to its reconstructed value; returns the worst error.
inline double worst_shadow_error(RandomTree& tree, double gamma) {
  double worst = 0.0;
  for (const auto& [ha, paths] : tree.shadow().log) {
    double lower = 0.0;
    double upper = 0.0;
    for (const auto& p : paths) {
      if (p.nodes.empty()) continue;  // aborted, contributes zero
      const BoundsPair r = path_return(p, gamma);
      lower += r.lower;
      upper += r.upper;
    }
    const auto n = static_cast<double>(ha->visits);
    if (paths.size() != ha->visits) return std::numeric_limits<double>::infinity();
    worst = std::max({worst, std::abs(ha->q_info.lower - lower / n), std::abs(ha->q_info.upper - upper / n)});
  }
  return worst;
}

// Refines a random subset of the bounds, then rebuilds the tree bottom-up.
inline void refine_randomly(RandomTree& tree) {
  for (auto* s : tree.sources()) {
    const auto k = tree.rng().index(static_cast<std::size_t>(s->levels()));
    for (std::size_t i = 0; i < k && !s->converged(); ++i) s->refine();
  }
  tree.sync(tree.root());
  tree.rebuild(tree.root());
}

}  // namespace testing_trees
