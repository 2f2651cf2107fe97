#pragma once

#include <algorithm>
#include <chrono>
#include <memory>
#include <vector>

#include "bpft/entropy/bounds.hpp"
#include "bpft/planner/resimplification.hpp"
#include "bpft/planner/search_common.hpp"

namespace bpft {

/// PFT-DPW driven by adaptive entropy bounds instead of exact rewards.
///
/// Rewards start at the coarsest simplification level and are refined only
/// when Select Best cannot separate the candidate actions, so the tree and
/// the chosen action match PftDpwPlanner with the same seed.
template <GenerativeModel Model>
class BoundedPftPlanner : public detail::SearchBase<Model> {
  using Base = detail::SearchBase<Model>;

 public:
  using typename Base::ActionNodeT;
  using typename Base::Node;
  using typename Base::Result;
  using typename Base::State;
  using Observation = typename Model::Observation;

  BoundedPftPlanner(const Model& model, PlannerConfig config,
                    ResimplificationStrategy strategy = ResimplificationStrategy::specific)
      : Base(model, config), strategy_(strategy) {}

  [[nodiscard]] ResimplificationStrategy strategy() const noexcept { return strategy_; }

  Result plan(const ParticleBelief<State>& b0) {
    resimplifier_ = Resimplifier<State, Observation>(strategy_, this->config_.gamma, this->config_.lambda);
    caches_ = 0;
    action_nodes_ = 0;
    const auto start = std::chrono::steady_clock::now();
    auto root = this->make_root(b0);
    for (std::size_t i = 0; i < this->config_.n_iter; ++i) {
      watermark_ = -1;
      simulate(*root, this->config_.d_max);
    }
    const Action action = root->has_visited_action() ? resimplifier_.action_selection(*root, 0.0, budget()) : 0;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    Result result;
    result.action = action;
    result.report.algorithm = strategy_ == ResimplificationStrategy::specific ? "bounded-pft" : "bounded-pft-brute";
    result.report.action = action;
    result.report.planning_time_s = elapsed.count();
    result.report.simulations = this->config_.n_iter;
    result.report.tree_nodes = count_nodes(*root);
    result.report.resimplifications = resimplifier_.triggers();
    result.report.refinements = resimplifier_.refinements();
    std::vector<std::size_t> histogram(static_cast<std::size_t>(this->config_.levels), 0);
    std::size_t evaluations = 0;
    auto tally = [&](const RefinableBounds* s) {
      if (s == nullptr) return;
      ++histogram[static_cast<std::size_t>(s->level() - 1)];
      evaluations += s->transition_evaluations();
    };
    for_each_node(*root, [&](const Node& n) {
      tally(n.info_source.get());
      for (const auto& e : n.rollout.entries) tally(e.source.get());
    });
    result.report.level_histogram = std::move(histogram);
    result.report.transition_evaluations = evaluations;
    if (this->compute_digest_) result.report.tree_digest = tree_digest(*root);
    result.tree = std::move(root);
    return result;
  }

 private:
  std::size_t budget() const {
    return caches_ * static_cast<std::size_t>(this->config_.levels) + action_nodes_ + 16;
  }

  /// Level-1 bounds on the information reward of one belief transition.
  std::unique_ptr<RefinableBounds> make_bounds(const PFUpdateResult<State>& update, Action a, std::uint64_t key) {
    auto order = simplification_order(update.posterior.size(), key);
    auto [cache, initial] = init_cache(update, this->model(), a, this->config_.levels, std::move(order));
    ++caches_;
    return std::make_unique<EntropyBounds<Model>>(std::move(cache), this->model());
  }

  SimulationReturn simulate(Node& h, int depth) {
    if (depth == 0 || h.terminal) {
      ++h.visits;
      return {};
    }
    this->ensure_actions(h);
    Action a = 0;
    if (auto fresh = Base::first_unvisited(h)) {
      a = *fresh;
    } else {
      const std::size_t before = resimplifier_.triggers();
      a = resimplifier_.action_selection(h, this->config_.c, budget());
      if (resimplifier_.triggers() != before) watermark_ = std::max(watermark_, h.depth);
    }
    ActionNodeT& ha = h.actions[a];
    const double gamma = this->config_.gamma;
    const bool with_info = this->config_.lambda != 0.0;
    SimulationReturn out;
    if (this->widen(ha)) {
      if (auto expansion = this->expand(h, a, ha)) {
        auto& [child, update] = *expansion;
        if (with_info) {
          child->info_source = make_bounds(update, a, child->key);
          child->info = child->info_source->bounds();
        }
        this->rollout(*child, depth - 1,
                      [&](const PFUpdateResult<State>& u, Action ra, std::uint64_t entry_key, RolloutEntry& e) {
                        if (!with_info) return;
                        e.source = make_bounds(u, ra, entry_key);
                        e.value = e.source->bounds();
                      });
        out.state = child->state_reward + gamma * child->rollout.state_return;
        out.info.lower = child->info.lower + gamma * child->rollout.info_return.lower;
        out.info.upper = child->info.upper + gamma * child->rollout.info_return.upper;
        ha.children.push_back(std::move(child));
      } else {
        ++ha.aborted;
      }
    } else {
      Node& child = *ha.children[this->reuse_index(h, a, ha)];
      const SimulationReturn sub = simulate(child, depth - 1);
      out.state = child.state_reward + gamma * sub.state;
      out.info.lower = child.info.lower + gamma * sub.info.lower;
      out.info.upper = child.info.upper + gamma * sub.info.upper;
    }
    ++h.visits;
    if (ha.visits++ == 0) ++action_nodes_;
    const auto n = static_cast<double>(ha.visits);
    ha.q_state += (out.state - ha.q_state) / n;
    if (watermark_ >= 0 && watermark_ < h.depth) {
      // something below was refined during this simulation, so the running means are stale
      reconstruct_bounds(ha, gamma);
    } else {
      ha.q_info.lower += (out.info.lower - ha.q_info.lower) / n;
      ha.q_info.upper += (out.info.upper - ha.q_info.upper) / n;
    }
    return out;
  }

  ResimplificationStrategy strategy_;
  Resimplifier<State, Observation> resimplifier_{ResimplificationStrategy::specific, 0.0, 0.0};
  std::size_t caches_ = 0;
  std::size_t action_nodes_ = 0;
  int watermark_ = -1;
};

}  // namespace bpft
