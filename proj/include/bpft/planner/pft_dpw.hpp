#pragma once

#include <chrono>
#include <limits>
#include <memory>

#include "bpft/entropy/boers.hpp"
#include "bpft/planner/search_common.hpp"

namespace bpft {

/// PFT-DPW: UCB tree search over particle beliefs with exact entropy rewards
/// and observation progressive widening.
template <GenerativeModel Model>
class PftDpwPlanner : public detail::SearchBase<Model> {
  using Base = detail::SearchBase<Model>;

 public:
  using typename Base::ActionNodeT;
  using typename Base::Node;
  using typename Base::Result;
  using typename Base::State;

  PftDpwPlanner(const Model& model, PlannerConfig config) : Base(model, config) {}

  Result plan(const ParticleBelief<State>& b0) {
    evaluations_ = 0;
    const auto start = std::chrono::steady_clock::now();
    auto root = this->make_root(b0);
    for (std::size_t i = 0; i < this->config_.n_iter; ++i) simulate(*root, this->config_.d_max);
    const Action action = this->best_root_action(*root);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    Result result;
    result.action = action;
    result.report.algorithm = "pft-dpw";
    result.report.action = action;
    result.report.planning_time_s = elapsed.count();
    result.report.simulations = this->config_.n_iter;
    result.report.tree_nodes = count_nodes(*root);
    result.report.transition_evaluations = evaluations_;
    if (this->compute_digest_) result.report.tree_digest = tree_digest(*root);
    result.tree = std::move(root);
    return result;
  }

  /// UCB choice at an expanded node: unvisited actions first (lowest index), then argmax with lowest-index ties.
  Action select_action(Node& h) const {
    this->ensure_actions(h);
    if (auto a = Base::first_unvisited(h)) return *a;
    Action best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (Action a = 0; a < h.actions.size(); ++a) {
      const double v = ucb(h.actions[a], h.visits, this->config_.c, this->config_.lambda);
      if (a == 0 || v > best_value) {
        best = a;
        best_value = v;
      }
    }
    return best;
  }

 private:
  double information_reward(const PFUpdateResult<State>& update, Action a) {
    if (this->config_.lambda == 0.0) return 0.0;
    std::size_t rows = 0;
    for (double w : update.posterior.weights) rows += (w != 0.0);
    evaluations_ += rows * update.prior_resampled.size();
    return boers_minus_entropy(update, a, this->model());
  }

  SimulationReturn simulate(Node& h, int depth) {
    if (depth == 0 || h.terminal) {
      ++h.visits;
      return {};
    }
    const Action a = select_action(h);
    ActionNodeT& ha = h.actions[a];
    const double gamma = this->config_.gamma;
    SimulationReturn out;
    if (this->widen(ha)) {
      if (auto expansion = this->expand(h, a, ha)) {
        auto& [child, update] = *expansion;
        const double value = information_reward(update, a);
        child->info = {value, value};
        this->rollout(*child, depth - 1, [&](const PFUpdateResult<State>& u, Action ra, std::uint64_t, RolloutEntry& e) {
          const double v = information_reward(u, ra);
          e.value = {v, v};
        });
        out.state = child->state_reward + gamma * child->rollout.state_return;
        out.info.lower = child->info.lower + gamma * child->rollout.info_return.lower;
        out.info.upper = out.info.lower;
        ha.children.push_back(std::move(child));
      } else {
        ++ha.aborted;
      }
    } else {
      Node& child = *ha.children[this->reuse_index(h, a, ha)];
      const SimulationReturn sub = simulate(child, depth - 1);
      out.state = child.state_reward + gamma * sub.state;
      out.info.lower = child.info.lower + gamma * sub.info.lower;
      out.info.upper = out.info.lower;
    }
    ++h.visits;
    ++ha.visits;
    const auto n = static_cast<double>(ha.visits);
    ha.q_state += (out.state - ha.q_state) / n;
    ha.q_info.lower += (out.info.lower - ha.q_info.lower) / n;
    ha.q_info.upper = ha.q_info.lower;
    return out;
  }

  std::size_t evaluations_ = 0;
};

}  // namespace bpft
