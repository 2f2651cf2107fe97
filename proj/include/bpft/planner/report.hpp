#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "bpft/core/model.hpp"

namespace bpft {

/// Summary of one planning session.
struct PlanReport {
  std::string algorithm;
  Action action = 0;
  double planning_time_s = 0.0;
  std::size_t simulations = 0;
  std::size_t tree_nodes = 0;
  /// Select Best outcomes that found overlapping siblings.
  std::size_t resimplifications = 0;
  /// Level promotions of individual reward bounds.
  std::size_t refinements = 0;
  /// Number of reward bound caches at each level 1..M when the session ended.
  std::vector<std::size_t> level_histogram;
  std::size_t transition_evaluations = 0;
  std::string tree_digest;

  friend bool operator==(const PlanReport&, const PlanReport&) = default;
};

inline void to_json(nlohmann::json& j, const PlanReport& r) {
  j = nlohmann::json{{"algorithm", r.algorithm},
                     {"action", r.action},
                     {"planning_time_s", r.planning_time_s},
                     {"simulations", r.simulations},
                     {"tree_nodes", r.tree_nodes},
                     {"resimplifications", r.resimplifications},
                     {"refinements", r.refinements},
                     {"level_histogram", r.level_histogram},
                     {"transition_evaluations", r.transition_evaluations},
                     {"tree_digest", r.tree_digest}};
}

inline void from_json(const nlohmann::json& j, PlanReport& r) {
  j.at("algorithm").get_to(r.algorithm);
  j.at("action").get_to(r.action);
  j.at("planning_time_s").get_to(r.planning_time_s);
  j.at("simulations").get_to(r.simulations);
  j.at("tree_nodes").get_to(r.tree_nodes);
  j.at("resimplifications").get_to(r.resimplifications);
  j.at("refinements").get_to(r.refinements);
  j.at("level_histogram").get_to(r.level_histogram);
  j.at("transition_evaluations").get_to(r.transition_evaluations);
  j.at("tree_digest").get_to(r.tree_digest);
}

}  // namespace bpft
