#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bpft/core/errors.hpp"

namespace bpft {

/// Parameters shared by both planners.
///
/// Config-file keys: m, d_max, n_iter, c, gamma, lambda, k_o, alpha_o, M, seed.
struct PlannerConfig {
  std::size_t m = 50;             ///< particles per belief
  int d_max = 30;                 ///< planning depth
  std::size_t n_iter = 200;       ///< simulations per planning session
  double c = 1.0;                 ///< UCB exploration constant
  double gamma = 0.5;             ///< discount
  double lambda = 1.0;            ///< weight of the information reward
  double k_o = 2.0;               ///< observation widening scale
  double alpha_o = 0.5;           ///< observation widening exponent
  int levels = 4;                 ///< simplification levels M
  std::uint64_t seed = 1;

  void validate() const {
    if (m < 1) throw ConfigError("m must be >= 1");
    if (d_max < 1) throw ConfigError("d_max must be >= 1");
    if (n_iter < 1) throw ConfigError("n_iter must be >= 1");
    if (levels < 1) throw ConfigError("M must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (!(c >= 0.0)) throw ConfigError("c must be >= 0");
    if (!(k_o > 0.0)) throw ConfigError("k_o must be > 0");
    if (!(alpha_o >= 0.0)) throw ConfigError("alpha_o must be >= 0");
  }
};

namespace detail {

template <class T>
void read_key(const boost::property_tree::ptree& tree, const std::string& key, T& out) {
  if (auto v = tree.get_optional<std::string>(key)) {
    try {
      out = tree.get<T>(key);
    } catch (const boost::property_tree::ptree_error&) {
      throw ConfigError("invalid value for '" + key + "': " + *v);
    }
  }
}

inline boost::property_tree::ptree read_ini(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  return tree;
}

}  // namespace detail

/// Overrides fields of `config` with the keys present in `tree`.
inline void apply_planner_keys(const boost::property_tree::ptree& tree, PlannerConfig& config) {
  detail::read_key(tree, "m", config.m);
  detail::read_key(tree, "d_max", config.d_max);
  detail::read_key(tree, "n_iter", config.n_iter);
  detail::read_key(tree, "c", config.c);
  detail::read_key(tree, "gamma", config.gamma);
  detail::read_key(tree, "lambda", config.lambda);
  detail::read_key(tree, "k_o", config.k_o);
  detail::read_key(tree, "alpha_o", config.alpha_o);
  detail::read_key(tree, "M", config.levels);
  detail::read_key(tree, "seed", config.seed);
}

/// Loads a key = value file. Keys may sit at top level or under [planner].
inline PlannerConfig load_planner_config(const std::filesystem::path& path) {
  const auto tree = detail::read_ini(path);
  PlannerConfig config;
  apply_planner_keys(tree, config);
  if (auto section = tree.get_child_optional("planner")) apply_planner_keys(*section, config);
  config.validate();
  return config;
}

}  // namespace bpft
