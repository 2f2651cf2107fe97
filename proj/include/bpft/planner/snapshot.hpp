#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ranges>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "bpft/core/rng.hpp"
#include "bpft/planner/tree.hpp"

namespace bpft {

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline void append_bits(double v, std::string& out) { out += hex64(std::bit_cast<std::uint64_t>(v)); }

template <class Observation>
void append_observation(const Observation& z, std::string& out) {
  if constexpr (std::ranges::range<Observation>) {
    bool first = true;
    for (const auto& v : z) {
      if (!first) out += ',';
      append_bits(static_cast<double>(v), out);
      first = false;
    }
  } else {
    static_assert(std::is_arithmetic_v<Observation>, "snapshot needs arithmetic or range observations");
    append_bits(static_cast<double>(z), out);
  }
}

template <class State, class Observation>
void write_snapshot(const BeliefNode<State, Observation>& node, const std::string& path, bool root, std::string& out) {
  out += "B ";
  out += path;
  out += " N=";
  out += std::to_string(node.visits);
  if (!root) {
    out += " z=";
    append_observation(node.observation, out);
  }
  out += '\n';
  for (std::size_t a = 0; a < node.actions.size(); ++a) {
    const auto& ha = node.actions[a];
    if (ha.visits == 0) continue;
    const std::string apath = path + ".a" + std::to_string(a);
    out += "A " + apath + " N=" + std::to_string(ha.visits) + " C=" + std::to_string(ha.children.size()) + '\n';
    for (std::size_t k = 0; k < ha.children.size(); ++k) {
      write_snapshot(*ha.children[k], apath + ".o" + std::to_string(k), false, out);
    }
  }
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

inline std::string path_of(std::string_view line) {
  const auto first = line.find(' ');
  if (first == std::string_view::npos) return std::string(line);
  const auto second = line.find(' ', first + 1);
  return std::string(line.substr(first + 1, second == std::string_view::npos ? std::string_view::npos : second - first - 1));
}

}  // namespace detail

/// Canonical depth-first text form of a tree: one line per visited node with
/// its path (r.a<action>.o<child>...), visit count and, for belief nodes, the
/// bit pattern of the observation that created it.
template <class State, class Observation>
std::string tree_snapshot(const BeliefNode<State, Observation>& root) {
  std::string out;
  detail::write_snapshot(root, "r", true, out);
  return out;
}

inline std::string snapshot_digest(std::string_view snapshot) { return detail::hex64(detail::fnv1a64(snapshot)); }

template <class State, class Observation>
std::string tree_digest(const BeliefNode<State, Observation>& root) {
  return snapshot_digest(tree_snapshot(root));
}

struct TreeComparison {
  bool equal = true;
  std::optional<std::string> first_divergence;  ///< path of the first differing node
};

inline TreeComparison compare_snapshots(std::string_view lhs, std::string_view rhs) {
  const auto a = detail::split_lines(lhs);
  const auto b = detail::split_lines(rhs);
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return {false, detail::path_of(a[i])};
  }
  if (a.size() != b.size()) return {false, detail::path_of(a.size() > n ? a[n] : b[n])};
  return {};
}

template <class State, class Observation>
TreeComparison compare_trees(const BeliefNode<State, Observation>& lhs, const BeliefNode<State, Observation>& rhs) {
  return compare_snapshots(tree_snapshot(lhs), tree_snapshot(rhs));
}

}  // namespace bpft
