#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "condense/checks.hpp"

namespace condense {

/// Raised when a graph does not satisfy the certificate it was handed.
class PreconditionError : public std::invalid_argument {
 public:
  PreconditionError(const std::string& what, std::string side, std::uint64_t vertex)
      : std::invalid_argument(what), side_(std::move(side)), vertex_(vertex) {}
  const std::string& side() const { return side_; }
  std::uint64_t vertex() const { return vertex_; }

 private:
  std::string side_;
  std::uint64_t vertex_;
};

class BipartiteGraph {
 public:
  BipartiteGraph(std::uint64_t n_left, std::uint64_t n_right, std::vector<std::vector<std::uint32_t>> adjacency)
      : n_left_(n_left), n_right_(n_right), adj_(std::move(adjacency)) {
    if (adj_.size() != n_left_) throw std::invalid_argument("adjacency size differs from n_left");
    for (auto& list : adj_) {
      std::sort(list.begin(), list.end());
      if (std::adjacent_find(list.begin(), list.end()) != list.end())
        throw std::invalid_argument("duplicate neighbour in adjacency list");
      if (!list.empty() && list.back() >= n_right_) throw std::invalid_argument("neighbour index out of range");
    }
  }

  std::uint64_t n_left() const { return n_left_; }
  std::uint64_t n_right() const { return n_right_; }
  const std::vector<std::uint32_t>& neighbors(std::uint64_t u) const { return adj_[u]; }
  const std::vector<std::vector<std::uint32_t>>& adjacency() const { return adj_; }

 private:
  std::uint64_t n_left_, n_right_;
  std::vector<std::vector<std::uint32_t>> adj_;
};

/// Complete bipartite graph on n_left x n_right whose edge (u, v) has color
/// colors[u * n_right + v] in [0, n_colors).
class ColoredCompleteBipartite {
 public:
  ColoredCompleteBipartite(std::uint64_t n_left, std::uint64_t n_right, std::uint64_t n_colors,
                           std::vector<std::uint32_t> colors)
      : n_left_(n_left), n_right_(n_right), n_colors_(n_colors), colors_(std::move(colors)) {
    if (colors_.size() != n_left_ * n_right_) throw std::invalid_argument("color matrix is not fully populated");
    for (auto c : colors_)
      if (c >= n_colors_) throw std::invalid_argument("color outside [0, T)");
  }

  std::uint64_t n_left() const { return n_left_; }
  std::uint64_t n_right() const { return n_right_; }
  std::uint64_t n_colors() const { return n_colors_; }
  std::uint32_t color(std::uint64_t u, std::uint64_t v) const { return colors_[u * n_right_ + v]; }
  const std::vector<std::uint32_t>& colors() const { return colors_; }

 private:
  std::uint64_t n_left_, n_right_, n_colors_;
  std::vector<std::uint32_t> colors_;
};

struct CoverResult {
  std::vector<std::uint64_t> chosen;  // in pick order
  std::uint64_t covered = 0;          // left vertices, or edges
  std::uint64_t steps = 0;
  double bound = 0;
  double per_step_floor = 0;  // lower bound on every pick from the covering argument
  std::vector<std::uint64_t> picked_counts;
  std::vector<Check> checks;
  bool ok() const { return all_pass(checks); }
};

namespace detail {
inline void check_fraction(double c, const char* name) {
  if (!(c > 0 && c < 1)) throw std::invalid_argument(std::string(name) + " must lie in (0, 1)");
}
}  // namespace detail

/// Repeatedly takes the right vertex of largest residual degree (smallest index
/// on ties), deletes it with its neighbourhood, and stops once at least c1*N
/// left vertices are covered. The graph must certify deg(u) >= c0 * T^delta.
inline CoverResult greedy_cover(const BipartiteGraph& g, double c0, double delta, double c1) {
  detail::check_fraction(c1, "c1");
  if (!(c0 > 0)) throw std::invalid_argument("c0 must be positive");
  const double N = static_cast<double>(g.n_left());
  const double T = static_cast<double>(g.n_right());
  const double min_degree = c0 * std::pow(T, delta);
  for (std::uint64_t u = 0; u < g.n_left(); ++u)
    if (!at_least(static_cast<double>(g.neighbors(u).size()), min_degree))
      throw PreconditionError("left vertex " + std::to_string(u) + " has degree " +
                                  std::to_string(g.neighbors(u).size()) + " < c0*T^delta = " +
                                  std::to_string(min_degree),
                              "left", u);

  std::vector<std::vector<std::uint32_t>> right_adj(g.n_right());
  for (std::uint64_t u = 0; u < g.n_left(); ++u)
    for (auto v : g.neighbors(u)) right_adj[v].push_back(static_cast<std::uint32_t>(u));
  std::vector<std::uint64_t> degree(g.n_right());
  for (std::uint64_t v = 0; v < g.n_right(); ++v) degree[v] = right_adj[v].size();
  std::vector<char> alive(g.n_left(), 1), taken(g.n_right(), 0);

  CoverResult res;
  res.bound = c1 / ((1 - c1) * c0) * std::pow(T, 1 - delta);
  res.per_step_floor = (1 - c1) * c0 * N / std::pow(T, 1 - delta);
  const double target = c1 * N;
  bool floor_held = true;
  while (static_cast<double>(res.covered) < target) {
    std::uint64_t best = g.n_right();
    for (std::uint64_t v = 0; v < g.n_right(); ++v)
      if (!taken[v] && (best == g.n_right() || degree[v] > degree[best])) best = v;
    if (best == g.n_right() || degree[best] == 0)
      throw std::logic_error("greedy cover stalled before reaching c1*N");
    if (!at_least(static_cast<double>(degree[best]), res.per_step_floor)) floor_held = false;
    res.picked_counts.push_back(degree[best]);
    res.chosen.push_back(best);
    taken[best] = 1;
    for (auto u : right_adj[best]) {
      if (!alive[u]) continue;
      alive[u] = 0;
      ++res.covered;
      for (auto w : g.neighbors(u)) --degree[w];
    }
  }
  res.steps = res.chosen.size();

  res.checks.push_back({"cover.coverage", "|N(D)| >= c1*N", static_cast<double>(res.covered) >= target,
                        {{"covered", res.covered}, {"target", target}}});
  res.checks.push_back({"cover.size_ceil", "|D| <= ceil(c1/((1-c1)c0) * T^(1-delta))",
                        static_cast<double>(res.steps) <= std::ceil(res.bound - 1e-12),
                        {{"steps", res.steps}, {"bound", res.bound}}});
  res.checks.push_back({"cover.size_floor_plus_one", "|D| <= floor(bound) + 1",
                        static_cast<double>(res.steps) <= std::floor(res.bound + 1e-12) + 1,
                        {{"steps", res.steps}, {"bound", res.bound}}});
  res.checks.push_back({"cover.per_step_degree", "every pick has residual degree >= (1-c1)c0 N / T^(1-delta)",
                        floor_held,
                        {{"floor", res.per_step_floor}, {"picked", res.picked_counts}}});
  return res;
}

/// Repeatedly takes the color with the most remaining edges (smallest color on
/// ties) and deletes its edges, while the chosen colors cover at most c1 of all
/// edges. Every vertex must see at most c0 * T^delta distinct colors.
inline CoverResult greedy_color_cover(const ColoredCompleteBipartite& h, double c0, double c1, double c2,
                                      double delta) {
  detail::check_fraction(c1, "c1");
  detail::check_fraction(c2, "c2");
  if (!(c0 > 0)) throw std::invalid_argument("c0 must be positive");
  if (!(1 - c0 * c2 - c1 > 0)) throw std::invalid_argument("requires 1 - c0*c2 - c1 > 0");
  const double T = static_cast<double>(h.n_colors());
  const double max_colors = c0 * std::pow(T, delta);
  std::vector<std::uint32_t> seen(h.n_colors(), 0);
  std::uint32_t stamp = 0;
  auto check_vertex = [&](const char* side, std::uint64_t idx, std::uint64_t len, auto color_at) {
    ++stamp;
    std::uint64_t distinct = 0;
    for (std::uint64_t i = 0; i < len; ++i) {
      auto c = color_at(i);
      if (seen[c] != stamp) {
        seen[c] = stamp;
        ++distinct;
      }
    }
    if (!at_least(max_colors, static_cast<double>(distinct)))
      throw PreconditionError(std::string(side) + " vertex " + std::to_string(idx) + " sees " +
                                  std::to_string(distinct) + " colors > c0*T^delta = " + std::to_string(max_colors),
                              side, idx);
  };
  for (std::uint64_t u = 0; u < h.n_left(); ++u)
    check_vertex("left", u, h.n_right(), [&](std::uint64_t v) { return h.color(u, v); });
  for (std::uint64_t v = 0; v < h.n_right(); ++v)
    check_vertex("right", v, h.n_left(), [&](std::uint64_t u) { return h.color(u, v); });

  std::vector<std::uint64_t> count(h.n_colors(), 0);
  for (auto c : h.colors()) ++count[c];
  std::vector<std::uint64_t> order(h.n_colors());
  std::iota(order.begin(), order.end(), 0);
  // deleting a color class leaves the other classes untouched, so the greedy
  // order is the stable sort by count
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return count[a] > count[b]; });

  const double edges = static_cast<double>(h.n_left()) * static_cast<double>(h.n_right());
  CoverResult res;
  res.bound = c0 * c1 / ((1 - c0 * c2 - c1) * c2) * std::pow(T, 2 * delta);
  res.per_step_floor = (1 - c0 * c2 - c1) * c2 * edges / (c0 * std::pow(T, 2 * delta));
  for (auto c : order) {
    if (static_cast<double>(res.covered) > c1 * edges) break;
    res.chosen.push_back(c);
    res.picked_counts.push_back(count[c]);
    res.covered += count[c];
  }
  res.steps = res.chosen.size();
  bool monotone = std::is_sorted(res.picked_counts.rbegin(), res.picked_counts.rend());
  bool floor_held = true;
  for (auto pc : res.picked_counts)
    if (!at_least(static_cast<double>(pc), res.per_step_floor)) floor_held = false;

  res.checks.push_back({"color_cover.coverage", "edges colored by D > c1*|U||V|",
                        static_cast<double>(res.covered) > c1 * edges,
                        {{"covered", res.covered}, {"target", c1 * edges}}});
  res.checks.push_back({"color_cover.size_ceil", "|D| <= ceil(c0 c1/((1-c0 c2-c1) c2) * T^(2 delta))",
                        static_cast<double>(res.steps) <= std::ceil(res.bound - 1e-12),
                        {{"steps", res.steps}, {"bound", res.bound}}});
  res.checks.push_back({"color_cover.size_floor_plus_one", "|D| <= floor(bound) + 1",
                        static_cast<double>(res.steps) <= std::floor(res.bound + 1e-12) + 1,
                        {{"steps", res.steps}, {"bound", res.bound}}});
  res.checks.push_back({"color_cover.monotone_picks", "picked counts are non-increasing", monotone,
                        {{"picked", res.picked_counts}}});
  res.checks.push_back({"color_cover.per_step_count",
                        "every pick colors >= (1-c0 c2-c1) c2 |U||V| / (c0 T^(2 delta)) edges", floor_held,
                        {{"floor", res.per_step_floor}}});
  return res;
}

inline nlohmann::json to_json(const BipartiteGraph& g) {
  return {{"n_left", g.n_left()}, {"n_right", g.n_right()}, {"adjacency", g.adjacency()}};
}

inline BipartiteGraph bipartite_from_json(const nlohmann::json& j) {
  return BipartiteGraph(j.at("n_left").get<std::uint64_t>(), j.at("n_right").get<std::uint64_t>(),
                        j.at("adjacency").get<std::vector<std::vector<std::uint32_t>>>());
}

inline nlohmann::json to_json(const ColoredCompleteBipartite& h) {
  return {{"n_left", h.n_left()}, {"n_right", h.n_right()}, {"n_colors", h.n_colors()}, {"colors", h.colors()}};
}

inline ColoredCompleteBipartite colored_from_json(const nlohmann::json& j) {
  return ColoredCompleteBipartite(j.at("n_left").get<std::uint64_t>(), j.at("n_right").get<std::uint64_t>(),
                                  j.at("n_colors").get<std::uint64_t>(),
                                  j.at("colors").get<std::vector<std::uint32_t>>());
}

inline nlohmann::json to_json(const CoverResult& r) {
  return {{"chosen", r.chosen},   {"covered", r.covered}, {"steps", r.steps},
          {"bound", r.bound},     {"per_step_floor", r.per_step_floor},
          {"picked_counts", r.picked_counts}, {"checks", to_json(r.checks)}};
}

}  // namespace condense
