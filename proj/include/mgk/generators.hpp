#ifndef MGK_GENERATORS_HPP
#define MGK_GENERATORS_HPP

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mgk/graph.hpp"
#include "mgk/random.hpp"

namespace mgk {

namespace detail {

inline std::pair<std::size_t, std::size_t> ordered(std::size_t a, std::size_t b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

inline LabeledGraph from_edge_set(std::size_t n, const std::set<std::pair<std::size_t, std::size_t>>& edges) {
  return make_graph(n, {edges.begin(), edges.end()});
}

}  // namespace detail

/**
 * Newman-Watts-Strogatz small world graph.
 *
 * Ring lattice joining i to (i + j) mod n for j = 1..ceil(k/2). Then, for
 * each lattice edge (u, v) in ascending order, with probability p a shortcut
 * from u to a uniform node w is added; w is redrawn while w == u or (u, w)
 * is already an edge. Nothing is rewired.
 */
inline LabeledGraph gen_nws(std::size_t n, std::size_t k, double p, std::uint64_t seed) {
  if (k == 0 || n <= k) throw std::invalid_argument("gen_nws requires 0 < k < n");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gen_nws requires p in [0, 1]");
  std::set<std::pair<std::size_t, std::size_t>> edges;
  const std::size_t half = (k + 1) / 2;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 1; j <= half; ++j) {
      const std::size_t v = (i + j) % n;
      if (v != i) edges.insert(detail::ordered(i, v));
    }
  const std::vector<std::pair<std::size_t, std::size_t>> lattice(edges.begin(), edges.end());
  std::vector<std::size_t> degree(n, 0);
  for (auto [u, v] : edges) ++degree[u], ++degree[v];
  Rng rng(seed);
  for (auto [u, v] : lattice) {
    if (!rng.bernoulli(p)) continue;
    if (degree[u] + 1 >= n) continue;  // u already touches every node
    std::size_t w;
    do {
      w = rng.below(n);
    } while (w == u || edges.count(detail::ordered(u, w)));
    edges.insert(detail::ordered(u, w));
    ++degree[u], ++degree[w];
  }
  return detail::from_edge_set(n, edges);
}

/**
 * Barabasi-Albert preferential attachment graph.
 *
 * Seeded with the complete graph on nodes 0..m-1. Each new node v then links
 * to m distinct earlier nodes. Targets are drawn uniformly from a list that
 * holds every node once per incident edge, so the chance is proportional to
 * degree; repeats are redrawn.
 */
inline LabeledGraph gen_ba(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m == 0 || n <= m) throw std::invalid_argument("gen_ba requires 1 <= m < n");
  std::set<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> repeated;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      edges.insert({i, j});
      repeated.push_back(i);
      repeated.push_back(j);
    }
  Rng rng(seed);
  for (std::size_t v = m; v < n; ++v) {
    std::vector<std::size_t> targets;
    while (targets.size() < m) {
      // With m = 1 the seed has no edges; fall back to uniform choice.
      const std::size_t w = repeated.empty() ? rng.below(v) : repeated[rng.below(repeated.size())];
      if (std::find(targets.begin(), targets.end(), w) == targets.end()) targets.push_back(w);
    }
    for (std::size_t w : targets) {
      edges.insert(detail::ordered(v, w));
      repeated.push_back(v);
      repeated.push_back(w);
    }
  }
  return detail::from_edge_set(n, edges);
}

/// Uniform random graph with edge probability p, used by tests and samples.
inline LabeledGraph gen_erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) edges.insert({i, j});
  return detail::from_edge_set(n, edges);
}

/**
 * Attaches random labels: categorical node tokens in [0, node_categories)
 * and scalar edge labels uniform in [0, 1). Edge weights are redrawn from
 * [0.5, 1.5) when random_weights is set.
 */
inline void attach_random_labels(LabeledGraph& g, std::uint64_t seed, std::int64_t node_categories = 3,
                                 bool random_weights = true) {
  Rng rng(seed);
  g.node_shape = LabelShape::category();
  g.edge_shape = LabelShape::vector(1);
  for (auto& l : g.node_labels) l = Label::category(static_cast<std::int64_t>(rng.below(node_categories)));
  for (auto& e : g.edges) {
    e.label = Label::real(rng.uniform());
    if (random_weights) e.weight = 0.5 + rng.uniform();
  }
}

}  // namespace mgk

#endif  // MGK_GENERATORS_HPP
