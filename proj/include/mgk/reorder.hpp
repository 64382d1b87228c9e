#ifndef MGK_REORDER_HPP
#define MGK_REORDER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgk/graph.hpp"
#include "mgk/random.hpp"
#include "mgk/tiles.hpp"

namespace mgk {

/// Node relabeling. forward[old] = new, inverse[new] = old.
struct Permutation {
  std::vector<std::size_t> forward;
  std::vector<std::size_t> inverse;

  std::size_t size() const { return forward.size(); }

  static Permutation identity(std::size_t n) {
    Permutation p;
    p.forward.resize(n);
    std::iota(p.forward.begin(), p.forward.end(), std::size_t{0});
    p.inverse = p.forward;
    return p;
  }

  /// order[k] is the old node placed at new position k.
  static Permutation from_order(std::vector<std::size_t> order) {
    Permutation p;
    p.forward.assign(order.size(), order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (order[k] >= order.size() || p.forward[order[k]] != order.size())
        throw std::invalid_argument("order is not a permutation");
      p.forward[order[k]] = k;
    }
    p.inverse = std::move(order);
    return p;
  }

  Permutation inverted() const {
    Permutation p;
    p.forward = inverse;
    p.inverse = forward;
    return p;
  }

  bool is_identity() const {
    for (std::size_t k = 0; k < forward.size(); ++k)
      if (forward[k] != k) return false;
    return true;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
};

inline LabeledGraph apply_permutation(const LabeledGraph& g, const Permutation& perm) {
  const std::size_t n = g.node_count;
  if (perm.size() != n)
    throw std::invalid_argument("permutation size " + std::to_string(perm.size()) +
                                " != node count " + std::to_string(n));
  LabeledGraph out = g;
  auto permute = [&](const auto& src, auto& dst) {
    if (src.size() != n) return;
    for (std::size_t k = 0; k < n; ++k) dst[k] = src[perm.inverse[k]];
  };
  permute(g.node_labels, out.node_labels);
  permute(g.start_prob, out.start_prob);
  permute(g.stop_prob, out.stop_prob);
  permute(g.coords, out.coords);
  for (auto& e : out.edges) {
    e.i = perm.forward[e.i];
    e.j = perm.forward[e.j];
  }
  return out;
}

/// Number of unordered pairs of distinct consecutive-t parts joined by an edge.
inline std::size_t objective(const LabeledGraph& g, const Permutation& perm,
                             std::size_t t = tile_size) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const Edge& e : g.edges) {
    const std::size_t a = perm.forward[e.i] / t;
    const std::size_t b = perm.forward[e.j] / t;
    if (a != b) pairs.push_back(std::minmax(a, b));
  }
  std::sort(pairs.begin(), pairs.end());
  return static_cast<std::size_t>(std::unique(pairs.begin(), pairs.end()) - pairs.begin());
}

/// Balanced K-way partition, K = ceil(n / t).
struct PartitionState {
  std::size_t t = tile_size;
  std::size_t parts = 0;
  std::vector<std::size_t> assignment;
  std::vector<std::size_t> sizes;

  static PartitionState from_assignment(std::vector<std::size_t> assign, std::size_t t) {
    PartitionState s;
    s.t = t;
    s.parts = (assign.size() + t - 1) / t;
    s.sizes.assign(s.parts, 0);
    for (auto p : assign) {
      if (p >= s.parts) throw std::invalid_argument("part index out of range");
      ++s.sizes[p];
    }
    s.assignment = std::move(assign);
    return s;
  }

  /// Consecutive groups of t under the given permutation.
  static PartitionState from_permutation(const Permutation& perm, std::size_t t) {
    std::vector<std::size_t> a(perm.size());
    for (std::size_t v = 0; v < perm.size(); ++v) a[v] = perm.forward[v] / t;
    return from_assignment(std::move(a), t);
  }

  std::size_t capacity(std::size_t k) const {
    const std::size_t n = assignment.size();
    return k + 1 < parts ? t : n - (parts - 1) * t;
  }

  bool balanced() const {
    for (std::size_t k = 0; k < parts; ++k)
      if (sizes[k] != capacity(k)) return false;
    return true;
  }

  /// Parts in index order, nodes ascending within a part.
  Permutation to_permutation() const {
    std::vector<std::size_t> order(assignment.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return assignment[a] < assignment[b]; });
    return Permutation::from_order(std::move(order));
  }
};

namespace detail {

// Incrementally maintained count of connected part pairs.
class PartPairTracker {
 public:
  PartPairTracker(const Adjacency& adj, PartitionState& state)
      : adj_(adj), s_(state), links_(state.parts) {
    const std::size_t n = state.assignment.size();
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t u : adj.neighbors(v))
        if (u > v) link(s_.assignment[v], s_.assignment[u], +1);
  }

  std::size_t value() const { return objective_; }

  void move(std::size_t v, std::size_t to) {
    const std::size_t from = s_.assignment[v];
    if (from == to) return;
    for (std::size_t u : adj_.neighbors(v)) {
      const std::size_t c = s_.assignment[u];
      link(from, c, -1);
      link(to, c, +1);
    }
    s_.assignment[v] = to;
    --s_.sizes[from];
    ++s_.sizes[to];
  }

  long move_gain(std::size_t v, std::size_t to) {
    const std::size_t from = s_.assignment[v];
    const long before = static_cast<long>(objective_);
    move(v, to);
    const long after = static_cast<long>(objective_);
    move(v, from);
    return before - after;
  }

  long swap_gain(std::size_t v, std::size_t u) {
    const std::size_t a = s_.assignment[v];
    const std::size_t b = s_.assignment[u];
    const long before = static_cast<long>(objective_);
    move(v, b);
    move(u, a);
    const long after = static_cast<long>(objective_);
    move(u, b);
    move(v, a);
    return before - after;
  }

 private:
  void link(std::size_t a, std::size_t b, int delta) {
    if (a == b) return;
    int& ab = links_[a][b];
    const int old = ab;
    ab += delta;
    links_[b][a] += delta;
    if (old == 0 && ab > 0) ++objective_;
    if (old > 0 && ab == 0) --objective_;
  }

  const Adjacency& adj_;
  PartitionState& s_;
  std::vector<std::unordered_map<std::size_t, int>> links_;
  std::size_t objective_ = 0;
};

inline std::size_t partition_objective(const Adjacency& adj, PartitionState state) {
  return PartPairTracker(adj, state).value();
}

}  // namespace detail

struct FmOptions {
  std::size_t max_passes = 10;
  // Non-improving swaps tolerated within a pass before it ends.
  std::size_t patience = 32;
  // Best single-move candidates examined for a swap partner per step.
  std::size_t swap_candidates = 8;
};

/**
 * Fiduccia-Mattheyses style refinement of a K-way partition against the
 * connected-part-pair objective.
 *
 * Oversized parts are first drained into undersized ones by best-gain moves
 * (ties: lowest node, then lowest part). Each improvement pass then performs
 * balance-preserving swaps, locking moved nodes, and rolls back to the best
 * state seen. Passes stop when one yields no improvement.
 */
inline PartitionState fm_refine(const LabeledGraph& g, PartitionState state,
                                const FmOptions& opt = {}) {
  const std::size_t n = g.node_count;
  if (state.assignment.size() != n) throw std::invalid_argument("partition size != node count");
  if (n == 0) return state;
  const Adjacency adj = build_adjacency(g);
  detail::PartPairTracker tracker(adj, state);

  // Rebalance.
  while (!state.balanced()) {
    long best_gain = std::numeric_limits<long>::min();
    std::size_t best_v = n, best_to = 0;
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t from = state.assignment[v];
      if (state.sizes[from] <= state.capacity(from)) continue;
      for (std::size_t k = 0; k < state.parts; ++k) {
        if (state.sizes[k] >= state.capacity(k)) continue;
        const long gain = tracker.move_gain(v, k);
        if (gain > best_gain) {
          best_gain = gain;
          best_v = v;
          best_to = k;
        }
      }
    }
    tracker.move(best_v, best_to);
  }

  for (std::size_t pass = 0; pass < opt.max_passes; ++pass) {
    const std::size_t start_obj = tracker.value();
    std::size_t best_obj = start_obj;
    std::vector<std::size_t> best_assign = state.assignment;
    std::vector<char> locked(n, 0);
    std::size_t since_best = 0;

    struct Candidate {
      long gain;
      std::size_t v;
      std::size_t to;
    };
    std::vector<Candidate> cands;
    for (std::size_t step = 0; step < n / 2 && since_best < opt.patience; ++step) {
      cands.clear();
      for (std::size_t v = 0; v < n; ++v) {
        if (locked[v]) continue;
        const std::size_t a = state.assignment[v];
        std::size_t prev = n;
        for (std::size_t u : adj.neighbors(v)) {
          const std::size_t b = state.assignment[u];
          if (b == a || b == prev) continue;
          prev = b;
          cands.push_back({tracker.move_gain(v, b), v, b});
        }
      }
      if (cands.empty()) break;
      std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
        if (x.gain != y.gain) return x.gain > y.gain;
        if (x.v != y.v) return x.v < y.v;
        return x.to < y.to;
      });
      long best_gain = std::numeric_limits<long>::min();
      std::size_t sv = n, su = n;
      const std::size_t limit = std::min(cands.size(), opt.swap_candidates);
      for (std::size_t c = 0; c < limit; ++c) {
        const auto& cand = cands[c];
        for (std::size_t u = 0; u < n; ++u) {
          if (locked[u] || state.assignment[u] != cand.to) continue;
          const long gain = tracker.swap_gain(cand.v, u);
          if (gain > best_gain || (gain == best_gain && (cand.v < sv || (cand.v == sv && u < su)))) {
            best_gain = gain;
            sv = cand.v;
            su = u;
          }
        }
      }
      if (sv == n) break;
      const std::size_t a = state.assignment[sv];
      const std::size_t b = state.assignment[su];
      tracker.move(sv, b);
      tracker.move(su, a);
      locked[sv] = locked[su] = 1;
      if (tracker.value() < best_obj) {
        best_obj = tracker.value();
        best_assign = state.assignment;
        since_best = 0;
      } else {
        ++since_best;
      }
    }
    // Roll back to the best prefix.
    for (std::size_t v = 0; v < n; ++v)
      if (state.assignment[v] != best_assign[v]) tracker.move(v, best_assign[v]);
    if (best_obj >= start_obj) break;
  }
  return state;
}

inline PartitionState fm_refine(const LabeledGraph& g, PartitionState state, std::size_t max_passes) {
  FmOptions opt;
  opt.max_passes = max_passes;
  return fm_refine(g, std::move(state), opt);
}

namespace detail {

// BFS levels from start, restricted to nodes with member[v] set.
inline std::vector<std::vector<std::size_t>> bfs_levels(const Adjacency& adj, std::size_t start,
                                                        const std::vector<char>& member) {
  std::vector<std::vector<std::size_t>> levels{{start}};
  std::vector<char> seen(member.size(), 0);
  seen[start] = 1;
  while (true) {
    std::vector<std::size_t> next;
    for (std::size_t v : levels.back())
      for (std::size_t u : adj.neighbors(v))
        if (member[u] && !seen[u]) {
          seen[u] = 1;
          next.push_back(u);
        }
    if (next.empty()) break;
    levels.push_back(std::move(next));
  }
  return levels;
}

// George-Liu pseudo-peripheral node search.
inline std::size_t pseudo_peripheral(const Adjacency& adj, std::size_t start,
                                     const std::vector<char>& member) {
  auto levels = bfs_levels(adj, start, member);
  while (true) {
    const auto& last = levels.back();
    std::size_t cand = last.front();
    for (std::size_t v : last)
      if (adj.degree(v) < adj.degree(cand) || (adj.degree(v) == adj.degree(cand) && v < cand)) cand = v;
    auto cl = bfs_levels(adj, cand, member);
    if (cl.size() <= levels.size()) return start;
    start = cand;
    levels = std::move(cl);
  }
}

// Splits `nodes` into a left set of exactly left_size nodes grown by BFS,
// then improves the edge cut with Kernighan-Lin swaps.
inline std::vector<char> bisect(const Adjacency& adj, const std::vector<std::size_t>& nodes,
                                std::size_t left_size, Rng* rng) {
  const std::size_t n = adj.offsets.size() - 1;
  std::vector<char> member(n, 0), left(n, 0), grown(n, 0);
  for (std::size_t v : nodes) member[v] = 1;

  auto pick_start = [&]() {
    std::size_t best = n;
    if (rng) {
      std::vector<std::size_t> rest;
      for (std::size_t v : nodes)
        if (!grown[v]) rest.push_back(v);
      return rest[rng->below(rest.size())];
    }
    for (std::size_t v : nodes)
      if (!grown[v] && (best == n || adj.degree(v) < adj.degree(best))) best = v;
    return pseudo_peripheral(adj, best, member);
  };

  std::size_t taken = 0;
  while (taken < left_size) {
    std::size_t s = pick_start();
    std::queue<std::size_t> q;
    q.push(s);
    grown[s] = 1;
    while (!q.empty() && taken < left_size) {
      const std::size_t v = q.front();
      q.pop();
      left[v] = 1;
      ++taken;
      for (std::size_t u : adj.neighbors(v))
        if (member[u] && !grown[u]) {
          grown[u] = 1;
          q.push(u);
        }
    }
    // Nodes queued but not taken return to the pool.
    while (!q.empty()) {
      grown[q.front()] = 0;
      q.pop();
    }
  }

  // Kernighan-Lin refinement of the cut inside `nodes`.
  std::vector<long> diff(n, 0);  // external - internal
  auto recompute = [&]() {
    for (std::size_t v : nodes) {
      long d = 0;
      for (std::size_t u : adj.neighbors(v))
        if (member[u]) d += (left[u] != left[v]) ? 1 : -1;
      diff[v] = d;
    }
  };
  auto connected = [&](std::size_t a, std::size_t b) {
    for (std::size_t u : adj.neighbors(a))
      if (u == b) return 1L;
    return 0L;
  };
  for (int pass = 0; pass < 8; ++pass) {
    recompute();
    std::vector<char> locked(n, 0);
    std::vector<std::pair<std::size_t, std::size_t>> swaps;
    long cum = 0, best_cum = 0;
    std::size_t best_len = 0;
    const std::size_t steps = std::min(left_size, nodes.size() - left_size);
    for (std::size_t step = 0; step < steps; ++step) {
      std::size_t bl = n, br = n;
      for (std::size_t v : nodes) {
        if (locked[v]) continue;
        std::size_t& slot = left[v] ? bl : br;
        if (slot == n || diff[v] > diff[slot]) slot = v;
      }
      if (bl == n || br == n) break;
      cum += diff[bl] + diff[br] - 2 * connected(bl, br);
      locked[bl] = locked[br] = 1;
      left[bl] = 0;
      left[br] = 1;
      swaps.emplace_back(bl, br);
      for (std::size_t v : {bl, br})
        for (std::size_t u : adj.neighbors(v))
          if (member[u] && !locked[u]) {
            long d = 0;
            for (std::size_t w : adj.neighbors(u))
              if (member[w]) d += (left[w] != left[u]) ? 1 : -1;
            diff[u] = d;
          }
      if (cum > best_cum) {
        best_cum = cum;
        best_len = swaps.size();
      }
    }
    for (std::size_t k = swaps.size(); k-- > best_len;) {
      left[swaps[k].first] = 1;
      left[swaps[k].second] = 0;
    }
    if (best_cum <= 0) break;
  }
  return left;
}

inline void recursive_bisection(const Adjacency& adj, const std::vector<std::size_t>& nodes,
                                std::size_t first_part, std::size_t parts, std::size_t t,
                                std::vector<std::size_t>& assign, Rng* rng) {
  if (parts == 1) {
    for (std::size_t v : nodes) assign[v] = first_part;
    return;
  }
  const std::size_t left_parts = (parts + 1) / 2;
  const auto left = bisect(adj, nodes, left_parts * t, rng);
  std::vector<std::size_t> ln, rn;
  for (std::size_t v : nodes) (left[v] ? ln : rn).push_back(v);
  recursive_bisection(adj, ln, first_part, left_parts, t, assign, rng);
  recursive_bisection(adj, rn, first_part + left_parts, parts - left_parts, t, assign, rng);
}

}  // namespace detail

/// Reverse Cuthill-McKee ordering with index tie-breaking.
inline Permutation rcm_reorder(const LabeledGraph& g) {
  const std::size_t n = g.node_count;
  const Adjacency adj = build_adjacency(g);
  std::vector<char> member(n, 1), visited(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (order.size() < n) {
    std::size_t start = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!visited[v] && (start == n || adj.degree(v) < adj.degree(start))) start = v;
    start = detail::pseudo_peripheral(adj, start, member);
    std::size_t head = order.size();
    order.push_back(start);
    visited[start] = 1;
    while (head < order.size()) {
      const std::size_t v = order[head++];
      std::vector<std::size_t> next;
      for (std::size_t u : adj.neighbors(v))
        if (!visited[u]) {
          visited[u] = 1;
          next.push_back(u);
        }
      std::sort(next.begin(), next.end(), [&](std::size_t a, std::size_t b) {
        return adj.degree(a) != adj.degree(b) ? adj.degree(a) < adj.degree(b) : a < b;
      });
      order.insert(order.end(), next.begin(), next.end());
    }
  }
  std::reverse(order.begin(), order.end());
  return Permutation::from_order(std::move(order));
}

/// 64-bit Morton key of a quantized point, first coordinate in the lowest bit.
inline std::uint64_t morton_key(const std::array<std::uint32_t, 3>& q, int dim) {
  std::uint64_t key = 0;
  for (int b = 0; b < 21; ++b)
    for (int d = 0; d < dim; ++d)
      key |= static_cast<std::uint64_t>((q[d] >> b) & 1u) << (b * dim + d);
  return key;
}

/// Sort by Morton key of coordinates quantized to 21 bits over the bounding box.
inline Permutation morton_reorder(const std::vector<Point>& points, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("Morton ordering needs 1 to 3 dimensions");
  const std::size_t n = points.size();
  std::array<double, 3> lo{}, hi{};
  for (int d = 0; d < dim; ++d) {
    lo[d] = std::numeric_limits<double>::infinity();
    hi[d] = -lo[d];
  }
  for (const auto& p : points)
    for (int d = 0; d < dim; ++d) {
      if (!std::isfinite(p[d])) throw std::invalid_argument("non-finite coordinate");
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  constexpr double scale = static_cast<double>((1u << 21) - 1);
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::array<std::uint32_t, 3> q{};
    for (int d = 0; d < dim; ++d) {
      const double span = hi[d] - lo[d];
      q[d] = span > 0 ? static_cast<std::uint32_t>(std::lround((points[v][d] - lo[d]) / span * scale)) : 0;
    }
    keyed[v] = {morton_key(q, dim), v};
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = keyed[k].second;
  return Permutation::from_order(std::move(order));
}

inline Permutation morton_reorder(const LabeledGraph& g) {
  if (!g.has_coords()) throw std::invalid_argument("Morton ordering requires node coordinates");
  return morton_reorder(g.coords, g.coord_dim);
}

struct PbrOptions {
  std::size_t t = tile_size;
  std::uint64_t seed = 0;
  FmOptions fm;
  // Extra recursive-bisection attempts with seeded random BFS starts.
  std::size_t random_restarts = 1;
};

/**
 * Partition-based reordering: minimizes the number of part pairs joined by an
 * edge over balanced partitions into consecutive groups of t nodes.
 *
 * Initial partitions come from recursive bisection (pseudo-peripheral and
 * seeded BFS growth with Kernighan-Lin cut refinement), the natural order and
 * the RCM order; each is refined by fm_refine and the best is kept. Since
 * refinement never worsens its input, the result is no worse than the natural
 * or RCM order.
 */
inline Permutation pbr_reorder(const LabeledGraph& g, const PbrOptions& opt = {}) {
  const std::size_t n = g.node_count;
  const std::size_t t = opt.t;
  if (t == 0) throw std::invalid_argument("part size must be positive");
  if (n <= t) return Permutation::identity(n);
  const Adjacency adj = build_adjacency(g);
  const std::size_t parts = (n + t - 1) / t;

  std::vector<PartitionState> seeds;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  {
    std::vector<std::size_t> assign(n);
    detail::recursive_bisection(adj, all, 0, parts, t, assign, nullptr);
    seeds.push_back(PartitionState::from_assignment(std::move(assign), t));
  }
  Rng rng(opt.seed);
  for (std::size_t r = 0; r < opt.random_restarts; ++r) {
    std::vector<std::size_t> assign(n);
    detail::recursive_bisection(adj, all, 0, parts, t, assign, &rng);
    seeds.push_back(PartitionState::from_assignment(std::move(assign), t));
  }
  seeds.push_back(PartitionState::from_permutation(Permutation::identity(n), t));
  seeds.push_back(PartitionState::from_permutation(rcm_reorder(g), t));

  std::size_t best_obj = std::numeric_limits<std::size_t>::max();
  PartitionState best;
  for (auto& s : seeds) {
    auto refined = fm_refine(g, std::move(s), opt.fm);
    const std::size_t obj = detail::partition_objective(adj, refined);
    if (obj < best_obj) {
      best_obj = obj;
      best = std::move(refined);
    }
  }
  auto perm = best.to_permutation();
  if (objective(g, perm, t) > objective(g, Permutation::identity(n), t)) return Permutation::identity(n);
  return perm;
}

inline Permutation pbr_reorder(const LabeledGraph& g, std::uint64_t seed) {
  PbrOptions opt;
  opt.seed = seed;
  return pbr_reorder(g, opt);
}

enum class ReorderMethod { none, pbr, rcm, morton };

inline ReorderMethod parse_reorder_method(const std::string& s) {
  if (s == "none" || s == "natural") return ReorderMethod::none;
  if (s == "pbr") return ReorderMethod::pbr;
  if (s == "rcm") return ReorderMethod::rcm;
  if (s == "morton") return ReorderMethod::morton;
  throw std::invalid_argument("unknown reorder method '" + s + "'");
}

inline Permutation reorder(const LabeledGraph& g, ReorderMethod m, std::uint64_t seed = 0) {
  switch (m) {
    case ReorderMethod::none: return Permutation::identity(g.node_count);
    case ReorderMethod::pbr: return pbr_reorder(g, seed);
    case ReorderMethod::rcm: return rcm_reorder(g);
    case ReorderMethod::morton: return morton_reorder(g);
  }
  return Permutation::identity(g.node_count);
}

}  // namespace mgk

#endif  // MGK_REORDER_HPP
