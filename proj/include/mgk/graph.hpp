#ifndef MGK_GRAPH_HPP
#define MGK_GRAPH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mgk {

/// Largest dimensionality of a real-vector label.
inline constexpr std::size_t max_label_dim = 4;

enum class LabelKind : std::uint8_t { none, category, vector };

/// Node or edge label: absent, a categorical token, or a short real vector.
struct Label {
  LabelKind kind = LabelKind::none;
  std::uint8_t dim = 0;
  std::int64_t token = 0;
  std::array<double, max_label_dim> x{};

  static Label category(std::int64_t t) {
    Label l;
    l.kind = LabelKind::category;
    l.token = t;
    return l;
  }

  static Label real(double v) { return vec({v}); }

  static Label vec(std::span<const double> v) {
    if (v.empty() || v.size() > max_label_dim)
      throw std::invalid_argument("vector label dimension must be in [1, " +
                                  std::to_string(max_label_dim) + "]");
    Label l;
    l.kind = LabelKind::vector;
    l.dim = static_cast<std::uint8_t>(v.size());
    std::copy(v.begin(), v.end(), l.x.begin());
    return l;
  }

  static Label vec(std::initializer_list<double> v) {
    return vec(std::span<const double>(v.begin(), v.size()));
  }

  friend bool operator==(const Label&, const Label&) = default;
};

/// Dataset-wide label declaration.
struct LabelShape {
  LabelKind kind = LabelKind::none;
  std::size_t dim = 0;

  static LabelShape none() { return {}; }
  static LabelShape category() { return {LabelKind::category, 1}; }
  static LabelShape vector(std::size_t d) { return {LabelKind::vector, d}; }

  bool matches(const Label& l) const {
    if (l.kind != kind) return false;
    return kind != LabelKind::vector || l.dim == dim;
  }

  friend bool operator==(const LabelShape&, const LabelShape&) = default;
};

inline std::string to_string(const LabelShape& s) {
  switch (s.kind) {
    case LabelKind::none: return "none";
    case LabelKind::category: return "category";
    case LabelKind::vector: return "vector[" + std::to_string(s.dim) + "]";
  }
  return "?";
}

/// Undirected weighted edge, stored once per unordered pair.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 1.0;
  Label label;

  friend bool operator==(const Edge&, const Edge&) = default;
};

using Point = std::array<double, 3>;

struct LabeledGraph {
  std::size_t node_count = 0;
  std::vector<Label> node_labels;
  std::vector<double> start_prob;
  std::vector<double> stop_prob;
  std::vector<Edge> edges;
  LabelShape node_shape;
  LabelShape edge_shape;
  // Optional embedding, used only by space-filling-curve reordering.
  std::vector<Point> coords;
  int coord_dim = 0;

  std::size_t size() const { return node_count; }
  bool has_coords() const { return coord_dim > 0 && coords.size() == node_count; }

  friend bool operator==(const LabeledGraph&, const LabeledGraph&) = default;
};

inline constexpr double default_stop_prob = 0.05;
inline constexpr double min_stop_prob = 0.0005;

/// Fills absent probability vectors: p uniform, q constant.
inline void attach_default_probabilities(LabeledGraph& g, double q0 = default_stop_prob) {
  if (!(q0 > 0.0 && q0 <= 1.0))
    throw std::invalid_argument("default stopping probability must lie in (0, 1]");
  const std::size_t n = g.node_count;
  if (g.start_prob.empty() && n > 0) g.start_prob.assign(n, 1.0 / static_cast<double>(n));
  if (g.stop_prob.empty()) g.stop_prob.assign(n, q0);
}

/// Unlabeled graph from an edge list with default probabilities.
inline LabeledGraph make_graph(std::size_t n,
                               const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                               double q0 = default_stop_prob) {
  LabeledGraph g;
  g.node_count = n;
  g.node_labels.assign(n, Label{});
  for (auto [i, j] : edges) g.edges.push_back({i, j, 1.0, {}});
  attach_default_probabilities(g, q0);
  return g;
}

struct Violation {
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  std::string summary() const {
    std::string s;
    for (const auto& v : violations) {
      if (!s.empty()) s += "; ";
      s += v.message;
    }
    return s;
  }
};

inline ValidationReport validate_graph(const LabeledGraph& g) {
  ValidationReport rep;
  auto fail = [&](std::string m) { rep.violations.push_back({std::move(m)}); };
  const std::size_t n = g.node_count;

  if (g.node_labels.size() != n)
    fail("node label count " + std::to_string(g.node_labels.size()) + " != node count " +
         std::to_string(n));
  if (g.start_prob.size() != n)
    fail("starting probability count " + std::to_string(g.start_prob.size()) + " != node count");
  if (g.stop_prob.size() != n)
    fail("stopping probability count " + std::to_string(g.stop_prob.size()) + " != node count");

  for (std::size_t i = 0; i < g.node_labels.size(); ++i)
    if (!g.node_shape.matches(g.node_labels[i]))
      fail("node label at node " + std::to_string(i) + " does not match declared shape " +
           to_string(g.node_shape));
  for (std::size_t i = 0; i < g.start_prob.size(); ++i)
    if (!(g.start_prob[i] >= 0.0) || !std::isfinite(g.start_prob[i]))
      fail("starting probability must be >= 0 at node " + std::to_string(i));
  for (std::size_t i = 0; i < g.stop_prob.size(); ++i) {
    if (!(g.stop_prob[i] > 0.0))
      fail("stopping probability must be > 0 at node " + std::to_string(i));
    else if (!(g.stop_prob[i] <= 1.0))
      fail("stopping probability must be <= 1 at node " + std::to_string(i));
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const Edge& ed = g.edges[e];
    if (ed.i >= n || ed.j >= n) {
      fail("edge " + std::to_string(e) + " references unknown node " +
           std::to_string(std::max(ed.i, ed.j)));
      continue;
    }
    if (ed.i == ed.j) {
      fail("self-loop at node " + std::to_string(ed.i));
      continue;
    }
    if (!(ed.weight > 0.0) || !std::isfinite(ed.weight))
      fail("edge weight must be > 0 on edge " + std::to_string(e));
    if (!g.edge_shape.matches(ed.label))
      fail("edge label on edge " + std::to_string(e) + " does not match declared shape " +
           to_string(g.edge_shape));
    if (!seen.insert(std::minmax(ed.i, ed.j)).second)
      fail("duplicate edge (" + std::to_string(ed.i) + "," + std::to_string(ed.j) + ")");
  }
  if (!g.coords.empty() && g.coords.size() != n) fail("coordinate count != node count");
  return rep;
}

/// Throws std::invalid_argument carrying every violation.
inline void require_valid(const LabeledGraph& g) {
  auto rep = validate_graph(g);
  if (!rep.ok()) throw std::invalid_argument("invalid graph: " + rep.summary());
}

/// d_i = sum_j A_ij + q_i
inline std::vector<double> degree_vector(const LabeledGraph& g) {
  std::vector<double> d(g.node_count, 0.0);
  for (const Edge& e : g.edges) {
    d[e.i] += e.weight;
    d[e.j] += e.weight;
  }
  for (std::size_t i = 0; i < g.node_count; ++i) d[i] += g.stop_prob[i];
  return d;
}

/// Row-major dense matrix, small sizes only.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline DenseMatrix adjacency_matrix(const LabeledGraph& g) {
  DenseMatrix a(g.node_count, g.node_count);
  for (const Edge& e : g.edges) {
    a(e.i, e.j) = e.weight;
    a(e.j, e.i) = e.weight;
  }
  return a;
}

/// P = D^-1 A
inline DenseMatrix transition_matrix(const LabeledGraph& g) {
  const auto d = degree_vector(g);
  DenseMatrix p = adjacency_matrix(g);
  for (std::size_t i = 0; i < p.rows; ++i)
    for (std::size_t j = 0; j < p.cols; ++j) p(i, j) /= d[i];
  return p;
}

/// Compressed neighbor lists (both directions of every edge).
struct Adjacency {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> targets;
  std::vector<double> weights;

  std::size_t degree(std::size_t v) const { return offsets[v + 1] - offsets[v]; }
  std::span<const std::size_t> neighbors(std::size_t v) const {
    return {targets.data() + offsets[v], degree(v)};
  }
};

inline Adjacency build_adjacency(const LabeledGraph& g) {
  Adjacency adj;
  const std::size_t n = g.node_count;
  adj.offsets.assign(n + 1, 0);
  for (const Edge& e : g.edges) {
    ++adj.offsets[e.i + 1];
    ++adj.offsets[e.j + 1];
  }
  for (std::size_t v = 0; v < n; ++v) adj.offsets[v + 1] += adj.offsets[v];
  adj.targets.resize(adj.offsets[n]);
  adj.weights.resize(adj.offsets[n]);
  std::vector<std::size_t> fill(adj.offsets.begin(), adj.offsets.end() - 1);
  for (const Edge& e : g.edges) {
    adj.targets[fill[e.i]] = e.j;
    adj.weights[fill[e.i]++] = e.weight;
    adj.targets[fill[e.j]] = e.i;
    adj.weights[fill[e.j]++] = e.weight;
  }
  // Sorted neighbor lists make traversal orders reproducible.
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t k = adj.offsets[v]; k < adj.offsets[v + 1]; ++k)
      row.emplace_back(adj.targets[k], adj.weights[k]);
    std::sort(row.begin(), row.end());
    for (std::size_t k = 0; k < row.size(); ++k) {
      adj.targets[adj.offsets[v] + k] = row[k].first;
      adj.weights[adj.offsets[v] + k] = row[k].second;
    }
  }
  return adj;
}

}  // namespace mgk

#endif  // MGK_GRAPH_HPP
