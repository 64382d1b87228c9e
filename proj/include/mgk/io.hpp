#ifndef MGK_IO_HPP
#define MGK_IO_HPP

// Graph files, edge lists and point clouds.
//
// Graph file schema (JSON):
//   {
//     "name": "optional string",
//     "node_label": {"kind": "none" | "category" | "vector", "dim": D},
//     "edge_label": {"kind": ..., "dim": D},
//     "nodes": [{"id": 0, "label": L}, ...],
//     "edges": [{"i": 0, "j": 1, "w": 1.0, "label": L}, ...],
//     "start_prob": [...], "stop_prob": [...],   optional
//     "coords": [[x, y(, z)], ...]               optional
//   }
// A category label is an integer, a vector label an array of D numbers. The
// label member is omitted for kind "none", and so is "w" for unit weight.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgk/graph.hpp"

namespace mgk {

class GraphFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void format_error(const std::string& where, const std::string& what) {
  throw GraphFormatError(where + ": " + what);
}

inline LabelShape shape_from_json(const json& j, const std::string& where) {
  if (j.is_null()) return LabelShape::none();
  if (!j.is_object() || !j.contains("kind")) format_error(where, "expected {\"kind\": ...}");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "none") return LabelShape::none();
  if (kind == "category") return LabelShape::category();
  if (kind == "vector") {
    const auto dim = j.value("dim", std::size_t{0});
    if (dim == 0 || dim > max_label_dim)
      format_error(where + ".dim", "vector dimension must be in [1, " + std::to_string(max_label_dim) + "]");
    return LabelShape::vector(dim);
  }
  format_error(where + ".kind", "unknown label kind '" + kind + "'");
}

inline json shape_to_json(const LabelShape& s) {
  switch (s.kind) {
    case LabelKind::none: return {{"kind", "none"}};
    case LabelKind::category: return {{"kind", "category"}};
    case LabelKind::vector: return {{"kind", "vector"}, {"dim", s.dim}};
  }
  return {};
}

inline Label label_from_json(const json& obj, const LabelShape& shape, const std::string& where) {
  if (shape.kind == LabelKind::none) {
    if (obj.contains("label") && !obj.at("label").is_null())
      format_error(where + ".label", "label given but declared kind is none");
    return {};
  }
  if (!obj.contains("label")) format_error(where + ".label", "missing label");
  const json& v = obj.at("label");
  if (shape.kind == LabelKind::category) {
    if (!v.is_number_integer()) format_error(where + ".label", "expected integer category");
    return Label::category(v.get<std::int64_t>());
  }
  std::vector<double> x;
  if (v.is_number()) {
    x.push_back(v.get<double>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) format_error(where + ".label", "expected numbers");
      x.push_back(e.get<double>());
    }
  } else {
    format_error(where + ".label", "expected number array");
  }
  if (x.size() != shape.dim)
    format_error(where + ".label", "label has dimension " + std::to_string(x.size()) + ", declared " +
                                       std::to_string(shape.dim));
  return Label::vec(x);
}

inline json label_to_json(const Label& l) {
  if (l.kind == LabelKind::category) return l.token;
  json a = json::array();
  for (std::size_t k = 0; k < l.dim; ++k) a.push_back(l.x[k]);
  return a;
}

inline std::vector<double> number_array(const json& j, const std::string& where, std::size_t n) {
  if (!j.is_array()) format_error(where, "expected array");
  if (j.size() != n) format_error(where, "expected " + std::to_string(n) + " entries");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) format_error(where + "[" + std::to_string(k) + "]", "expected number");
    out.push_back(j[k].get<double>());
  }
  return out;
}

inline std::size_t node_ref(const json& e, const char* key, std::size_t n, const std::string& where) {
  const std::string w = where + "." + key;
  if (!e.contains(key)) format_error(w, "missing");
  const json& v = e.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) format_error(w, "expected node id");
  const auto id = v.get<std::size_t>();
  if (id >= n) format_error(w, "unknown node id " + std::to_string(id));
  return id;
}

}  // namespace detail

/// Parses a graph document. Probabilities default as in attach_default_probabilities.
inline LabeledGraph parse_graph(const std::string& text, double q0 = default_stop_prob) {
  using detail::format_error;
  detail::json doc;
  try {
    doc = detail::json::parse(text);
  } catch (const detail::json::parse_error& e) {
    throw GraphFormatError(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) format_error("<root>", "expected object");
  LabeledGraph g;
  g.node_shape = detail::shape_from_json(doc.value("node_label", detail::json()), "node_label");
  g.edge_shape = detail::shape_from_json(doc.value("edge_label", detail::json()), "edge_label");
  if (!doc.contains("nodes") || !doc.at("nodes").is_array()) format_error("nodes", "expected array");
  const auto& nodes = doc.at("nodes");
  const std::size_t n = nodes.size();
  g.node_count = n;
  g.node_labels.assign(n, Label{});
  std::vector<char> seen(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::string where = "nodes[" + std::to_string(k) + "]";
    const auto& v = nodes[k];
    if (!v.is_object()) format_error(where, "expected object");
    const std::size_t id = v.contains("id") ? detail::node_ref(v, "id", n, where) : k;
    if (seen[id]) format_error(where + ".id", "duplicate node id " + std::to_string(id));
    seen[id] = 1;
    g.node_labels[id] = detail::label_from_json(v, g.node_shape, where);
  }
  if (doc.contains("edges")) {
    const auto& edges = doc.at("edges");
    if (!edges.is_array()) format_error("edges", "expected array");
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const std::string where = "edges[" + std::to_string(k) + "]";
      const auto& e = edges[k];
      if (!e.is_object()) format_error(where, "expected object");
      Edge edge;
      edge.i = detail::node_ref(e, "i", n, where);
      edge.j = detail::node_ref(e, "j", n, where);
      if (e.contains("w")) {
        if (!e.at("w").is_number()) format_error(where + ".w", "expected number");
        edge.weight = e.at("w").get<double>();
      }
      edge.label = detail::label_from_json(e, g.edge_shape, where);
      g.edges.push_back(edge);
    }
  }
  if (doc.contains("start_prob")) g.start_prob = detail::number_array(doc.at("start_prob"), "start_prob", n);
  if (doc.contains("stop_prob")) g.stop_prob = detail::number_array(doc.at("stop_prob"), "stop_prob", n);
  if (doc.contains("coords")) {
    const auto& c = doc.at("coords");
    if (!c.is_array() || c.size() != n) format_error("coords", "expected one point per node");
    g.coords.assign(n, Point{});
    for (std::size_t k = 0; k < n; ++k) {
      const std::string where = "coords[" + std::to_string(k) + "]";
      const std::size_t dim = c[k].is_array() ? c[k].size() : 0;
      if (dim < 1 || dim > 3) format_error(where, "expected 1 to 3 coordinates");
      if (k == 0) g.coord_dim = static_cast<int>(dim);
      if (static_cast<int>(dim) != g.coord_dim) format_error(where, "mixed dimensionality");
      const auto x = detail::number_array(c[k], where, dim);
      std::copy(x.begin(), x.end(), g.coords[k].begin());
    }
  }
  attach_default_probabilities(g, q0);
  const auto report = validate_graph(g);
  if (!report.ok()) throw GraphFormatError(report.summary());
  return g;
}

inline std::string serialize_graph(const LabeledGraph& g, const std::string& name = {}) {
  detail::json doc;
  if (!name.empty()) doc["name"] = name;
  doc["node_label"] = detail::shape_to_json(g.node_shape);
  doc["edge_label"] = detail::shape_to_json(g.edge_shape);
  auto nodes = detail::json::array();
  for (std::size_t k = 0; k < g.node_count; ++k) {
    detail::json v = {{"id", k}};
    if (g.node_labels[k].kind != LabelKind::none) v["label"] = detail::label_to_json(g.node_labels[k]);
    nodes.push_back(v);
  }
  doc["nodes"] = nodes;
  auto edges = detail::json::array();
  for (const auto& e : g.edges) {
    detail::json v = {{"i", e.i}, {"j", e.j}};
    if (e.weight != 1.0) v["w"] = e.weight;
    if (e.label.kind != LabelKind::none) v["label"] = detail::label_to_json(e.label);
    edges.push_back(v);
  }
  doc["edges"] = edges;
  doc["start_prob"] = g.start_prob;
  doc["stop_prob"] = g.stop_prob;
  if (g.has_coords()) {
    auto c = detail::json::array();
    for (const auto& p : g.coords) c.push_back(std::vector<double>(p.begin(), p.begin() + g.coord_dim));
    doc["coords"] = c;
  }
  return doc.dump(1);
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Loads a JSON graph file, or an "i j [w]" edge list when the extension is .txt or .edges.
inline LabeledGraph load_graph(const std::filesystem::path& path, double q0 = default_stop_prob);

inline void save_graph(const LabeledGraph& g, const std::filesystem::path& path, const std::string& name = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_graph(g, name) << '\n';
}

/**
 * Unlabeled graph from "i j [w]" lines. Blank lines and lines starting with
 * '#' are skipped. The node count is one past the largest id.
 */
inline LabeledGraph parse_edge_list(const std::string& text, double q0 = default_stop_prob) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0, n = 0;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long i = -1, j = -1;
    double w = 1.0;
    if (!(ls >> i >> j) || i < 0 || j < 0)
      throw GraphFormatError("line " + std::to_string(lineno) + ": expected 'i j [w]'");
    if (!(ls >> w)) w = 1.0;
    edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w, {}});
    n = std::max({n, static_cast<std::size_t>(i) + 1, static_cast<std::size_t>(j) + 1});
  }
  LabeledGraph g;
  g.node_count = n;
  g.node_labels.assign(n, Label{});
  g.edges = std::move(edges);
  attach_default_probabilities(g, q0);
  const auto report = validate_graph(g);
  if (!report.ok()) throw GraphFormatError(report.summary());
  return g;
}

inline LabeledGraph load_graph(const std::filesystem::path& path, double q0) {
  const auto text = read_text_file(path);
  const auto ext = path.extension().string();
  try {
    if (ext == ".txt" || ext == ".edges") return parse_edge_list(text, q0);
    return parse_graph(text, q0);
  } catch (const GraphFormatError& e) {
    throw GraphFormatError(path.string() + ": " + e.what());
  }
}

struct PointCloud {
  int dim = 3;
  std::vector<Point> points;
  std::vector<std::int64_t> labels;  // categorical, e.g. element type
};

/// Point cloud text: one point per line, "label x y [z]"; every line has the same dimension.
inline PointCloud parse_point_cloud(const std::string& text) {
  PointCloud pc;
  pc.dim = 0;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::int64_t label;
    if (!(ls >> label)) throw GraphFormatError("line " + std::to_string(lineno) + ": expected label");
    Point p{};
    int d = 0;
    double v;
    while (ls >> v) {
      if (d == 3) throw GraphFormatError("line " + std::to_string(lineno) + ": more than 3 coordinates");
      p[d++] = v;
    }
    if (d < 2) throw GraphFormatError("line " + std::to_string(lineno) + ": expected 2 or 3 coordinates");
    if (pc.dim == 0) pc.dim = d;
    if (d != pc.dim) throw GraphFormatError("line " + std::to_string(lineno) + ": mixed dimensionality");
    pc.points.push_back(p);
    pc.labels.push_back(label);
  }
  if (pc.dim == 0) pc.dim = 3;
  return pc;
}

/// Smooth cutoff weight (1 - (d/rc)^2)^2 for d < rc, else 0.
inline double spatial_weight(double d, double rc) {
  if (!(d < rc)) return 0.0;
  const double s = 1.0 - (d / rc) * (d / rc);
  return s * s;
}

/**
 * Spatial adjacency graph: an edge joins points closer than rc, weighted by
 * spatial_weight and labeled with the distance. Node labels are the point
 * categories; coordinates are kept for space-filling-curve reordering.
 */
inline LabeledGraph spatial_graph(const PointCloud& pc, double rc, double q0 = default_stop_prob) {
  if (!(rc > 0.0)) throw std::invalid_argument("cutoff must be > 0");
  if (pc.labels.size() != pc.points.size()) throw std::invalid_argument("one label per point required");
  LabeledGraph g;
  const std::size_t n = pc.points.size();
  g.node_count = n;
  g.node_shape = LabelShape::category();
  g.edge_shape = LabelShape::vector(1);
  for (auto l : pc.labels) g.node_labels.push_back(Label::category(l));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < pc.dim; ++k) s += (pc.points[i][k] - pc.points[j][k]) * (pc.points[i][k] - pc.points[j][k]);
      const double d = std::sqrt(s);
      if (d < rc) g.edges.push_back({i, j, spatial_weight(d, rc), Label::real(d)});
    }
  g.coords = pc.points;
  g.coord_dim = pc.dim;
  attach_default_probabilities(g, q0);
  return g;
}

}  // namespace mgk

#endif  // MGK_IO_HPP
