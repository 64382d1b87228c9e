#ifndef MGK_PRODUCT_OPERATOR_HPP
#define MGK_PRODUCT_OPERATOR_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mgk/counters.hpp"
#include "mgk/graph.hpp"
#include "mgk/kernels.hpp"
#include "mgk/tiles.hpp"

namespace mgk {

/// t x t block of the search direction or of the accumulated output,
/// indexed [local row of graph A * t + local row of graph B].
using Block = std::array<double, tile_area>;

/// Register chunk length of the dense tile product.
inline constexpr std::size_t register_chunk = 8;

// Working-set element loads of one dense tile pair: a length-r chunk of the
// first tile per (i, i', chunk) and of the second per (i, i', chunk, chunk').
inline constexpr std::uint64_t dense_pair_t2_loads =
    tile_area * tile_size + tile_area * tile_area / register_chunk;

/// Edge kernel policy for unlabeled graphs: every label pair scores 1.
struct UnitEdgeKernel {
  static constexpr bool labeled = false;
  double operator()(const Label&, const Label&) const { return 1.0; }
};

/// Edge kernel policy dispatching to a BaseKernel.
struct EdgeKernelRef {
  static constexpr bool labeled = true;
  const BaseKernel* kernel;
  double operator()(const Label& a, const Label& b) const { return (*kernel)(a, b); }
};

namespace detail {

// Raw-pointer micro-kernels. Labels may be null when EK::labeled is false.
// Each returns the number of fused contributions performed.

template <class EK>
std::uint64_t dense_dense(const double* aw, const Label* al, const double* bw, const Label* bl,
                          const Block& p, Block& acc, const EK& ek) {
  for (std::size_t i = 0; i < tile_size; ++i)
    for (std::size_t ii = 0; ii < tile_size; ++ii) {
      double s = acc[i * tile_size + ii];
      for (std::size_t j = 0; j < tile_size; ++j) {
        const double a = aw[i * tile_size + j];
        for (std::size_t jj = 0; jj < tile_size; ++jj) {
          if constexpr (EK::labeled)
            s += a * bw[ii * tile_size + jj] * ek(al[i * tile_size + j], bl[ii * tile_size + jj]) *
                 p[j * tile_size + jj];
          else
            s += a * bw[ii * tile_size + jj] * p[j * tile_size + jj];
        }
      }
      acc[i * tile_size + ii] = s;
    }
  return tile_area * tile_area;
}

template <class EK>
std::uint64_t sparse_sparse(std::uint64_t abits, const double* aw, const Label* al,
                            std::uint64_t bbits, const double* bw, const Label* bl, const Block& p,
                            Block& acc, const EK& ek) {
  std::uint64_t count = 0;
  std::size_t ra = 0;
  for (std::uint64_t x = abits; x; x &= x - 1, ++ra) {
    const unsigned ba = static_cast<unsigned>(std::countr_zero(x));
    const std::size_t i = ba / tile_size, j = ba % tile_size;
    const double wa = aw[ra];
    std::size_t rb = 0;
    for (std::uint64_t y = bbits; y; y &= y - 1, ++rb) {
      const unsigned bb = static_cast<unsigned>(std::countr_zero(y));
      const std::size_t ii = bb / tile_size, jj = bb % tile_size;
      if constexpr (EK::labeled)
        acc[i * tile_size + ii] += wa * bw[rb] * ek(al[ra], bl[rb]) * p[j * tile_size + jj];
      else
        acc[i * tile_size + ii] += wa * bw[rb] * p[j * tile_size + jj];
      ++count;
    }
  }
  return count;
}

// First operand dense, second compact.
template <class EK>
std::uint64_t dense_sparse(const double* aw, const Label* al, std::uint64_t bbits, const double* bw,
                           const Label* bl, const Block& p, Block& acc, const EK& ek) {
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < tile_size; ++i)
    for (std::size_t j = 0; j < tile_size; ++j) {
      const double a = aw[i * tile_size + j];
      std::size_t rb = 0;
      for (std::uint64_t y = bbits; y; y &= y - 1, ++rb) {
        const unsigned bb = static_cast<unsigned>(std::countr_zero(y));
        const std::size_t ii = bb / tile_size, jj = bb % tile_size;
        if constexpr (EK::labeled)
          acc[i * tile_size + ii] += a * bw[rb] * ek(al[i * tile_size + j], bl[rb]) * p[j * tile_size + jj];
        else
          acc[i * tile_size + ii] += a * bw[rb] * p[j * tile_size + jj];
        ++count;
      }
    }
  return count;
}

// First operand compact, second dense.
template <class EK>
std::uint64_t sparse_dense(std::uint64_t abits, const double* aw, const Label* al, const double* bw,
                           const Label* bl, const Block& p, Block& acc, const EK& ek) {
  std::uint64_t count = 0;
  std::size_t ra = 0;
  for (std::uint64_t x = abits; x; x &= x - 1, ++ra) {
    const unsigned ba = static_cast<unsigned>(std::countr_zero(x));
    const std::size_t i = ba / tile_size, j = ba % tile_size;
    const double wa = aw[ra];
    for (std::size_t ii = 0; ii < tile_size; ++ii) {
      double s = 0.0;
      for (std::size_t jj = 0; jj < tile_size; ++jj) {
        if constexpr (EK::labeled)
          s += wa * bw[ii * tile_size + jj] * ek(al[ra], bl[ii * tile_size + jj]) * p[j * tile_size + jj];
        else
          s += wa * bw[ii * tile_size + jj] * p[j * tile_size + jj];
      }
      acc[i * tile_size + ii] += s;
    }
    count += tile_area;
  }
  return count;
}

inline const Label* labels_of(const Tile& t) { return t.labels.empty() ? nullptr : t.labels.data(); }

}  // namespace detail

/// All 64 x 64 contributions of two expanded tiles, loop order (i, i', j, j').
template <class EK = UnitEdgeKernel>
std::uint64_t tile_product_dense_dense(const DenseTile& a, const DenseTile& b, const Block& p, Block& acc,
                                       const EK& ek = {}) {
  return detail::dense_dense(a.weights.data(), a.labels.data(), b.weights.data(), b.labels.data(), p, acc, ek);
}

/// Only set-bit pairs of two compact tiles.
template <class EK = UnitEdgeKernel>
std::uint64_t tile_product_sparse_sparse(const Tile& a, const Tile& b, const Block& p, Block& acc,
                                         const EK& ek = {}) {
  return detail::sparse_sparse(a.bitmap, a.weights.data(), detail::labels_of(a), b.bitmap, b.weights.data(),
                               detail::labels_of(b), p, acc, ek);
}

/// Dense rows of the first tile against the set bits of the second.
template <class EK = UnitEdgeKernel>
std::uint64_t tile_product_dense_sparse(const DenseTile& a, const Tile& b, const Block& p, Block& acc,
                                        const EK& ek = {}) {
  return detail::dense_sparse(a.weights.data(), a.labels.data(), b.bitmap, b.weights.data(),
                              detail::labels_of(b), p, acc, ek);
}

template <class EK = UnitEdgeKernel>
std::uint64_t tile_product_sparse_dense(const Tile& a, const DenseTile& b, const Block& p, Block& acc,
                                        const EK& ek = {}) {
  return detail::sparse_dense(a.bitmap, a.weights.data(), detail::labels_of(a), b.weights.data(),
                              b.labels.data(), p, acc, ek);
}

enum class TileKernel { sparse_sparse, dense_sparse, dense_dense };

inline std::string to_string(TileKernel k) {
  switch (k) {
    case TileKernel::sparse_sparse: return "sparse x sparse";
    case TileKernel::dense_sparse: return "dense x sparse";
    case TileKernel::dense_dense: return "dense x dense";
  }
  return "?";
}

/// Crossovers between the tile-product variants, in nonzeros per tile.
struct SelectionThresholds {
  int sparse_min = 10;  // sparse x sparse needs min(nnz) <= sparse_min ...
  int sparse_max = 16;  // ... and max(nnz) <= sparse_max
  int dense_min = 20;   // dense x dense needs both nnz >= dense_min

  static SelectionThresholds unlabeled() { return {10, 16, 20}; }
  static SelectionThresholds labeled() { return {16, 24, 28}; }
};

inline TileKernel select_tile_kernel(int nnz_a, int nnz_b, const SelectionThresholds& th) {
  const int lo = std::min(nnz_a, nnz_b), hi = std::max(nnz_a, nnz_b);
  if (lo <= th.sparse_min && hi <= th.sparse_max) return TileKernel::sparse_sparse;
  if (lo >= th.dense_min) return TileKernel::dense_dense;
  return TileKernel::dense_sparse;
}

inline TileKernel select_tile_kernel(int nnz_a, int nnz_b, bool labeled) {
  return select_tile_kernel(nnz_a, nnz_b,
                            labeled ? SelectionThresholds::labeled() : SelectionThresholds::unlabeled());
}

/// Per-graph data shared by every operator the graph takes part in.
struct PreparedGraph {
  LabeledGraph graph;
  TiledMatrix tiles;
  std::vector<std::array<double, tile_area>> dense_weights;
  std::vector<std::array<Label, tile_area>> dense_labels;  // labeled graphs only
  std::vector<int> nnz;
  std::vector<double> degree;
};

inline std::shared_ptr<const PreparedGraph> prepare_graph(const LabeledGraph& g) {
  require_valid(g);
  auto pg = std::make_shared<PreparedGraph>();
  pg->graph = g;
  pg->tiles = build_tiles(g);
  pg->degree = degree_vector(g);
  for (const auto& t : pg->tiles.tiles) {
    const auto d = expand_tile(t);
    pg->dense_weights.push_back(d.weights);
    if (pg->tiles.labeled) pg->dense_labels.push_back(d.labels);
    pg->nnz.push_back(t.nnz());
  }
  return pg;
}

/// Raw event counts accumulated by apply_offdiag.
struct RawCounters {
  std::uint64_t applies = 0;
  std::uint64_t tile_pairs = 0;
  std::uint64_t pairs_dense_dense = 0;
  std::uint64_t pairs_dense_sparse = 0;
  std::uint64_t pairs_sparse_sparse = 0;
  std::uint64_t contributions = 0;
  std::uint64_t t1_weights = 0;
  std::uint64_t t1_labels = 0;
  std::uint64_t t1_rhs = 0;
  std::uint64_t t1_stores = 0;
  std::uint64_t t1_outer_weights = 0;
  std::uint64_t t1_outer_labels = 0;
  std::uint64_t t2_load_weights = 0;
  std::uint64_t t2_load_labels = 0;
  std::uint64_t t2_store_weights = 0;
  std::uint64_t t2_store_labels = 0;

  RawCounters& operator+=(const RawCounters& o) {
    applies += o.applies;
    tile_pairs += o.tile_pairs;
    pairs_dense_dense += o.pairs_dense_dense;
    pairs_dense_sparse += o.pairs_dense_sparse;
    pairs_sparse_sparse += o.pairs_sparse_sparse;
    contributions += o.contributions;
    t1_weights += o.t1_weights;
    t1_labels += o.t1_labels;
    t1_rhs += o.t1_rhs;
    t1_stores += o.t1_stores;
    t1_outer_weights += o.t1_outer_weights;
    t1_outer_labels += o.t1_outer_labels;
    t2_load_weights += o.t2_load_weights;
    t2_load_labels += o.t2_load_labels;
    t2_store_weights += o.t2_store_weights;
    t2_store_labels += o.t2_store_labels;
    return *this;
  }
};

enum class OperatorMode { automatic, labeled, unlabeled };
enum class TilePolicy { hybrid, dense, sparse, mixed };

struct OperatorOptions {
  OperatorMode mode = OperatorMode::automatic;
  TilePolicy policy = TilePolicy::hybrid;
  std::optional<SelectionThresholds> thresholds;
  double vertex_floor = 1e-12;
  std::size_t threads = 1;
};

/**
 * Matrix-free form of D V^-1 - A (.) E for one graph pair.
 *
 * Flat index of node pair (i, i') is i * m + i', m the size of the second
 * graph. Only the diagonal (n*m entries) is stored; the off-diagonal part is
 * regenerated from the stored tiles on every product. Counters are updated by
 * each product, so one operator must not be applied from two threads at once.
 */
class ProductOperator {
 public:
  ProductOperator(std::shared_ptr<const PreparedGraph> a, std::shared_ptr<const PreparedGraph> b,
                  BaseKernel vertex_kernel, BaseKernel edge_kernel, OperatorOptions opt = {})
      : a_(std::move(a)), b_(std::move(b)), vk_(std::move(vertex_kernel)), ek_(std::move(edge_kernel)),
        opt_(opt) {
    vk_.with_role(KernelRole::vertex);
    ek_.with_role(KernelRole::edge);
    const auto& ga = a_->graph;
    const auto& gb = b_->graph;
    if (!vk_.is_constant_one()) {
      vk_.check_shape(ga.node_shape);
      vk_.check_shape(gb.node_shape);
      if (ga.node_shape != gb.node_shape)
        throw KernelShapeError("node label shapes differ: " + to_string(ga.node_shape) + " vs " +
                               to_string(gb.node_shape));
    }
    switch (opt_.mode) {
      case OperatorMode::automatic: labeled_ = !ek_.is_constant_one(); break;
      case OperatorMode::labeled: labeled_ = true; break;
      case OperatorMode::unlabeled:
        if (!ek_.is_constant_one()) throw std::invalid_argument("unlabeled mode requires the const1 edge kernel");
        labeled_ = false;
        break;
    }
    if (labeled_) {
      ek_.check_shape(ga.edge_shape);
      ek_.check_shape(gb.edge_shape);
      if (ga.edge_shape != gb.edge_shape)
        throw KernelShapeError("edge label shapes differ: " + to_string(ga.edge_shape) + " vs " +
                               to_string(gb.edge_shape));
      if (!a_->tiles.labeled && !a_->tiles.tiles.empty())
        throw KernelShapeError("labeled mode requires edge labels");
      if (!b_->tiles.labeled && !b_->tiles.tiles.empty())
        throw KernelShapeError("labeled mode requires edge labels");
    }
    thresholds_ = opt_.thresholds.value_or(labeled_ ? SelectionThresholds::labeled()
                                                    : SelectionThresholds::unlabeled());
    const std::size_t n = ga.node_count, m = gb.node_count;
    diag_.resize(n * m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < m; ++k) {
        double kv = vk_(ga.node_labels[i], gb.node_labels[k]);
        if (!(kv > 0.0) && !(opt_.vertex_floor > 0.0))
          throw std::domain_error("vertex kernel must be positive");
        kv = std::max(kv, opt_.vertex_floor);
        diag_[i * m + k] = a_->degree[i] * b_->degree[k] / kv;
      }
  }

  ProductOperator(const LabeledGraph& a, const LabeledGraph& b, BaseKernel vertex_kernel,
                  BaseKernel edge_kernel, OperatorOptions opt = {})
      : ProductOperator(prepare_graph(a), prepare_graph(b), std::move(vertex_kernel), std::move(edge_kernel),
                        opt) {}

  std::size_t n() const { return a_->graph.node_count; }
  std::size_t m() const { return b_->graph.node_count; }
  std::size_t size() const { return n() * m(); }
  bool labeled() const { return labeled_; }
  const PreparedGraph& first() const { return *a_; }
  const PreparedGraph& second() const { return *b_; }
  const BaseKernel& vertex_kernel() const { return vk_; }
  const BaseKernel& edge_kernel() const { return ek_; }
  const SelectionThresholds& thresholds() const { return thresholds_; }
  std::span<const double> diagonal() const { return diag_; }

  /// out = (D V^-1) p
  void apply_diag(std::span<const double> p, std::span<double> out) const {
    check_dims(p, out);
    for (std::size_t k = 0; k < diag_.size(); ++k) out[k] = diag_[k] * p[k];
  }

  /// out = ((A (x) A') (.) (E k(x) E')) p, summed over stored tile pairs only.
  void apply_offdiag(std::span<const double> p, std::span<double> out) const {
    check_dims(p, out);
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t rows = a_->tiles.tile_rows();
    const std::size_t workers = std::max<std::size_t>(1, std::min(opt_.threads, rows));
    if (workers == 1) {
      RawCounters local;
      for (std::size_t I = 0; I < rows; ++I) stripe(I, p, out, local);
      local.applies = 1;
      counters_ += local;
      return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<RawCounters> locals(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t I; (I = next.fetch_add(1)) < rows;) stripe(I, p, out, locals[w]);
      });
    for (auto& th : pool) th.join();
    for (const auto& l : locals) counters_ += l;
    counters_.applies += 1;
  }

  /// out = (D V^-1 - A (.) E) p
  void apply(std::span<const double> p, std::span<double> out) const {
    apply_offdiag(p, out);
    for (std::size_t k = 0; k < diag_.size(); ++k) out[k] = diag_[k] * p[k] - out[k];
  }

  std::vector<double> apply(std::span<const double> p) const {
    std::vector<double> out(size());
    apply(p, out);
    return out;
  }
  std::vector<double> apply_offdiag(std::span<const double> p) const {
    std::vector<double> out(size());
    apply_offdiag(p, out);
    return out;
  }
  std::vector<double> apply_diag(std::span<const double> p) const {
    std::vector<double> out(size());
    apply_diag(p, out);
    return out;
  }

  const RawCounters& counters() const { return counters_; }
  void reset_counters() const { counters_ = {}; }

  /// Per-contribution flops: multiply, multiply, add, plus the edge kernel.
  int declared_flops() const { return 3 + (labeled_ ? ek_.flops(a_->graph.edge_shape) : 0); }

  /// Cost model matching this operator's storage: doubles, 8 bytes per label component.
  CostModel cost_model() const {
    CostModel c;
    c.F = 8;
    c.E = labeled_ ? 8.0 * static_cast<double>(std::max<std::size_t>(1, a_->graph.edge_shape.dim)) : 0.0;
    c.X = declared_flops();
    return c;
  }

  CounterReport measure_counters(const CostModel& c) const {
    const RawCounters& k = counters_;
    auto d = [](std::uint64_t v) { return static_cast<double>(v); };
    CounterReport r;
    r.flops = d(k.contributions) * c.X;
    r.t1_load = d(k.t1_weights + k.t1_rhs) * c.F + d(k.t1_labels) * c.E;
    r.t1_store = d(k.t1_stores) * c.F;
    r.t2_load = d(k.t2_load_weights) * c.F + d(k.t2_load_labels) * c.E;
    r.t2_store = d(k.t2_store_weights) * c.F + d(k.t2_store_labels) * c.E;
    r.t1_outer_load = d(k.t1_outer_weights) * c.F + d(k.t1_outer_labels) * c.E;
    const double m1 = r.t1_load + r.t1_store, m2 = r.t2_load + r.t2_store;
    r.ai1 = m1 > 0 ? r.flops / m1 : 0.0;
    r.ai2 = m2 > 0 ? r.flops / m2 : 0.0;
    return r;
  }

  CounterReport measure_counters() const { return measure_counters(cost_model()); }

 private:
  void check_dims(std::span<const double> p, std::span<double> out) const {
    if (p.size() != size() || out.size() != size())
      throw std::invalid_argument("vector length " + std::to_string(p.size()) + "/" +
                                  std::to_string(out.size()) + " != operator dimension " +
                                  std::to_string(size()));
  }

  TileKernel choose(int nnz_a, int nnz_b) const {
    switch (opt_.policy) {
      case TilePolicy::dense: return TileKernel::dense_dense;
      case TilePolicy::sparse: return TileKernel::sparse_sparse;
      case TilePolicy::mixed: return TileKernel::dense_sparse;
      case TilePolicy::hybrid: break;
    }
    return select_tile_kernel(nnz_a, nnz_b, thresholds_);
  }

  // All output blocks (I, I') of tile row I of the first graph.
  void stripe(std::size_t I, std::span<const double> p, std::span<double> out, RawCounters& c) const {
    if (labeled_)
      stripe_impl(I, p, out, c, EdgeKernelRef{&ek_});
    else
      stripe_impl(I, p, out, c, UnitEdgeKernel{});
  }

  template <class EK>
  void stripe_impl(std::size_t I, std::span<const double> p, std::span<double> out, RawCounters& c,
                   const EK& ek) const {
    const auto& ta = a_->tiles;
    const auto& tb = b_->tiles;
    const std::size_t n = this->n(), m = this->m();
    const std::size_t a_begin = ta.stripe_offsets[I], a_end = ta.stripe_offsets[I + 1];
    if (a_begin == a_end) return;
    constexpr bool L = EK::labeled;
    Block acc, pblock;
    for (std::size_t Ib = 0; Ib < tb.tile_rows(); ++Ib) {
      const std::size_t b_begin = tb.stripe_offsets[Ib], b_end = tb.stripe_offsets[Ib + 1];
      if (b_begin == b_end) continue;
      acc.fill(0.0);
      for (std::size_t xa = a_begin; xa < a_end; ++xa) {
        const Tile& tile_a = ta.tiles[xa];
        const int nnz_a = a_->nnz[xa];
        bool a_dense_used = false;
        for (std::size_t xb = b_begin; xb < b_end; ++xb) {
          const Tile& tile_b = tb.tiles[xb];
          const int nnz_b = b_->nnz[xb];
          gather(p, tile_a.col, tile_b.col, n, m, pblock);
          c.t1_rhs += tile_area;
          ++c.tile_pairs;
          const double* aw = a_->dense_weights[xa].data();
          const double* bw = b_->dense_weights[xb].data();
          const Label* al = L ? a_->dense_labels[xa].data() : nullptr;
          const Label* bl = L ? b_->dense_labels[xb].data() : nullptr;
          const Label* alc = L ? detail::labels_of(tile_a) : nullptr;
          const Label* blc = L ? detail::labels_of(tile_b) : nullptr;
          const std::uint64_t na = static_cast<std::uint64_t>(nnz_a), nb = static_cast<std::uint64_t>(nnz_b);
          switch (choose(nnz_a, nnz_b)) {
            case TileKernel::dense_dense:
              c.contributions += detail::dense_dense(aw, al, bw, bl, pblock, acc, ek);
              ++c.pairs_dense_dense;
              a_dense_used = true;
              count_stream(c, tile_area, dense_pair_t2_loads, tile_area);
              break;
            case TileKernel::sparse_sparse:
              c.contributions += detail::sparse_sparse(tile_a.bitmap, tile_a.weights.data(), alc, tile_b.bitmap,
                                                       tile_b.weights.data(), blc, pblock, acc, ek);
              ++c.pairs_sparse_sparse;
              count_stream(c, nb, na + na * nb, nb);
              break;
            case TileKernel::dense_sparse:
              ++c.pairs_dense_sparse;
              if (nnz_a >= nnz_b) {
                c.contributions += detail::dense_sparse(aw, al, tile_b.bitmap, tile_b.weights.data(), blc,
                                                        pblock, acc, ek);
                a_dense_used = true;
                count_stream(c, nb, tile_area + tile_area * nb, nb);
              } else {
                c.contributions += detail::sparse_dense(tile_a.bitmap, tile_a.weights.data(), alc, bw, bl,
                                                        pblock, acc, ek);
                count_stream(c, tile_area, na + na * tile_area, tile_area);
              }
              break;
          }
        }
        const std::uint64_t outer = a_dense_used ? tile_area : static_cast<std::uint64_t>(nnz_a);
        c.t1_outer_weights += outer;
        if (L) c.t1_outer_labels += outer;
      }
      // Scatter the finished output block.
      const std::size_t i0 = I * tile_size, k0 = Ib * tile_size;
      const std::size_t ni = std::min(tile_size, n - i0), nk = std::min(tile_size, m - k0);
      for (std::size_t i = 0; i < ni; ++i)
        for (std::size_t k = 0; k < nk; ++k) out[(i0 + i) * m + k0 + k] = acc[i * tile_size + k];
      c.t1_stores += ni * nk;
    }
  }

  // Elements streamed from storage for the inner tile, touched in the
  // expanded working set, and written to it.
  void count_stream(RawCounters& c, std::uint64_t inner, std::uint64_t t2_loads, std::uint64_t t2_stores) const {
    c.t1_weights += inner;
    c.t2_load_weights += t2_loads;
    c.t2_store_weights += t2_stores;
    if (labeled_) {
      c.t1_labels += inner;
      c.t2_load_labels += t2_loads;
      c.t2_store_labels += t2_stores;
    }
  }

  static void gather(std::span<const double> p, std::size_t J, std::size_t Jb, std::size_t n, std::size_t m,
                     Block& out) {
    out.fill(0.0);
    const std::size_t j0 = J * tile_size, k0 = Jb * tile_size;
    const std::size_t nj = std::min(tile_size, n - j0), nk = std::min(tile_size, m - k0);
    for (std::size_t j = 0; j < nj; ++j)
      for (std::size_t k = 0; k < nk; ++k) out[j * tile_size + k] = p[(j0 + j) * m + k0 + k];
  }

  std::shared_ptr<const PreparedGraph> a_, b_;
  BaseKernel vk_, ek_;
  OperatorOptions opt_;
  bool labeled_ = false;
  SelectionThresholds thresholds_;
  std::vector<double> diag_;
  mutable RawCounters counters_;
};

/**
 * Reference product with the explicitly materialized off-diagonal matrix
 * L = (A (x) A') (.) (E k(x) E'). Memory grows as (n m)^2, hence the guard.
 */
inline std::vector<double> naive_dense_apply(const LabeledGraph& a, const LabeledGraph& b,
                                             const BaseKernel& edge_kernel, std::span<const double> p,
                                             std::size_t guard = 4096) {
  const std::size_t n = a.node_count, m = b.node_count, N = n * m;
  if (N > guard)
    throw std::length_error("naive product of size " + std::to_string(N) + " exceeds guard " +
                            std::to_string(guard));
  if (p.size() != N) throw std::invalid_argument("vector length != n*m");
  const bool labeled = !edge_kernel.is_constant_one();
  std::vector<double> wa(n * n, 0.0), wb(m * m, 0.0);
  std::vector<Label> la(n * n), lb(m * m);
  for (const auto& e : a.edges) {
    wa[e.i * n + e.j] = wa[e.j * n + e.i] = e.weight;
    la[e.i * n + e.j] = la[e.j * n + e.i] = e.label;
  }
  for (const auto& e : b.edges) {
    wb[e.i * m + e.j] = wb[e.j * m + e.i] = e.weight;
    lb[e.i * m + e.j] = lb[e.j * m + e.i] = e.label;
  }
  std::vector<double> L(N * N, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (wa[i * n + j] == 0.0) continue;
      for (std::size_t ii = 0; ii < m; ++ii)
        for (std::size_t jj = 0; jj < m; ++jj) {
          if (wb[ii * m + jj] == 0.0) continue;
          const double k = labeled ? edge_kernel(la[i * n + j], lb[ii * m + jj]) : 1.0;
          L[(i * m + ii) * N + j * m + jj] = wa[i * n + j] * wb[ii * m + jj] * k;
        }
    }
  std::vector<double> out(N, 0.0);
  for (std::size_t r = 0; r < N; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < N; ++c) s += L[r * N + c] * p[c];
    out[r] = s;
  }
  return out;
}

}  // namespace mgk

#endif  // MGK_PRODUCT_OPERATOR_HPP
