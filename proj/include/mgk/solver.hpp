#ifndef MGK_SOLVER_HPP
#define MGK_SOLVER_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mgk/graph.hpp"
#include "mgk/kernels.hpp"
#include "mgk/product_operator.hpp"
#include "mgk/reorder.hpp"

namespace mgk {

struct SolverConfig {
  double tolerance = 1e-10;         // relative residual: stop when |r| < tolerance * |b|
  std::size_t max_iterations = 0;   // 0 means 10 * n * m
  std::size_t oracle_guard = 4096;  // largest n * m the dense oracles accept
  bool deterministic = true;

  void check() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be > 0");
  }
};

struct KernelResult {
  double value = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> nodewise;  // n x m, entry (i, i') at i * m + i'
  std::size_t iterations = 0;
  double final_residual = 0.0;   // |r| / |b|
  bool converged = false;

  double at(std::size_t i, std::size_t k) const { return nodewise[i * m + k]; }
};

/// Sum over node pairs of p_i p'_k x_(i,k).
inline double contract_start(const LabeledGraph& a, const LabeledGraph& b, const std::vector<double>& x) {
  const std::size_t m = b.node_count;
  double s = 0.0;
  for (std::size_t i = 0; i < a.node_count; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < m; ++k) row += b.start_prob[k] * x[i * m + k];
    s += a.start_prob[i] * row;
  }
  return s;
}

/**
 * Diagonally preconditioned conjugate gradient on
 *   (D V^-1 - A (.) E) x = D q,
 * preconditioner M = D V^-1, starting from x = 0. The returned node-wise
 * field is x and the kernel value is p^T x.
 */
inline KernelResult solve_pcg(const ProductOperator& op, const SolverConfig& cfg = {}) {
  cfg.check();
  const auto& ga = op.first().graph;
  const auto& gb = op.second().graph;
  const auto& da = op.first().degree;
  const auto& db = op.second().degree;
  const std::size_t n = op.n(), m = op.m(), N = n * m;
  const std::size_t max_it = cfg.max_iterations ? cfg.max_iterations : std::max<std::size_t>(1, 10 * N);
  const auto M = op.diagonal();

  KernelResult res;
  res.n = n;
  res.m = m;
  std::vector<double> x(N, 0.0), r(N), z(N), dir(N), a(N);
  double bb = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      const double b = da[i] * db[k] * ga.stop_prob[i] * gb.stop_prob[k];
      r[i * m + k] = b;
      bb += b * b;
    }
  auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
    return s;
  };
  const double threshold = cfg.tolerance * cfg.tolerance * bb;
  double rr = bb;
  if (N == 0 || rr <= threshold) {
    res.nodewise = x;
    res.converged = true;
    return res;
  }
  for (std::size_t k = 0; k < N; ++k) z[k] = r[k] / M[k];
  dir = z;
  double rho = dot(r, z);
  std::size_t it = 0;
  while (it < max_it) {
    op.apply(dir, a);
    const double alpha = rho / dot(dir, a);
    for (std::size_t k = 0; k < N; ++k) {
      x[k] += alpha * dir[k];
      r[k] -= alpha * a[k];
    }
    ++it;
    rr = dot(r, r);
    if (rr < threshold) break;
    for (std::size_t k = 0; k < N; ++k) z[k] = r[k] / M[k];
    const double rho_next = dot(r, z);
    const double beta = rho_next / rho;
    for (std::size_t k = 0; k < N; ++k) dir[k] = z[k] + beta * dir[k];
    rho = rho_next;
  }
  res.iterations = it;
  res.final_residual = std::sqrt(rr / bb);
  res.converged = rr < threshold;
  res.value = contract_start(ga, gb, x);
  res.nodewise = std::move(x);
  return res;
}

struct KernelOptions {
  BaseKernel vertex_kernel = BaseKernel::constant_one();
  BaseKernel edge_kernel = BaseKernel::constant_one();
  SolverConfig solver;
  OperatorOptions op;
  ReorderMethod reorder = ReorderMethod::none;
  std::uint64_t seed = 0;
};

/// Maps a node-wise field of reordered graphs back to the original node order.
inline std::vector<double> unpermute_nodewise(const std::vector<double>& x, const Permutation& pa,
                                              const Permutation& pb) {
  const std::size_t n = pa.size(), m = pb.size();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) out[i * m + k] = x[pa.forward[i] * m + pb.forward[k]];
  return out;
}

/// Prepared-graph entry point: operator construction and PCG solve.
inline KernelResult kernel(std::shared_ptr<const PreparedGraph> a, std::shared_ptr<const PreparedGraph> b,
                           const KernelOptions& opt) {
  ProductOperator op(std::move(a), std::move(b), opt.vertex_kernel, opt.edge_kernel, opt.op);
  return solve_pcg(op, opt.solver);
}

/**
 * Kernel value between two graphs: optional reordering, tiling, operator
 * construction and PCG. The node-wise field is always reported in the
 * original node order. The const1 edge kernel takes the unlabeled path.
 */
inline KernelResult kernel(const LabeledGraph& a, const LabeledGraph& b, const KernelOptions& opt = {}) {
  require_valid(a);
  require_valid(b);
  if (opt.reorder == ReorderMethod::none) return kernel(prepare_graph(a), prepare_graph(b), opt);
  const Permutation pa = reorder(a, opt.reorder, opt.seed);
  const Permutation pb = reorder(b, opt.reorder, opt.seed);
  auto res = kernel(prepare_graph(apply_permutation(a, pa)), prepare_graph(apply_permutation(b, pb)), opt);
  res.nodewise = unpermute_nodewise(res.nodewise, pa, pb);
  return res;
}

}  // namespace mgk

#endif  // MGK_SOLVER_HPP
