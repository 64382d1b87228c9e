#ifndef MGK_ORACLE_HPP
#define MGK_ORACLE_HPP

// Dense reference solvers. Both work from the edge lists directly and never
// touch the tiled storage, so they check the matrix-free path independently.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgk/graph.hpp"
#include "mgk/kernels.hpp"
#include "mgk/solver.hpp"

namespace mgk {

namespace detail {

struct ProductSystem {
  std::size_t n = 0, m = 0;
  std::vector<double> vertex;   // kappa_v per node pair, floored
  std::vector<double> degree;   // d_i d'_k
  std::vector<double> stop;     // q_i q'_k
};

inline ProductSystem product_system(const LabeledGraph& a, const LabeledGraph& b, const BaseKernel& vk,
                                    double vertex_floor, std::size_t guard) {
  require_valid(a);
  require_valid(b);
  ProductSystem s;
  s.n = a.node_count;
  s.m = b.node_count;
  const std::size_t N = s.n * s.m;
  if (N > guard)
    throw std::length_error("oracle system of size " + std::to_string(N) + " exceeds guard " +
                            std::to_string(guard));
  const auto da = degree_vector(a), db = degree_vector(b);
  s.vertex.resize(N);
  s.degree.resize(N);
  s.stop.resize(N);
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t k = 0; k < s.m; ++k) {
      const std::size_t f = i * s.m + k;
      s.vertex[f] = std::max(vk(a.node_labels[i], b.node_labels[k]), vertex_floor);
      s.degree[f] = da[i] * db[k];
      s.stop[f] = a.stop_prob[i] * b.stop_prob[k];
    }
  return s;
}

// Calls f(row, col, value) for every nonzero of (A (x) A') (.) (E k(x) E').
template <class F>
void for_each_product_edge(const LabeledGraph& a, const LabeledGraph& b, const BaseKernel& ek, F&& f) {
  const std::size_t m = b.node_count;
  const bool labeled = !ek.is_constant_one();
  for (const Edge& e : a.edges)
    for (const Edge& h : b.edges) {
      const double w = e.weight * h.weight * (labeled ? ek(e.label, h.label) : 1.0);
      // Each undirected pair of edges yields four directed product edges.
      f(e.i * m + h.i, e.j * m + h.j, w);
      f(e.j * m + h.j, e.i * m + h.i, w);
      f(e.i * m + h.j, e.j * m + h.i, w);
      f(e.j * m + h.i, e.i * m + h.j, w);
    }
}

}  // namespace detail

/**
 * Materializes D V^-1 - A (.) E and solves it by Cholesky factorization.
 * Throws std::runtime_error if the matrix is not positive definite.
 */
inline KernelResult direct_solve_oracle(const LabeledGraph& a, const LabeledGraph& b, const BaseKernel& vk,
                                        const BaseKernel& ek, std::size_t guard = 4096,
                                        double vertex_floor = 1e-12) {
  const auto s = detail::product_system(a, b, vk, vertex_floor, guard);
  const std::size_t N = s.n * s.m;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(N));
  for (std::size_t f = 0; f < N; ++f) {
    const auto fi = static_cast<Eigen::Index>(f);
    L(fi, fi) = s.degree[f] / s.vertex[f];
    rhs(fi) = s.degree[f] * s.stop[f];
  }
  detail::for_each_product_edge(a, b, ek, [&](std::size_t r, std::size_t c, double w) {
    L(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) -= w;
  });
  KernelResult res;
  res.n = s.n;
  res.m = s.m;
  if (N == 0) {
    res.converged = true;
    return res;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(L);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("product system is not positive definite (check kernel ranges and q > 0)");
  const Eigen::VectorXd x = llt.solve(rhs);
  res.nodewise.assign(x.data(), x.data() + N);
  res.value = contract_start(a, b, res.nodewise);
  res.iterations = 1;
  res.final_residual = (L * x - rhs).norm() / rhs.norm();
  res.converged = true;
  return res;
}

/**
 * Fixed-point iteration R <- q_x + (P_x (.) E_x) V_x R from R = q_x.
 *
 * The k-th iterate equals the random-walk sum truncated at walks of k + 1
 * nodes. Stops when the largest change falls below tol times the largest
 * entry of R. Throws std::runtime_error when the change grows for five
 * consecutive sweeps (no contraction).
 */
inline KernelResult fixed_point_oracle(const LabeledGraph& a, const LabeledGraph& b, const BaseKernel& vk,
                                       const BaseKernel& ek, std::size_t max_sweeps = 1000000,
                                       double tol = 1e-15, std::size_t guard = 4096,
                                       double vertex_floor = 1e-12) {
  const auto s = detail::product_system(a, b, vk, vertex_floor, guard);
  const std::size_t N = s.n * s.m;
  // Transition weights: product edge weight / (d_i d'_k) on the row node.
  struct Entry {
    std::size_t row, col;
    double w;
  };
  std::vector<Entry> T;
  detail::for_each_product_edge(a, b, ek, [&](std::size_t r, std::size_t c, double w) {
    T.push_back({r, c, w / s.degree[r] * s.vertex[c]});
  });
  std::vector<double> R = s.stop, next(N);
  KernelResult res;
  res.n = s.n;
  res.m = s.m;
  double prev_change = INFINITY;
  std::size_t growth = 0;
  std::size_t sweep = 0;
  bool done = N == 0;
  while (!done && sweep < max_sweeps) {
    next = s.stop;
    for (const auto& e : T) next[e.row] += e.w * R[e.col];
    double change = 0.0, scale = 0.0;
    for (std::size_t f = 0; f < N; ++f) {
      change = std::max(change, std::abs(next[f] - R[f]));
      scale = std::max(scale, std::abs(next[f]));
    }
    R.swap(next);
    ++sweep;
    if (change <= tol * scale) done = true;
    growth = change > prev_change ? growth + 1 : 0;
    if (growth >= 5) throw std::runtime_error("fixed-point iteration does not contract");
    prev_change = change;
    res.final_residual = scale > 0 ? change / scale : 0.0;
  }
  res.iterations = sweep;
  res.converged = done;
  res.nodewise.resize(N);
  for (std::size_t f = 0; f < N; ++f) res.nodewise[f] = s.vertex[f] * R[f];
  res.value = contract_start(a, b, res.nodewise);
  return res;
}

/// Dense nm x nm matrix of the off-diagonal term, for tests.
inline DenseMatrix product_offdiag_matrix(const LabeledGraph& a, const LabeledGraph& b, const BaseKernel& ek) {
  const std::size_t N = a.node_count * b.node_count;
  DenseMatrix L(N, N);
  detail::for_each_product_edge(a, b, ek, [&](std::size_t r, std::size_t c, double w) { L(r, c) += w; });
  return L;
}

}  // namespace mgk

#endif  // MGK_ORACLE_HPP
