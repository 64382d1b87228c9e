#ifndef MGK_GRAM_HPP
#define MGK_GRAM_HPP

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mgk/graph.hpp"
#include "mgk/product_operator.hpp"
#include "mgk/solver.hpp"

namespace mgk {

struct PairIndex {
  std::size_t a = 0;
  std::size_t b = 0;

  friend bool operator==(const PairIndex&, const PairIndex&) = default;
};

/// Work estimate of one kernel solve: n_a n_b (nnz_a / n_a)(nnz_b / n_b).
inline double pair_cost(std::size_t na, std::size_t nnz_a, std::size_t nb, std::size_t nnz_b) {
  if (na == 0 || nb == 0) return 0.0;
  const double da = static_cast<double>(nnz_a) / static_cast<double>(na);
  const double db = static_cast<double>(nnz_b) / static_cast<double>(nb);
  return static_cast<double>(na) * static_cast<double>(nb) * da * db;
}

/**
 * All unordered pairs (a <= b) including the diagonal, most expensive first.
 * Equal estimates keep lexicographic order.
 */
inline std::vector<PairIndex> schedule_pairs(const std::vector<std::size_t>& sizes,
                                             const std::vector<std::size_t>& nnz) {
  if (sizes.size() != nnz.size()) throw std::invalid_argument("sizes and nnz must have equal length");
  const std::size_t N = sizes.size();
  std::vector<PairIndex> pairs;
  std::vector<double> cost;
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = a; b < N; ++b) {
      pairs.push_back({a, b});
      cost.push_back(pair_cost(sizes[a], nnz[a], sizes[b], nnz[b]));
    }
  std::vector<std::size_t> idx(pairs.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return cost[x] > cost[y]; });
  std::vector<PairIndex> out;
  out.reserve(idx.size());
  for (auto k : idx) out.push_back(pairs[k]);
  return out;
}

/// Row-major square matrix of kernel values with per-pair diagnostics.
struct GramResult {
  std::size_t size = 0;
  std::vector<double> values;
  std::vector<std::size_t> iterations;
  std::vector<char> converged;
  std::vector<char> failed;             // exception during the solve; value is NaN
  std::vector<std::string> errors;      // message per failed cell, empty otherwise
  std::vector<PairIndex> order;
  double wall_seconds = 0.0;

  double operator()(std::size_t a, std::size_t b) const { return values[a * size + b]; }
  std::size_t failures() const {
    std::size_t c = 0;
    for (std::size_t a = 0; a < size; ++a)
      for (std::size_t b = a; b < size; ++b) c += failed[a * size + b] != 0;
    return c;
  }
  std::size_t nonconverged() const {
    std::size_t c = 0;
    for (std::size_t a = 0; a < size; ++a)
      for (std::size_t b = a; b < size; ++b) c += !converged[a * size + b] && !failed[a * size + b];
    return c;
  }
};

struct GramOptions {
  KernelOptions kernel;
  std::size_t workers = 1;
  // Single-threaded operator inside each pair; the pair solves themselves
  // are always deterministic, so worker count never changes the matrix.
  bool deterministic = true;
};

/**
 * Kernel values between every pair of graphs, each unordered pair solved
 * once and mirrored. Pairs are taken from a shared queue in schedule_pairs
 * order. A pair that throws gets NaN and a failure flag; the batch goes on.
 */
inline GramResult compute_gram(const std::vector<LabeledGraph>& dataset, const GramOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t N = dataset.size();
  std::vector<std::shared_ptr<const PreparedGraph>> prepared(N);
  std::vector<std::size_t> sizes(N), nnz(N);
  for (std::size_t k = 0; k < N; ++k) {
    const auto& g = dataset[k];
    if (opt.kernel.reorder == ReorderMethod::none)
      prepared[k] = prepare_graph(g);
    else
      prepared[k] = prepare_graph(apply_permutation(g, reorder(g, opt.kernel.reorder, opt.kernel.seed)));
    sizes[k] = g.node_count;
    nnz[k] = 2 * g.edges.size();
  }
  GramResult res;
  res.size = N;
  res.values.assign(N * N, 0.0);
  res.iterations.assign(N * N, 0);
  res.converged.assign(N * N, 0);
  res.failed.assign(N * N, 0);
  res.errors.assign(N * N, {});
  res.order = schedule_pairs(sizes, nnz);

  KernelOptions kopt = opt.kernel;
  if (opt.deterministic) kopt.op.threads = 1;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= res.order.size()) return;
      const auto [a, b] = res.order[k];
      double value;
      std::size_t its = 0;
      bool conv = false, fail = false;
      std::string err;
      try {
        const auto r = kernel(prepared[a], prepared[b], kopt);
        value = r.value;
        its = r.iterations;
        conv = r.converged;
      } catch (const std::exception& e) {
        value = std::numeric_limits<double>::quiet_NaN();
        fail = true;
        err = e.what();
      }
      for (const std::size_t cell : {a * N + b, b * N + a}) {
        res.values[cell] = value;
        res.iterations[cell] = its;
        res.converged[cell] = conv;
        res.failed[cell] = fail;
        res.errors[cell] = err;
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(opt.workers, res.order.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

/**
 * K[a][b] / sqrt(K[a][a] K[b][b]) with an exact unit diagonal. NaN entries
 * stay NaN. Throws if a diagonal entry is finite and not positive.
 */
inline std::vector<double> normalize_gram(const std::vector<double>& K, std::size_t N) {
  if (K.size() != N * N) throw std::invalid_argument("Gram matrix must be N x N");
  for (std::size_t a = 0; a < N; ++a) {
    const double d = K[a * N + a];
    if (!std::isnan(d) && !(d > 0.0))
      throw std::domain_error("Gram diagonal entry " + std::to_string(a) + " is not positive");
  }
  std::vector<double> out(N * N);
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = 0; b < N; ++b)
      out[a * N + b] = a == b && !std::isnan(K[a * N + a])
                           ? 1.0
                           : K[a * N + b] / std::sqrt(K[a * N + a] * K[b * N + b]);
  return out;
}

inline void write_gram_csv(std::ostream& os, const std::vector<double>& K, const std::vector<std::string>& ids) {
  const std::size_t N = ids.size();
  if (K.size() != N * N) throw std::invalid_argument("Gram matrix must be N x N");
  for (std::size_t a = 0; a < N; ++a) os << (a ? "," : "") << ids[a];
  os << '\n' << std::setprecision(17);
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t b = 0; b < N; ++b) os << (b ? "," : "") << K[a * N + b];
    os << '\n';
  }
}

namespace detail {

inline void put_u64_le(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int k = 0; k < 8; ++k) buf[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  os.write(buf, 8);
}

inline std::uint64_t get_u64_le(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("truncated GRAM file");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
  return v;
}

}  // namespace detail

/// "GRAM", version byte 1, u64 N, then N*N doubles row-major; all little-endian.
inline void write_gram_binary(std::ostream& os, const std::vector<double>& K, std::size_t N) {
  if (K.size() != N * N) throw std::invalid_argument("Gram matrix must be N x N");
  os.write("GRAM", 4);
  os.put(1);
  detail::put_u64_le(os, N);
  for (double v : K) detail::put_u64_le(os, std::bit_cast<std::uint64_t>(v));
}

inline std::vector<double> read_gram_binary(std::istream& is, std::size_t& N) {
  char magic[5];
  if (!is.read(magic, 5) || std::memcmp(magic, "GRAM", 4) != 0) throw std::runtime_error("not a GRAM file");
  if (magic[4] != 1) throw std::runtime_error("unsupported GRAM version " + std::to_string(int(magic[4])));
  N = detail::get_u64_le(is);
  if (N > (std::uint64_t{1} << 28)) throw std::runtime_error("GRAM size too large");
  std::vector<double> K(N * N);
  for (auto& v : K) v = std::bit_cast<double>(detail::get_u64_le(is));
  return K;
}

}  // namespace mgk

#endif  // MGK_GRAM_HPP
