// Gram matrix of a few random point clouds turned into spatial adjacency graphs.

#include <cmath>
#include <iostream>

#include "mgk/mgk.hpp"

namespace {

mgk::PointCloud random_cloud(std::size_t atoms, std::uint64_t seed) {
  mgk::Rng rng(seed);
  mgk::PointCloud pc;
  pc.dim = 3;
  for (std::size_t k = 0; k < atoms; ++k) {
    pc.points.push_back({4 * rng.uniform(), 4 * rng.uniform(), 4 * rng.uniform()});
    pc.labels.push_back(static_cast<std::int64_t>(rng.below(3)));
  }
  return pc;
}

}  // namespace

int main() {
  std::vector<mgk::LabeledGraph> dataset;
  for (std::uint64_t s = 0; s < 6; ++s) dataset.push_back(mgk::spatial_graph(random_cloud(12 + 4 * s, s), 2.0));

  mgk::GramOptions opt;
  opt.kernel.vertex_kernel = mgk::BaseKernel::kronecker_delta(0.3);
  opt.kernel.edge_kernel = mgk::BaseKernel::square_exponential(2.0);
  opt.kernel.reorder = mgk::ReorderMethod::morton;
  opt.workers = 2;
  const auto res = mgk::compute_gram(dataset, opt);
  const auto K = mgk::normalize_gram(res.values, res.size);

  std::cout.precision(4);
  for (std::size_t a = 0; a < res.size; ++a) {
    for (std::size_t b = 0; b < res.size; ++b) std::cout << K[a * res.size + b] << (b + 1 < res.size ? "  " : "\n");
  }
  std::cout << "wall " << res.wall_seconds << " s\n";
  return res.failures() == 0 ? 0 : 1;
}
