// Kernel between two small labeled graphs, checked against the dense solve.

#include <iostream>

#include "mgk/mgk.hpp"

int main() {
  // Triangle and path, nodes labeled by category, edges by a scalar.
  mgk::LabeledGraph a = mgk::make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  mgk::LabeledGraph b = mgk::make_graph(3, {{0, 1}, {1, 2}});
  for (auto* g : {&a, &b}) {
    g->node_shape = mgk::LabelShape::category();
    g->edge_shape = mgk::LabelShape::vector(1);
    for (std::size_t i = 0; i < g->node_count; ++i) g->node_labels[i] = mgk::Label::category(i % 2);
    for (auto& e : g->edges) e.label = mgk::Label::real(0.1 * double(e.i + e.j));
  }

  mgk::KernelOptions opt;
  opt.vertex_kernel = mgk::parse_kernel_spec("delta:0.5");
  opt.edge_kernel = mgk::parse_kernel_spec("se:1.0");
  const auto r = mgk::kernel(a, b, opt);
  const auto d = mgk::direct_solve_oracle(a, b, opt.vertex_kernel, opt.edge_kernel);

  std::cout.precision(15);
  std::cout << "pcg    " << r.value << "  (" << r.iterations << " iterations)\n";
  std::cout << "direct " << d.value << '\n';
  return std::abs(r.value - d.value) <= 1e-8 * d.value ? 0 : 1;
}
