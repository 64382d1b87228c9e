// Command-line front end: kernel, gram, reorder, tiles, bench, gen.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mgk/mgk.hpp"

namespace fs = std::filesystem;

namespace {

struct KernelArgs {
  bool unlabeled = false;
  std::string vkernel = "const1";
  std::string ekernel = "const1";
  double q0 = mgk::default_stop_prob;
  double tol = 1e-10;
  std::string reorder = "none";
};

void add_kernel_flags(CLI::App* cmd, KernelArgs& k) {
  cmd->add_flag("--unlabeled", k.unlabeled, "ignore labels (const1 vertex and edge kernels)");
  cmd->add_option("--vkernel", k.vkernel, "vertex kernel: const1 | delta:H | se:ALPHA | poly:C0,C1,...")
      ->capture_default_str();
  cmd->add_option("--ekernel", k.ekernel, "edge kernel, same grammar")->capture_default_str();
  cmd->add_option("--q", k.q0, "stopping probability for graphs that do not set one")->capture_default_str();
  cmd->add_option("--tol", k.tol, "relative residual tolerance")->capture_default_str();
  cmd->add_option("--reorder", k.reorder, "node reordering before tiling")
      ->check(CLI::IsMember({"pbr", "rcm", "morton", "none"}))
      ->capture_default_str();
}

mgk::KernelOptions kernel_options(const KernelArgs& k) {
  mgk::KernelOptions opt;
  if (!k.unlabeled) {
    opt.vertex_kernel = mgk::parse_kernel_spec(k.vkernel);
    opt.edge_kernel = mgk::parse_kernel_spec(k.ekernel);
  }
  opt.solver.tolerance = k.tol;
  opt.reorder = mgk::parse_reorder_method(k.reorder);
  return opt;
}

// Drops labels so that any graph can be used in unlabeled mode.
mgk::LabeledGraph strip_labels(mgk::LabeledGraph g) {
  g.node_shape = g.edge_shape = mgk::LabelShape::none();
  for (auto& l : g.node_labels) l = {};
  for (auto& e : g.edges) e.label = {};
  return g;
}

mgk::LabeledGraph load(const std::string& path, const KernelArgs& k) {
  auto g = mgk::load_graph(path, k.q0);
  return k.unlabeled ? strip_labels(std::move(g)) : g;
}

bool is_graph_file(const fs::path& p) {
  const auto e = p.extension().string();
  return e == ".json" || e == ".txt" || e == ".edges";
}

// A directory of graph files (sorted by name) or a text file listing one path per line.
std::vector<fs::path> dataset_paths(const fs::path& src) {
  std::vector<fs::path> paths;
  if (fs::is_directory(src)) {
    for (const auto& entry : fs::directory_iterator(src))
      if (entry.is_regular_file() && is_graph_file(entry.path())) paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    return paths;
  }
  std::ifstream in(src);
  if (!in) throw std::runtime_error("cannot open dataset " + src.string());
  std::string line;
  while (std::getline(in, line)) {
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty() || line[0] == '#') continue;
    fs::path p(line);
    paths.push_back(p.is_absolute() ? p : src.parent_path() / p);
  }
  return paths;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_kernel(const std::string& fa, const std::string& fb, const KernelArgs& k, const std::string& nodewise) {
  const auto a = load(fa, k), b = load(fb, k);
  const auto res = mgk::kernel(a, b, kernel_options(k));
  std::cout << std::setprecision(17) << "value " << res.value << '\n'
            << "iterations " << res.iterations << '\n'
            << "residual " << res.final_residual << '\n'
            << "converged " << (res.converged ? "true" : "false") << '\n';
  if (!nodewise.empty()) {
    std::ofstream out(nodewise);
    if (!out) throw std::runtime_error("cannot write " + nodewise);
    out << std::setprecision(17);
    for (std::size_t i = 0; i < res.n; ++i) {
      for (std::size_t j = 0; j < res.m; ++j) out << (j ? "," : "") << res.at(i, j);
      out << '\n';
    }
  }
  return res.converged ? 0 : 2;
}

int run_gram(const std::string& dataset, const std::string& out_path, std::string format, bool normalize,
             std::size_t workers, bool deterministic, const KernelArgs& k) {
  const auto paths = dataset_paths(dataset);
  std::vector<mgk::LabeledGraph> graphs;
  std::vector<std::string> ids;
  for (const auto& p : paths) {
    graphs.push_back(load(p.string(), k));
    ids.push_back(p.stem().string());
  }
  mgk::GramOptions opt;
  opt.kernel = kernel_options(k);
  opt.workers = workers;
  opt.deterministic = deterministic;
  const auto res = mgk::compute_gram(graphs, opt);
  const auto K = normalize ? mgk::normalize_gram(res.values, res.size) : res.values;
  if (format.empty()) format = fs::path(out_path).extension() == ".bin" ? "bin" : "csv";
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  if (format == "bin")
    mgk::write_gram_binary(out, K, res.size);
  else
    mgk::write_gram_csv(out, K, ids);
  std::cerr << "graphs " << res.size << ", pairs " << res.order.size() << ", failed " << res.failures()
            << ", not converged " << res.nonconverged() << ", wall " << res.wall_seconds << " s\n";
  for (std::size_t a = 0; a < res.size; ++a)
    for (std::size_t b = a; b < res.size; ++b)
      if (res.failed[a * res.size + b])
        std::cerr << "  " << ids[a] << " x " << ids[b] << ": " << res.errors[a * res.size + b] << '\n';
  return res.failures() == 0 ? 0 : 2;
}

int run_reorder(const std::string& path, const std::string& method, std::uint64_t seed, const std::string& out) {
  const auto g = mgk::load_graph(path);
  const auto t0 = std::chrono::steady_clock::now();
  const auto perm = mgk::reorder(g, mgk::parse_reorder_method(method), seed);
  const double wall = seconds_since(t0);
  const auto h = mgk::apply_permutation(g, perm);
  std::cout << "method " << method << '\n'
            << "objective_before " << mgk::objective(g, mgk::Permutation::identity(g.node_count)) << '\n'
            << "objective_after " << mgk::objective(g, perm) << '\n'
            << "octiles_before " << mgk::build_tiles(g).tiles.size() << '\n'
            << "octiles_after " << mgk::build_tiles(h).tiles.size() << '\n'
            << "wall_seconds " << wall << '\n';
  if (!out.empty()) mgk::save_graph(h, out);
  return 0;
}

int run_tiles(const std::string& path, const std::string& method) {
  auto g = mgk::load_graph(path);
  if (method != "none") g = mgk::apply_permutation(g, mgk::reorder(g, mgk::parse_reorder_method(method)));
  const auto m = mgk::build_tiles(g);
  const auto h = mgk::tile_histogram(m);
  std::cout << "tiles " << h.total << '\n' << "mean_density " << h.mean_density << '\n' << "histogram";
  for (std::size_t k = 0; k < h.buckets.size(); ++k)
    if (h.buckets[k]) std::cout << ' ' << k << ':' << h.buckets[k];
  std::cout << '\n';
  mgk::dump_tiles(std::cout, m);
  return 0;
}

// Dense (complete) graphs of sizes n and m, forced through the dense tile product.
mgk::CounterReport measure(std::size_t n, std::size_t m, const mgk::CostModel& c) {
  auto complete = [&](std::size_t size) {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = i + 1; j < size; ++j) e.emplace_back(i, j);
    auto g = mgk::make_graph(size, e);
    if (c.E > 0) {
      g.edge_shape = mgk::LabelShape::vector(1);
      for (auto& ed : g.edges) ed.label = mgk::Label::real(0.5);
    }
    return g;
  };
  mgk::OperatorOptions opt;
  opt.policy = mgk::TilePolicy::dense;
  const auto ek = c.E > 0 ? mgk::BaseKernel::square_exponential(1.0) : mgk::BaseKernel::constant_one();
  mgk::ProductOperator op(complete(n), complete(m), mgk::BaseKernel::constant_one(), ek, opt);
  std::vector<double> p(n * m, 1.0);
  op.apply_offdiag(p);
  return op.measure_counters(c);
}

int run_bench(std::size_t n, std::size_t m, const std::string& prim, const mgk::CostModel& c, bool do_measure) {
  const auto pred = mgk::predict_costs(c, double(n), double(m), mgk::parse_primitive(prim));
  std::cout << "predicted (" << prim << ")\n";
  mgk::print_report(std::cout, pred);
  std::optional<mgk::CounterReport> meas;
  if (do_measure) {
    meas = measure(n, m, c);
    std::cout << "measured (tiling-blocking, dense tiles)\n";
    mgk::print_report(std::cout, *meas);
    std::cout << "t1_outer  " << meas->t1_outer_load << '\n';
  }
  std::cout << mgk::counter_csv_header() << '\n';
  mgk::print_csv_row(std::cout, prim, double(n), double(m), c, pred);
  if (meas) mgk::print_csv_row(std::cout, "measured", double(n), double(m), c, *meas);
  return 0;
}

int run_gen(const std::string& model, std::size_t n, std::size_t k, double p, std::size_t m, std::size_t count,
            std::uint64_t seed, const std::string& dir) {
  fs::create_directories(dir);
  for (std::size_t c = 0; c < count; ++c) {
    const std::uint64_t s = seed + c;
    const auto g = model == "nws" ? mgk::gen_nws(n, k, p, s) : mgk::gen_ba(n, m, s);
    std::ostringstream name;
    name << model << '_' << std::setw(4) << std::setfill('0') << c;
    mgk::save_graph(g, fs::path(dir) / (name.str() + ".json"), name.str());
  }
  std::cout << "wrote " << count << " graphs to " << dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Marginalized graph kernel solver"};
  app.require_subcommand(1);

  std::string fa, fb, nodewise;
  KernelArgs kargs;
  auto* kernel = app.add_subcommand("kernel", "kernel value between two graphs");
  kernel->add_option("--graph-a", fa, "first graph file")->required();
  kernel->add_option("--graph-b", fb, "second graph file")->required();
  add_kernel_flags(kernel, kargs);
  kernel->add_option("--nodewise", nodewise, "write the node-wise similarity matrix as CSV");

  std::string dataset, gram_out, format;
  bool normalize = false, deterministic = false;
  std::size_t workers = 1;
  KernelArgs gargs;
  auto* gram = app.add_subcommand("gram", "Gram matrix over a dataset");
  gram->add_option("--dataset", dataset, "directory of graph files, or a file listing them")->required();
  gram->add_option("--out", gram_out, "output file")->required();
  gram->add_option("--format", format, "csv or bin (default: from extension)")
      ->check(CLI::IsMember({"csv", "bin"}));
  gram->add_flag("--normalize", normalize, "normalize to unit diagonal");
  gram->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  gram->add_flag("--deterministic", deterministic, "single-threaded product inside each pair");
  add_kernel_flags(gram, gargs);

  std::string rgraph, method, rout;
  std::uint64_t seed = 0;
  auto* reorder = app.add_subcommand("reorder", "node reordering report");
  reorder->add_option("--graph", rgraph, "graph file")->required();
  reorder->add_option("--method", method, "pbr | rcm | morton")
      ->required()
      ->check(CLI::IsMember({"pbr", "rcm", "morton"}));
  reorder->add_option("--seed", seed, "random seed")->capture_default_str();
  reorder->add_option("--out", rout, "write the reordered graph");

  std::string tgraph, tmethod = "none";
  auto* tiles = app.add_subcommand("tiles", "octile histogram and dump");
  tiles->add_option("--graph", tgraph, "graph file")->required();
  tiles->add_option("--reorder", tmethod, "reordering before tiling")
      ->check(CLI::IsMember({"pbr", "rcm", "morton", "none"}))
      ->capture_default_str();

  std::size_t bn = 0, bm = 0;
  std::string prim;
  mgk::CostModel cm;
  bool do_measure = false;
  auto* bench = app.add_subcommand("bench", "predicted and measured operation counts");
  bench->add_option("--n", bn, "first graph size")->required();
  bench->add_option("--m", bm, "second graph size")->required();
  bench->add_option("--primitive", prim, "naive | shared-tiling | register-blocking | tiling-blocking")
      ->required()
      ->check(CLI::IsMember({"naive", "shared-tiling", "register-blocking", "tiling-blocking"}));
  bench->add_option("--E", cm.E, "bytes per edge label")->required();
  bench->add_option("--F", cm.F, "bytes per float")->required();
  bench->add_option("--X", cm.X, "flops per contribution")->required();
  bench->add_flag("--measure", do_measure, "also run one instrumented product on complete graphs");

  std::string model, gen_out;
  std::size_t gn = 0, gk = 3, gm = 6, count = 1;
  double gp = 0.1;
  std::uint64_t gseed = 0;
  auto* gen = app.add_subcommand("gen", "synthetic graphs");
  gen->add_option("--model", model, "nws | ba")->required()->check(CLI::IsMember({"nws", "ba"}));
  gen->add_option("--n", gn, "nodes")->required();
  gen->add_option("--k", gk, "NWS lattice degree")->capture_default_str();
  gen->add_option("--p", gp, "NWS shortcut probability")->capture_default_str();
  gen->add_option("--m", gm, "BA edges per new node")->capture_default_str();
  gen->add_option("--count", count, "number of graphs")->required();
  gen->add_option("--seed", gseed, "seed of the first graph; graph c uses seed + c")->required();
  gen->add_option("--out", gen_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*kernel) return run_kernel(fa, fb, kargs, nodewise);
    if (*gram) return run_gram(dataset, gram_out, format, normalize, workers, deterministic, gargs);
    if (*reorder) return run_reorder(rgraph, method, seed, rout);
    if (*tiles) return run_tiles(tgraph, tmethod);
    if (*bench) return run_bench(bn, bm, prim, cm, do_measure);
    if (*gen) return run_gen(model, gn, gk, gp, gm, count, gseed, gen_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
