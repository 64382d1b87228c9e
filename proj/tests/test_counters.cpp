#include <gtest/gtest.h>

#include <sstream>

#include "mgk/counters.hpp"
#include "mgk/generators.hpp"
#include "mgk/product_operator.hpp"
#include "test_util.hpp"

using namespace mgk;

namespace {

const CostModel reference_model{0.0, 4.0, 3.0, 8.0, 8.0};

LabeledGraph complete_graph(std::size_t n, bool labeled) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  auto g = make_graph(n, e);
  if (labeled) {
    g.edge_shape = LabelShape::vector(1);
    for (auto& ed : g.edges) ed.label = Label::real(0.1 * double(ed.i % 3));
  }
  return g;
}

}  // namespace

// Every predicted cost cell at n = m = 16, (E, F, X, t, r) = (0, 4, 3, 8, 8), worked by hand.
TEST(PredictCosts, AllCellsAtReferenceModel) {
  const auto naive = predict_costs(reference_model, 16, 16, Primitive::naive);
  EXPECT_EQ(naive.flops, 131072.0);
  EXPECT_EQ(naive.t1_load, 262144.0);
  EXPECT_EQ(naive.t1_store, 1024.0);
  EXPECT_EQ(naive.ai1, 0.5);

  const auto st = predict_costs(reference_model, 16, 16, Primitive::shared_tiling);
  EXPECT_EQ(st.flops, 196608.0);
  EXPECT_EQ(st.t1_load, 8192.0);
  EXPECT_EQ(st.t1_store, 1024.0);
  EXPECT_EQ(st.t2_load, 557056.0);
  EXPECT_EQ(st.t2_store, 8192.0);
  EXPECT_EQ(st.ai1, 24.0);
  EXPECT_EQ(st.ai2, 3.0 / 8.5);

  const auto rb = predict_costs(reference_model, 16, 16, Primitive::register_blocking);
  EXPECT_EQ(rb.flops, 196608.0);
  EXPECT_EQ(rb.t1_load, 8192.0);
  EXPECT_EQ(rb.t1_store, 1024.0);
  EXPECT_EQ(rb.t2_load, 262144.0);
  EXPECT_EQ(rb.t2_store, 4096.0);
  EXPECT_EQ(rb.ai1, 24.0);
  EXPECT_EQ(rb.ai2, 3.0 / 4.0625);

  const auto tb = predict_costs(reference_model, 16, 16, Primitive::tiling_blocking);
  EXPECT_EQ(tb.flops, 196608.0);
  EXPECT_EQ(tb.t1_load, 8192.0);
  EXPECT_EQ(tb.t1_store, 1024.0);
  EXPECT_EQ(tb.t2_load, 65536.0);
  EXPECT_EQ(tb.t2_store, 4096.0);
  EXPECT_EQ(tb.ai1, 24.0);
  EXPECT_EQ(tb.ai2, 3.0);
}

TEST(PredictCosts, LabeledVariantsKeepETerms) {
  const CostModel c{8.0, 4.0, 10.0, 8.0, 8.0};
  const auto st = predict_costs(c, 8, 8, Primitive::shared_tiling);
  // (t/r E + (r+t)/r F) / t^2 = (8 + 8) / 64 per n^2 m^2
  EXPECT_EQ(st.t1_load, 4096.0 * 16.0 / 64.0);
  EXPECT_EQ(st.t2_load, 4096.0 * (9.0 / 8.0 * 8.0 + 17.0 / 8.0 * 4.0));
  const auto tb = predict_costs(c, 8, 8, Primitive::tiling_blocking);
  EXPECT_EQ(tb.t1_load, 4096.0 * 16.0 / 64.0);
  EXPECT_EQ(tb.ai1, 64.0 * 10.0 / 16.0);
  EXPECT_EQ(tb.t2_store, 4096.0 * 12.0 / 64.0);
}

TEST(PredictCosts, ParsingAndValidation) {
  for (auto p : {Primitive::naive, Primitive::shared_tiling, Primitive::register_blocking, Primitive::tiling_blocking})
    EXPECT_EQ(parse_primitive(to_string(p)), p);
  EXPECT_THROW(parse_primitive("blocked"), std::invalid_argument);
  EXPECT_THROW(predict_costs(CostModel{-1, 4, 3, 8, 8}, 8, 8, Primitive::naive), std::invalid_argument);
}

class DenseCounters : public ::testing::TestWithParam<std::tuple<std::size_t, bool>> {};

TEST_P(DenseCounters, MatchPredictionExactly) {
  const auto [n, labeled] = GetParam();
  const auto g = complete_graph(n, labeled);
  OperatorOptions opt;
  opt.policy = TilePolicy::dense;
  const auto ek = labeled ? BaseKernel::square_exponential(1.0) : BaseKernel::constant_one();
  ProductOperator op(g, g, BaseKernel::constant_one(), ek, opt);
  op.apply_offdiag(std::vector<double>(n * n, 1.0));
  CostModel c = reference_model;
  if (labeled) c.E = 8.0, c.X = op.declared_flops();
  const auto meas = op.measure_counters(c);
  const auto pred = predict_costs(c, double(n), double(n), Primitive::tiling_blocking);
  const double nm = double(n) * double(n);
  EXPECT_EQ(meas.flops, nm * nm * c.X);
  EXPECT_EQ(meas.flops, pred.flops);
  EXPECT_EQ(meas.t1_load, nm * nm * (c.E + 2 * c.F) / 64.0);
  EXPECT_EQ(meas.t1_load, pred.t1_load);
  EXPECT_EQ(meas.t1_store, pred.t1_store);
  EXPECT_EQ(meas.t2_load, pred.t2_load);
  EXPECT_EQ(meas.t2_store, pred.t2_store);
  EXPECT_EQ(meas.t1_outer_load, pred.t1_outer_load);
}

INSTANTIATE_TEST_SUITE_P(Sizes, DenseCounters,
                         ::testing::Combine(::testing::Values(8, 16, 32), ::testing::Bool()));

TEST(MeasuredCounters, UnlabeledSixteenNodeFlops) {
  const auto g = complete_graph(16, false);
  OperatorOptions opt;
  opt.policy = TilePolicy::dense;
  ProductOperator op(g, g, BaseKernel::constant_one(), BaseKernel::constant_one(), opt);
  op.apply_offdiag(std::vector<double>(256, 1.0));
  EXPECT_EQ(op.measure_counters(reference_model).flops, 196608.0);
  EXPECT_EQ(op.counters().applies, 1u);
  op.apply_offdiag(std::vector<double>(256, 1.0));
  EXPECT_EQ(op.measure_counters(reference_model).flops, 2 * 196608.0);
  op.reset_counters();
  EXPECT_EQ(op.measure_counters(reference_model).flops, 0.0);
}

TEST(MeasuredCounters, SparseBelowDensePrediction) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto a = gen_nws(64, 3, 0.1, s), b = gen_ba(64, 2, s);
    ProductOperator op(a, b, BaseKernel::constant_one(), BaseKernel::constant_one());
    op.apply_offdiag(std::vector<double>(64 * 64, 1.0));
    const auto meas = op.measure_counters(reference_model);
    EXPECT_LT(meas.t1_load, predict_costs(reference_model, 64, 64, Primitive::tiling_blocking).t1_load);
    EXPECT_LT(meas.flops, predict_costs(reference_model, 64, 64, Primitive::tiling_blocking).flops);
    EXPECT_GT(meas.flops, 0.0);
  }
}

TEST(Report, CsvLayout) {
  std::ostringstream os;
  os << counter_csv_header() << '\n';
  print_csv_row(os, "tiling-blocking", 16, 16, reference_model, predict_costs(reference_model, 16, 16, Primitive::tiling_blocking));
  EXPECT_EQ(os.str(),
            "primitive,n,m,E,F,X,flops,t1_load,t1_store,t2_load,t2_store,AI1,AI2\n"
            "tiling-blocking,16,16,0,4,3,196608,8192,1024,65536,4096,24,3\n");
}
