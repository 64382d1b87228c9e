#include <gtest/gtest.h>

#include <bit>
#include <sstream>

#include "mgk/generators.hpp"
#include "mgk/reorder.hpp"
#include "mgk/tiles.hpp"
#include "test_util.hpp"

using namespace mgk;

namespace {

LabeledGraph complete_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make_graph(n, e);
}

Tile random_tile(Rng& rng, bool labeled) {
  DenseTile d;
  const double density = rng.uniform();
  for (std::size_t b = 0; b < tile_area; ++b)
    if (rng.bernoulli(density)) {
      d.weights[b] = 0.1 + rng.uniform();
      if (labeled) d.labels[b] = Label::real(rng.uniform());
    }
  if (labeled)
    for (auto& l : d.labels)
      if (l.kind == LabelKind::none) l = Label::real(0.0);
  return compact_tile(d, 0, 0, labeled);
}

}  // namespace

TEST(BuildTiles, EmptyGraph) { EXPECT_TRUE(build_tiles(make_graph(8, {})).tiles.empty()); }

TEST(BuildTiles, CompleteOctile) {
  const auto m = build_tiles(complete_graph(8));
  ASSERT_EQ(m.tiles.size(), 1u);
  std::uint64_t expect = ~std::uint64_t{0};
  for (int d : {0, 9, 18, 27, 36, 45, 54, 63}) expect &= ~(std::uint64_t{1} << d);
  EXPECT_EQ(m.tiles[0].bitmap, expect);
  EXPECT_EQ(m.tiles[0].nnz(), 56);
}

TEST(BuildTiles, SingleCrossEdge) {
  const auto m = build_tiles(make_graph(16, {{0, 9}}));
  ASSERT_EQ(m.tiles.size(), 2u);
  EXPECT_EQ(m.tiles[0].row, 0u);
  EXPECT_EQ(m.tiles[0].col, 1u);
  EXPECT_EQ(m.tiles[0].bitmap, std::uint64_t{1} << 1);
  EXPECT_EQ(m.tiles[1].row, 1u);
  EXPECT_EQ(m.tiles[1].col, 0u);
  EXPECT_EQ(m.tiles[1].bitmap, std::uint64_t{1} << 8);
  const auto full = expand_all(m);
  EXPECT_EQ(full(0, 9), 1.0);
  EXPECT_EQ(full(9, 0), 1.0);
}

TEST(ExpandTile, Examples) {
  Tile t;
  t.bitmap = (std::uint64_t{1} << 1) | (std::uint64_t{1} << 63);
  t.weights = {2.5, 7.0};
  const auto d = expand_tile(t);
  EXPECT_EQ(d.weights[tile_bit(0, 1)], 2.5);
  EXPECT_EQ(d.weights[tile_bit(7, 7)], 7.0);
  double rest = 0.0;
  for (double w : d.weights) rest += w;
  EXPECT_EQ(rest, 9.5);

  Tile full;
  full.bitmap = ~std::uint64_t{0};
  for (int k = 1; k <= 64; ++k) full.weights.push_back(k);
  const auto f = expand_tile(full);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(f.weights[r * 8 + c], double(r * 8 + c + 1));
}

TEST(ExpandTile, RoundTripRandom) {
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const bool labeled = k % 2;
    const Tile t = random_tile(rng, labeled);
    const Tile back = compact_tile(expand_tile(t), 0, 0, labeled);
    EXPECT_EQ(back.bitmap, t.bitmap);
    EXPECT_EQ(back.weights, t.weights);
    EXPECT_EQ(back.labels, t.labels);
    EXPECT_EQ(std::popcount(t.bitmap), static_cast<int>(t.weights.size()));
  }
}

TEST(BuildTiles, RoundTripMatchesNaiveMatrix) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(64);
    const auto g = testutil::random_graph(n, rng.uniform() * 0.4, trial % 2, 1000 + trial);
    const auto m = build_tiles(g);
    const auto full = expand_all(m);
    const auto naive = adjacency_matrix(g);
    EXPECT_EQ(full.rows % tile_size, 0u);
    for (std::size_t i = 0; i < full.rows; ++i)
      for (std::size_t j = 0; j < full.cols; ++j)
        EXPECT_EQ(full(i, j), i < n && j < n ? naive(i, j) : 0.0);
    // Symmetric tile pattern with transposed blocks.
    std::size_t stored = 0;
    for (const auto& t : m.tiles) {
      EXPECT_NE(t.bitmap, 0u);
      stored += t.weights.size();
      bool found = false;
      for (const auto& u : m.tiles)
        if (u.row == t.col && u.col == t.row) {
          found = true;
          const auto a = expand_tile(t), b = expand_tile(u);
          for (std::size_t r = 0; r < 8; ++r)
            for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(a.weights[r * 8 + c], b.weights[c * 8 + r]);
        }
      EXPECT_TRUE(found);
    }
    EXPECT_EQ(stored, 2 * g.edges.size());
    for (std::size_t k = 1; k < m.tiles.size(); ++k)
      EXPECT_TRUE(std::pair(m.tiles[k - 1].row, m.tiles[k - 1].col) < std::pair(m.tiles[k].row, m.tiles[k].col));
  }
}

TEST(BuildTiles, LabelsFollowBitmap) {
  auto g = make_graph(10, {{0, 3}, {2, 9}});
  g.edge_shape = LabelShape::vector(1);
  g.edges[0].label = Label::real(0.25);
  g.edges[1].label = Label::real(0.75);
  const auto m = build_tiles(g);
  EXPECT_TRUE(m.labeled);
  for (const auto& t : m.tiles) EXPECT_EQ(t.labels.size(), t.weights.size());
  const auto d = expand_tile(m.tiles[0]);
  EXPECT_EQ(d.labels[tile_bit(0, 3)], Label::real(0.25));
  EXPECT_EQ(d.labels[tile_bit(3, 0)], Label::real(0.25));
}

TEST(Histogram, Examples) {
  EXPECT_EQ(tile_histogram(TiledMatrix{}).total, 0u);
  // Complete bipartite between nodes 0-7 and 8-15: two full off-diagonal tiles.
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 8; j < 16; ++j) e.emplace_back(i, j);
  const auto h = tile_histogram(build_tiles(make_graph(16, e)));
  EXPECT_EQ(h.buckets[64], 2u);
  EXPECT_EQ(h.total, 2u);
  EXPECT_DOUBLE_EQ(h.mean_density, 1.0);
}

TEST(Histogram, MatchesDenseScan) {
  for (std::uint64_t s = 0; s < 16; ++s) {
    const auto g = gen_nws(96, 3, 0.1, s);
    const auto h = tile_histogram(build_tiles(g));
    const auto A = adjacency_matrix(g);
    std::array<std::size_t, 65> scan{};
    std::size_t total = 0;
    for (std::size_t R = 0; R < 12; ++R)
      for (std::size_t C = 0; C < 12; ++C) {
        int nnz = 0;
        for (std::size_t r = 0; r < 8; ++r)
          for (std::size_t c = 0; c < 8; ++c) nnz += A(R * 8 + r, C * 8 + c) != 0.0;
        if (nnz) ++scan[nnz], ++total;
      }
    EXPECT_EQ(h.buckets, scan);
    EXPECT_EQ(h.total, total);
    std::size_t sum = 0;
    for (auto b : h.buckets) sum += b;
    EXPECT_EQ(sum, h.total);
  }
}

TEST(Dump, Format) {
  std::ostringstream os;
  dump_tiles(os, build_tiles(make_graph(16, {{0, 9}})));
  EXPECT_EQ(os.str(), "0 1 0x0000000000000002 1\n1 0 0x0000000000000100 1\n");
}

TEST(BuildTiles, RejectsInvalid) {
  auto g = make_graph(3, {{0, 1}});
  g.edges.push_back({1, 0, 1.0, {}});
  EXPECT_THROW(build_tiles(g), std::invalid_argument);
}
