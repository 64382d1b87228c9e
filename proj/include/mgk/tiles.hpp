#ifndef MGK_TILES_HPP
#define MGK_TILES_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgk/graph.hpp"

namespace mgk {

/// Edge length of a tile (octile).
inline constexpr std::size_t tile_size = 8;
inline constexpr std::size_t tile_area = tile_size * tile_size;

/// Bit index of local element (r, c) in the occupancy mask.
constexpr unsigned tile_bit(std::size_t r, std::size_t c) {
  return static_cast<unsigned>(r * tile_size + c);
}

inline std::size_t tile_count_for(std::size_t n) { return (n + tile_size - 1) / tile_size; }

/// Non-empty t x t block with compact storage in ascending bit order.
struct Tile {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  std::uint64_t bitmap = 0;
  std::vector<double> weights;
  std::vector<Label> labels;  // empty in unlabeled mode

  int nnz() const { return std::popcount(bitmap); }

  friend bool operator==(const Tile&, const Tile&) = default;
};

/// Dense expansion of a tile: row-major weights and labels.
struct DenseTile {
  std::array<double, tile_area> weights{};
  std::array<Label, tile_area> labels{};
};

/// Coordinate list of non-empty tiles sorted by (row, col).
struct TiledMatrix {
  std::size_t node_count = 0;
  std::size_t t = tile_size;
  bool labeled = false;
  std::vector<Tile> tiles;
  // tiles[stripe_offsets[r] .. stripe_offsets[r+1]) hold tile row r.
  std::vector<std::size_t> stripe_offsets;

  std::size_t tile_rows() const { return tile_count_for(node_count); }
  std::size_t stored_weight_count() const {
    std::size_t s = 0;
    for (const auto& tl : tiles) s += tl.weights.size();
    return s;
  }
};

/// Zero-weight slots of a labeled tile carry a copy of its first label, so an
/// edge kernel can be evaluated on every slot of the expanded tile.
inline DenseTile expand_tile(const Tile& tile) {
  DenseTile out;
  if (!tile.labels.empty()) out.labels.fill(tile.labels.front());
  std::uint64_t bits = tile.bitmap;
  std::size_t rank = 0;
  while (bits) {
    const int b = std::countr_zero(bits);
    bits &= bits - 1;
    out.weights[b] = tile.weights[rank];
    if (!tile.labels.empty()) out.labels[b] = tile.labels[rank];
    ++rank;
  }
  return out;
}

/// Inverse of expand_tile: nonzero weights define the bitmap.
inline Tile compact_tile(const DenseTile& block, std::uint32_t row, std::uint32_t col, bool labeled) {
  Tile t;
  t.row = row;
  t.col = col;
  for (unsigned b = 0; b < tile_area; ++b) {
    if (block.weights[b] != 0.0) {
      t.bitmap |= std::uint64_t{1} << b;
      t.weights.push_back(block.weights[b]);
      if (labeled) t.labels.push_back(block.labels[b]);
    }
  }
  return t;
}

inline TiledMatrix build_tiles(const LabeledGraph& g) {
  TiledMatrix m;
  m.node_count = g.node_count;
  m.labeled = g.edge_shape.kind != LabelKind::none;

  struct Entry {
    unsigned bit;
    double w;
    Label label;
  };
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<Entry>> buckets;
  auto place = [&](std::size_t r, std::size_t c, const Edge& e) {
    const auto key = std::make_pair(static_cast<std::uint32_t>(r / tile_size),
                                    static_cast<std::uint32_t>(c / tile_size));
    buckets[key].push_back({tile_bit(r % tile_size, c % tile_size), e.weight, e.label});
  };
  for (const Edge& e : g.edges) {
    if (e.i == e.j) throw std::invalid_argument("self-loop at node " + std::to_string(e.i));
    place(e.i, e.j, e);
    place(e.j, e.i, e);
  }
  for (auto& [key, entries] : buckets) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.bit < b.bit; });
    Tile t;
    t.row = key.first;
    t.col = key.second;
    for (const auto& en : entries) {
      const std::uint64_t mask = std::uint64_t{1} << en.bit;
      if (t.bitmap & mask) throw std::invalid_argument("duplicate edge while tiling");
      t.bitmap |= mask;
      t.weights.push_back(en.w);
      if (m.labeled) t.labels.push_back(en.label);
    }
    m.tiles.push_back(std::move(t));
  }
  m.stripe_offsets.assign(m.tile_rows() + 1, 0);
  for (const auto& t : m.tiles) ++m.stripe_offsets[t.row + 1];
  for (std::size_t r = 0; r < m.tile_rows(); ++r) m.stripe_offsets[r + 1] += m.stripe_offsets[r];
  return m;
}

/// Full symmetric weight matrix (padded to a multiple of t) rebuilt from tiles.
inline DenseMatrix expand_all(const TiledMatrix& m) {
  const std::size_t np = m.tile_rows() * tile_size;
  DenseMatrix a(np, np);
  for (const auto& t : m.tiles) {
    const auto block = expand_tile(t);
    for (std::size_t r = 0; r < tile_size; ++r)
      for (std::size_t c = 0; c < tile_size; ++c)
        a(t.row * tile_size + r, t.col * tile_size + c) = block.weights[tile_bit(r, c)];
  }
  return a;
}

struct TileHistogram {
  std::array<std::size_t, tile_area + 1> buckets{};  // buckets[k]: tiles with k nonzeros
  std::size_t total = 0;
  double mean_density = 0.0;
};

inline TileHistogram tile_histogram(const TiledMatrix& m) {
  TileHistogram h;
  std::size_t nnz = 0;
  for (const auto& t : m.tiles) {
    ++h.buckets[static_cast<std::size_t>(t.nnz())];
    nnz += static_cast<std::size_t>(t.nnz());
  }
  h.total = m.tiles.size();
  h.mean_density = h.total ? static_cast<double>(nnz) / static_cast<double>(h.total * tile_area) : 0.0;
  return h;
}

/// One line per tile: "r c 0x<bitmap> <nnz>".
inline void dump_tiles(std::ostream& os, const TiledMatrix& m) {
  char buf[96];
  for (const auto& t : m.tiles) {
    std::snprintf(buf, sizeof buf, "%u %u 0x%016llx %d\n", t.row, t.col,
                  static_cast<unsigned long long>(t.bitmap), t.nnz());
    os << buf;
  }
}

}  // namespace mgk

#endif  // MGK_TILES_HPP
