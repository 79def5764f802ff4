#pragma once

// Marching-squares level-set extraction with linear interpolation on cell
// edges. Segments are stitched into maximal polylines; closed loops repeat
// their first vertex. Saddle cells are disambiguated by the cell-center
// average.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "escalate/schematic.hpp"

namespace escalate {

using Vertex = std::array<double, 2>;  // (x, y) in axis units
using Polyline = std::vector<Vertex>;

struct ContourSet {
  std::vector<double> levels;                   // ascending
  std::vector<std::vector<Polyline>> polylines; // one list per level
};

namespace detail {

// A contour vertex always sits on a unique grid edge; keying vertices by
// edge identity (not by coordinates) makes stitching robust even when the
// interpolated point lands exactly on a grid node.
//   orient 0: horizontal edge from node (i,j) to (i,j+1)
//   orient 1: vertical   edge from node (i,j) to (i+1,j)
inline std::uint64_t edge_key(int orient, int i, int j) {
  return (static_cast<std::uint64_t>(orient) << 62) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 31) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(j));
}

struct LevelTracer {
  const FieldGrid& grid;
  double level;
  int nx, ny;

  std::vector<std::array<std::uint64_t, 2>> segments;
  std::unordered_map<std::uint64_t, Vertex> vertex_on_edge;
  // Segment indices incident to each edge (at most 2 in a manifold soup).
  std::unordered_map<std::uint64_t, std::array<int, 2>> incident;

  LevelTracer(const FieldGrid& g, double lv)
      : grid(g), level(lv), nx(static_cast<int>(g.xs.size())), ny(static_cast<int>(g.ys.size())) {}

  double value(int i, int j) const { return grid.values[static_cast<std::size_t>(i) * nx + j]; }
  bool inside(double v) const { return v >= level; }

  Vertex cross_point(int orient, int i, int j) {
    const std::uint64_t key = edge_key(orient, i, j);
    const auto it = vertex_on_edge.find(key);
    if (it != vertex_on_edge.end()) return it->second;
    double v0, v1, t;
    Vertex p;
    if (orient == 0) {
      v0 = value(i, j);
      v1 = value(i, j + 1);
      t = (level - v0) / (v1 - v0);
      t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
      p = {grid.xs[j] + t * (grid.xs[j + 1] - grid.xs[j]), grid.ys[i]};
    } else {
      v0 = value(i, j);
      v1 = value(i + 1, j);
      t = (level - v0) / (v1 - v0);
      t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
      p = {grid.xs[j], grid.ys[i] + t * (grid.ys[i + 1] - grid.ys[i])};
    }
    vertex_on_edge.emplace(key, p);
    return p;
  }

  void add_segment(std::uint64_t a, std::uint64_t b) {
    const int idx = static_cast<int>(segments.size());
    segments.push_back({a, b});
    for (const std::uint64_t key : {a, b}) {
      auto& slots = incident.try_emplace(key, std::array<int, 2>{-1, -1}).first->second;
      if (slots[0] < 0) {
        slots[0] = idx;
      } else {
        slots[1] = idx;
      }
    }
  }

  void trace_cells() {
    for (int i = 0; i + 1 < ny; ++i) {
      for (int j = 0; j + 1 < nx; ++j) {
        // Corner occupancy, counterclockwise from bottom-left.
        const bool b0 = inside(value(i, j));
        const bool b1 = inside(value(i, j + 1));
        const bool b2 = inside(value(i + 1, j + 1));
        const bool b3 = inside(value(i + 1, j));
        const int mask = (b0 ? 1 : 0) | (b1 ? 2 : 0) | (b2 ? 4 : 0) | (b3 ? 8 : 0);
        if (mask == 0 || mask == 15) continue;

        const std::uint64_t bottom = edge_key(0, i, j);
        const std::uint64_t top = edge_key(0, i + 1, j);
        const std::uint64_t left = edge_key(1, i, j);
        const std::uint64_t right = edge_key(1, i, j + 1);

        switch (mask) {
          case 1: case 14: emit(bottom, i, j, left, i, j); break;
          case 2: case 13: emit(bottom, i, j, right, i, j + 1); break;
          case 4: case 11: emit(top, i + 1, j, right, i, j + 1); break;
          case 8: case 7:  emit(top, i + 1, j, left, i, j); break;
          case 3: case 12: emit(left, i, j, right, i, j + 1); break;
          case 6: case 9:  emit(bottom, i, j, top, i + 1, j); break;
          case 5: case 10: {
            const double center =
                0.25 * (value(i, j) + value(i, j + 1) + value(i + 1, j + 1) + value(i + 1, j));
            const bool center_in = inside(center);
            // mask 5: inside corners are b0,b2. Center inside connects them,
            // isolating the two outside corners; otherwise each inside
            // corner is cut off on its own. mask 10 mirrors it.
            const bool pair_through = (mask == 5) == center_in;
            if (pair_through) {
              emit(bottom, i, j, right, i, j + 1);
              emit(top, i + 1, j, left, i, j);
            } else {
              emit(bottom, i, j, left, i, j);
              emit(top, i + 1, j, right, i, j + 1);
            }
            break;
          }
          default: break;
        }
      }
    }
  }

  void emit(std::uint64_t ea, int ia, int ja, std::uint64_t eb, int ib, int jb) {
    cross_point(static_cast<int>(ea >> 62), ia, ja);
    cross_point(static_cast<int>(eb >> 62), ib, jb);
    add_segment(ea, eb);
  }

  // Chains segments into maximal polylines. Deterministic: chains start
  // from the lowest-index unvisited segment and never depend on hash order.
  std::vector<Polyline> stitch() {
    std::vector<Polyline> out;
    std::vector<bool> used(segments.size(), false);

    auto other_segment = [&](std::uint64_t edge, int seg) -> int {
      const auto& pair = incident.at(edge);
      if (pair[0] == seg) return pair[1];
      return pair[0] == -1 ? -1 : pair[0];
    };

    for (int start = 0; start < static_cast<int>(segments.size()); ++start) {
      if (used[start]) continue;
      // Walk backwards to an endpoint (or detect a loop).
      int seg = start;
      std::uint64_t tail = segments[start][0];
      while (true) {
        const int prev = other_segment(tail, seg);
        if (prev < 0 || prev == start) break;
        seg = prev;
        tail = segments[seg][0] == tail ? segments[seg][1] : segments[seg][0];
      }

      Polyline line;
      line.push_back(vertex_on_edge.at(tail));
      std::uint64_t at = tail;
      int cur = seg;
      while (cur >= 0 && !used[cur]) {
        used[cur] = true;
        at = segments[cur][0] == at ? segments[cur][1] : segments[cur][0];
        line.push_back(vertex_on_edge.at(at));
        cur = other_segment(at, cur);
      }
      out.push_back(std::move(line));
    }
    return out;
  }
};

}  // namespace detail

/// Extracts level-set polylines from a sampled grid. Levels must be given
/// in strictly ascending order.
inline ContourSet extract_contours(const FieldGrid& grid, const std::vector<double>& levels) {
  if (levels.empty()) throw std::invalid_argument("extract_contours: no levels given");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i - 1] < levels[i])) {
      throw std::invalid_argument("extract_contours: levels must be strictly ascending");
    }
  }
  if (grid.xs.size() < 2 || grid.ys.size() < 2) {
    throw std::invalid_argument("extract_contours: grid must be at least 2x2");
  }

  ContourSet set;
  set.levels = levels;
  set.polylines.reserve(levels.size());
  for (const double level : levels) {
    detail::LevelTracer tracer(grid, level);
    tracer.trace_cells();
    set.polylines.push_back(tracer.stitch());
  }
  return set;
}

}  // namespace escalate
