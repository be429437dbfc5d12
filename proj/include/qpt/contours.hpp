#pragma once

// Marching-squares contour extraction over the Accepted region of a QPField.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace qpt {

struct ContourLine {
  double level = 0.0;
  std::vector<Vec2> points;
  bool closed = false;
};

namespace detail {

// Endpoint key on the cell-edge lattice: each contour vertex lies on a
// unique grid edge, identified by (edge orientation, ix, iy).
struct EdgeKey {
  std::uint8_t horiz;
  int ix, iy;
  bool operator<(const EdgeKey& o) const {
    if (horiz != o.horiz) return horiz < o.horiz;
    if (ix != o.ix) return ix < o.ix;
    return iy < o.iy;
  }
};

struct RawSegment {
  EdgeKey a, b;
  Vec2 pa, pb;
};

inline Vec2 edge_cross(const Grid2D& g, const EdgeKey& e, double va, double vb,
                       double level) {
  double t = (level - va) / (vb - va);
  if (e.horiz)
    return {g.x_at(e.ix) + t * g.hx(), g.y_at(e.iy)};
  return {g.x_at(e.ix), g.y_at(e.iy) + t * g.hy()};
}

}  // namespace detail

/// Marching squares at each requested level. Cells touching a non-Accepted
/// node are skipped, so lines terminate at the boundary of the computed
/// region. Levels above the field maximum yield no lines.
inline std::vector<ContourLine> extract_contours(const QPField& field,
                                                 std::span<const double> levels) {
  const Grid2D& g = field.grid;
  std::vector<ContourLine> out;

  for (double level : levels) {
    std::vector<detail::RawSegment> segs;
    for (int iy = 0; iy + 1 < g.ny; ++iy) {
      for (int ix = 0; ix + 1 < g.nx; ++ix) {
        bool ok = field.accepted(ix, iy) && field.accepted(ix + 1, iy) &&
                  field.accepted(ix, iy + 1) && field.accepted(ix + 1, iy + 1);
        if (!ok) continue;
        double v00 = field.value(ix, iy), v10 = field.value(ix + 1, iy);
        double v01 = field.value(ix, iy + 1), v11 = field.value(ix + 1, iy + 1);
        int code = (v00 >= level) | ((v10 >= level) << 1) |
                   ((v11 >= level) << 2) | ((v01 >= level) << 3);
        if (code == 0 || code == 15) continue;

        detail::EdgeKey bottom{1, ix, iy}, top{1, ix, iy + 1};
        detail::EdgeKey left{0, ix, iy}, right{0, ix + 1, iy};
        auto pt = [&](const detail::EdgeKey& e) {
          if (e.horiz) {
            double va = field.value(e.ix, e.iy), vb = field.value(e.ix + 1, e.iy);
            return detail::edge_cross(g, e, va, vb, level);
          }
          double va = field.value(e.ix, e.iy), vb = field.value(e.ix, e.iy + 1);
          return detail::edge_cross(g, e, va, vb, level);
        };
        auto emit = [&](detail::EdgeKey ea, detail::EdgeKey eb) {
          segs.push_back({ea, eb, pt(ea), pt(eb)});
        };
        switch (code) {
          case 1: case 14: emit(left, bottom); break;
          case 2: case 13: emit(bottom, right); break;
          case 3: case 12: emit(left, right); break;
          case 4: case 11: emit(right, top); break;
          case 6: case 9: emit(bottom, top); break;
          case 7: case 8: emit(top, left); break;
          case 5:   // saddle cells: resolve by cell-centre average
          case 10: {
            double centre = 0.25 * (v00 + v10 + v01 + v11);
            bool flip = (centre >= level) != (code == 5);
            if (!flip) {
              emit(left, bottom);
              emit(right, top);
            } else {
              emit(left, top);
              emit(right, bottom);
            }
            break;
          }
          default: break;
        }
      }
    }

    // Stitch segments into polylines by shared edge keys.
    std::multimap<detail::EdgeKey, std::size_t> at;
    for (std::size_t s = 0; s < segs.size(); ++s) {
      at.emplace(segs[s].a, s);
      at.emplace(segs[s].b, s);
    }
    std::vector<bool> used(segs.size(), false);
    auto take_next = [&](const detail::EdgeKey& key, std::size_t* next) {
      auto [lo, hi] = at.equal_range(key);
      for (auto it = lo; it != hi; ++it) {
        if (!used[it->second]) {
          *next = it->second;
          return true;
        }
      }
      return false;
    };

    for (std::size_t s = 0; s < segs.size(); ++s) {
      if (used[s]) continue;
      used[s] = true;
      std::vector<Vec2> pts{segs[s].pa, segs[s].pb};
      detail::EdgeKey head = segs[s].a, tail = segs[s].b;
      // extend forward from tail, then backward from head
      for (int dir = 0; dir < 2; ++dir) {
        detail::EdgeKey* end = dir == 0 ? &tail : &head;
        std::size_t next;
        while (take_next(*end, &next)) {
          used[next] = true;
          bool fromA = !(segs[next].a < *end) && !(*end < segs[next].a);
          detail::EdgeKey nk = fromA ? segs[next].b : segs[next].a;
          Vec2 np = fromA ? segs[next].pb : segs[next].pa;
          if (dir == 0)
            pts.push_back(np);
          else
            pts.insert(pts.begin(), np);
          *end = nk;
        }
      }
      ContourLine line;
      line.level = level;
      // a closed loop ends where it started; endpoints already coincide
      line.closed = !(head < tail) && !(tail < head);
      line.points = std::move(pts);
      out.push_back(std::move(line));
    }
  }
  return out;
}

/// CSV export: level, polyline id, x, y.
inline void save_contours_csv(const std::vector<ContourLine>& lines,
                              const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_contours_csv: cannot open " + path);
  os << "level,polyline,x,y\n";
  os.precision(12);
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (const Vec2& p : lines[i].points)
      os << lines[i].level << ',' << i << ',' << p[0] << ',' << p[1] << '\n';
}

}  // namespace qpt
