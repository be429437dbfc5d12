#pragma once

// Quasipotential solver: ordered front propagation on a rectangular grid,
// minimizing the geometric action
//
//   S(psi) = int ||psi'|| ||f(psi)|| - psi' . f(psi) ds
//
// relative to an anchor attractor. Points are finalized Dijkstra-style in
// increasing value order; a finalized point updates nearby tentative points
// through one-point segments and through segments of the accepted front
// incident to it (linear interpolation of the front value plus segment
// action, minimized by golden-section search).

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "grid.hpp"
#include "model.hpp"

namespace qpt {

enum class Quadrature { Midpoint, Simpson };

enum class StopRule { WholeDomain, OnBoundaryHit, ValueCap };

struct SolverParams {
  int K = 12;                      // accepted-front neighborhood radius, cells
  Quadrature quadrature = Quadrature::Simpson;
  double anchor_radius_cells = 6;  // exact-initialization disc, in h units
  StopRule stop = StopRule::WholeDomain;
  double value_cap = std::numeric_limits<double>::infinity();
  // When set, the value of every point is appended in acceptance order.
  std::vector<double>* accept_order = nullptr;

  void validate() const {
    if (K < 4) throw std::invalid_argument("SolverParams: K >= 4 required");
    if (anchor_radius_cells < 2)
      throw std::invalid_argument("SolverParams: anchor_radius >= 2h required");
  }
};

namespace detail {

inline double action_integrand(const PlanarDrift& d, double px, double py,
                               double dx, double dy, double seg_len) {
  double f1, f2;
  d.eval(px, py, f1, f2);
  return seg_len * std::sqrt(f1 * f1 + f2 * f2) - (dx * f1 + dy * f2);
}

}  // namespace detail

/// Geometric action of the straight segment a -> b; nonnegative up to
/// quadrature error. `panels` subdivides the segment for higher accuracy.
inline double geometric_action_segment(const PlanarDrift& d, const Vec2& a,
                                       const Vec2& b,
                                       Quadrature q = Quadrature::Simpson,
                                       int panels = 1) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len = std::sqrt(dx * dx + dy * dy);
  if (len == 0.0) throw std::invalid_argument("geometric_action_segment: a == b");
  double total = 0.0;
  const double w = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    double t0 = p * w, t1 = (p + 1) * w, tm = 0.5 * (t0 + t1);
    if (q == Quadrature::Midpoint) {
      total += w * detail::action_integrand(d, a[0] + tm * dx, a[1] + tm * dy,
                                            dx, dy, len);
    } else {
      double g0 = detail::action_integrand(d, a[0] + t0 * dx, a[1] + t0 * dy,
                                           dx, dy, len);
      double gm = detail::action_integrand(d, a[0] + tm * dx, a[1] + tm * dy,
                                           dx, dy, len);
      double g1 = detail::action_integrand(d, a[0] + t1 * dx, a[1] + t1 * dy,
                                           dx, dy, len);
      total += w * (g0 + 4.0 * gm + g1) / 6.0;
    }
  }
  return total;
}

inline double geometric_action_segment(const NetworkDrift& net, const Vec2& a,
                                       const Vec2& b,
                                       Quadrature q = Quadrature::Simpson,
                                       int panels = 1) {
  return geometric_action_segment(net.compile_planar(), a, b, q, panels);
}

struct Path {
  std::vector<Vec2> vertices;

  double length() const {
    double L = 0;
    for (std::size_t i = 1; i < vertices.size(); ++i)
      L += std::hypot(vertices[i][0] - vertices[i - 1][0],
                      vertices[i][1] - vertices[i - 1][1]);
    return L;
  }
};

inline double action_of_path(const PlanarDrift& d, const Path& path,
                             Quadrature q = Quadrature::Simpson,
                             int panels = 1) {
  if (path.vertices.size() < 2)
    throw std::invalid_argument("action_of_path: need >= 2 vertices");
  double total = 0.0;
  for (std::size_t i = 1; i < path.vertices.size(); ++i)
    total += geometric_action_segment(d, path.vertices[i - 1],
                                      path.vertices[i], q, panels);
  return total;
}

inline double action_of_path(const NetworkDrift& net, const Path& path,
                             Quadrature q = Quadrature::Simpson,
                             int panels = 1) {
  return action_of_path(net.compile_planar(), path, q, panels);
}

namespace detail {

// Indexed binary min-heap with decrease-key over grid point indices.
class IndexHeap {
 public:
  explicit IndexHeap(std::size_t n) : pos_(n, -1) {}

  bool empty() const { return heap_.empty(); }

  void push_or_decrease(std::size_t idx, double key) {
    if (pos_[idx] < 0) {
      pos_[idx] = static_cast<long>(heap_.size());
      heap_.push_back({key, idx});
      sift_up(heap_.size() - 1);
    } else {
      auto h = static_cast<std::size_t>(pos_[idx]);
      if (key < heap_[h].key) {
        heap_[h].key = key;
        sift_up(h);
      }
    }
  }

  std::pair<std::size_t, double> pop_min() {
    auto top = heap_.front();
    pos_[top.idx] = -1;
    heap_.front() = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      pos_[heap_.front().idx] = 0;
      sift_down(0);
    }
    return {top.idx, top.key};
  }

 private:
  struct Entry {
    double key;
    std::size_t idx;
  };

  void sift_up(std::size_t i) {
    while (i > 0) {
      std::size_t p = (i - 1) / 2;
      if (heap_[p].key <= heap_[i].key) break;
      swap_entries(i, p);
      i = p;
    }
  }
  void sift_down(std::size_t i) {
    for (;;) {
      std::size_t l = 2 * i + 1, r = l + 1, m = i;
      if (l < heap_.size() && heap_[l].key < heap_[m].key) m = l;
      if (r < heap_.size() && heap_[r].key < heap_[m].key) m = r;
      if (m == i) break;
      swap_entries(i, m);
      i = m;
    }
  }
  void swap_entries(std::size_t a, std::size_t b) {
    std::swap(heap_[a], heap_[b]);
    pos_[heap_[a].idx] = static_cast<long>(a);
    pos_[heap_[b].idx] = static_cast<long>(b);
  }

  std::vector<Entry> heap_;
  std::vector<long> pos_;
};

// Minimize Q(lambda) = (1-l) u0 + l u1 + S(p(l) -> y) over l in [0,1]
// by golden-section search; returns the best value found.
inline double minimize_segment_update(const PlanarDrift& d, const Vec2& p0,
                                      const Vec2& p1, double u0, double u1,
                                      const Vec2& y, Quadrature q,
                                      double lambda_tol) {
  auto Q = [&](double l) {
    Vec2 p{p0[0] + l * (p1[0] - p0[0]), p0[1] + l * (p1[1] - p0[1])};
    return (1.0 - l) * u0 + l * u1 + geometric_action_segment(d, p, y, q);
  };
  constexpr double inv_phi = 0.6180339887498949;
  double a = 0.0, b = 1.0;
  double c = b - inv_phi * (b - a), e = a + inv_phi * (b - a);
  double qc = Q(c), qe = Q(e);
  double best = std::min(qc, qe);
  while (b - a > lambda_tol) {
    if (qc < qe) {
      b = e;
      e = c;
      qe = qc;
      c = b - inv_phi * (b - a);
      qc = Q(c);
    } else {
      a = c;
      c = e;
      qc = qe;
      e = a + inv_phi * (b - a);
      qe = Q(e);
    }
    best = std::min({best, qc, qe});
  }
  return best;
}

}  // namespace detail

/// Compute the quasipotential field anchored at `anchor` (must be a sink of
/// the drift, strictly inside the grid).
inline QPField solve(const NetworkDrift& net, const Grid2D& grid,
                     const Vec2& anchor, const SolverParams& params = {}) {
  params.validate();
  const PlanarDrift d = net.compile_planar();
  const double h = grid.h();
  if (params.K >= std::min(grid.nx, grid.ny) / 2)
    throw std::invalid_argument("solve: grid too coarse for K");
  if (!(anchor[0] > grid.x0 && anchor[0] < grid.x1 && anchor[1] > grid.y0 &&
        anchor[1] < grid.y1))
    throw std::invalid_argument("solve: anchor outside grid");
  {
    double f1, f2;
    d.eval(anchor[0], anchor[1], f1, f2);
    if (std::hypot(f1, f2) > 1e-6)
      throw std::invalid_argument("solve: anchor is not an equilibrium");
    auto j = d.jacobian(anchor[0], anchor[1]);
    double tr = j[0] + j[3], det = j[0] * j[3] - j[1] * j[2];
    if (!(tr < 0.0 && det > 0.0))
      throw std::invalid_argument("solve: anchor is not a sink");
  }

  QPField field(grid);
  field.anchor = anchor;
  field.beta = net.params().beta;
  field.nu = net.params().nu;

  detail::IndexHeap heap(grid.size());
  const double lambda_tol = 0.01;  // golden-section tolerance h/100 over ~h

  // Exact-initialization disc: straight-segment actions from the anchor.
  {
    const double r = params.anchor_radius_cells * h;
    int ix0 = std::max(0, static_cast<int>((anchor[0] - r - grid.x0) / grid.hx()));
    int ix1 = std::min(grid.nx - 1,
                       static_cast<int>((anchor[0] + r - grid.x0) / grid.hx()) + 1);
    int iy0 = std::max(0, static_cast<int>((anchor[1] - r - grid.y0) / grid.hy()));
    int iy1 = std::min(grid.ny - 1,
                       static_cast<int>((anchor[1] + r - grid.y0) / grid.hy()) + 1);
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix) {
        Vec2 p = grid.point(ix, iy);
        double dist = std::hypot(p[0] - anchor[0], p[1] - anchor[1]);
        if (dist > r) continue;
        double v = dist == 0.0 ? 0.0
                               : geometric_action_segment(d, anchor, p,
                                                          Quadrature::Simpson, 8);
        std::size_t idx = grid.index(ix, iy);
        field.values[idx] = v;
        field.status[idx] = PointStatus::Considered;
        heap.push_or_decrease(idx, v);
      }
  }

  const int K = params.K;
  const double radius2 = static_cast<double>(K) * K;
  bool stop = false;
  while (!heap.empty() && !stop) {
    auto [zi, zval] = heap.pop_min();
    if (params.stop == StopRule::ValueCap && zval > params.value_cap) break;
    field.status[zi] = PointStatus::Accepted;
    field.values[zi] = zval;
    if (params.accept_order) params.accept_order->push_back(zval);
    const int zx = static_cast<int>(zi % grid.nx);
    const int zy = static_cast<int>(zi / grid.nx);
    if (params.stop == StopRule::OnBoundaryHit &&
        (zx == 0 || zy == 0 || zx == grid.nx - 1 || zy == grid.ny - 1))
      stop = true;
    const Vec2 zp = grid.point(zx, zy);

    // Accepted 8-neighbors of z form the front segments incident to z.
    struct Seg {
      Vec2 p;
      double u;
    };
    Seg segs[8];
    int nsegs = 0;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        int wx = zx + dx, wy = zy + dy;
        if (wx < 0 || wy < 0 || wx >= grid.nx || wy >= grid.ny) continue;
        std::size_t wi = grid.index(wx, wy);
        if (field.status[wi] != PointStatus::Accepted) continue;
        segs[nsegs++] = {grid.point(wx, wy), field.values[wi]};
      }

    for (int dy = -K; dy <= K; ++dy) {
      int yy = zy + dy;
      if (yy < 0 || yy >= grid.ny) continue;
      for (int dx = -K; dx <= K; ++dx) {
        if (dx * dx + dy * dy > radius2) continue;
        int yx = zx + dx;
        if ((dx == 0 && dy == 0) || yx < 0 || yx >= grid.nx) continue;
        std::size_t yi = grid.index(yx, yy);
        if (field.status[yi] == PointStatus::Accepted) continue;
        const Vec2 yp = grid.point(yx, yy);
        double cur = field.values[yi];

        double cand = zval + geometric_action_segment(d, zp, yp, params.quadrature);
        if (cand < cur) cur = cand;
        for (int s = 0; s < nsegs; ++s) {
          if (std::min(zval, segs[s].u) >= cur) continue;
          double v = detail::minimize_segment_update(
              d, zp, segs[s].p, zval, segs[s].u, yp, params.quadrature,
              lambda_tol);
          if (v < cur) cur = v;
        }
        // causality: nothing cheaper than the value just finalized
        if (cur < zval) cur = zval;
        if (cur < field.values[yi]) {
          field.values[yi] = cur;
          field.status[yi] = PointStatus::Considered;
          heap.push_or_decrease(yi, cur);
        }
      }
    }
  }

  for (std::size_t i = 0; i < field.status.size(); ++i)
    if (field.status[i] != PointStatus::Accepted) {
      field.status[i] = PointStatus::Unreachable;
      field.values[i] = std::numeric_limits<double>::quiet_NaN();
    }
  return field;
}

/// Pointwise residual ||grad U||^2 + 2 f . grad U by central differences,
/// NaN where any of the four neighbors is not Accepted. The first term of
/// the governing equation is read as the squared gradient norm; away from
/// ridge points of the viscosity solution the residual shrinks with h.
inline std::vector<double> hjb_residual(const QPField& field,
                                        const NetworkDrift& net) {
  const PlanarDrift d = net.compile_planar();
  const Grid2D& g = field.grid;
  std::vector<double> res(g.size(), std::numeric_limits<double>::quiet_NaN());
  for (int iy = 1; iy < g.ny - 1; ++iy)
    for (int ix = 1; ix < g.nx - 1; ++ix) {
      if (!field.accepted(ix, iy) || !field.accepted(ix - 1, iy) ||
          !field.accepted(ix + 1, iy) || !field.accepted(ix, iy - 1) ||
          !field.accepted(ix, iy + 1))
        continue;
      double ux = (field.value(ix + 1, iy) - field.value(ix - 1, iy)) / (2 * g.hx());
      double uy = (field.value(ix, iy + 1) - field.value(ix, iy - 1)) / (2 * g.hy());
      double f1, f2;
      Vec2 p = g.point(ix, iy);
      d.eval(p[0], p[1], f1, f2);
      res[g.index(ix, iy)] = ux * ux + uy * uy + 2.0 * (f1 * ux + f2 * uy);
    }
  return res;
}

struct DescentResult {
  Path path;
  bool complete = false;
};

/// Steepest-descent polyline on U from `from` back toward the anchor.
/// Stalls on plateaus (tiny interpolated gradient) and returns the partial
/// path flagged incomplete.
inline DescentResult descend_path(const QPField& field, const Vec2& from,
                                  double grad_tol = 1e-4,
                                  std::size_t max_steps = 200000) {
  const Grid2D& g = field.grid;
  const double h = g.h();
  const double stop_radius = 2.0 * h;
  DescentResult out;
  out.path.vertices.push_back(from);
  Vec2 p = from;

  auto near_anchor = [&](const Vec2& q) {
    return std::hypot(q[0] - field.anchor[0], q[1] - field.anchor[1]) <=
           stop_radius;
  };
  if (near_anchor(p)) {
    out.complete = true;
    return out;
  }
  {
    auto s = sample_field(field, p);
    if (!s.reachable) return out;
  }

  // Seed step toward the anchor: gates sit at stationary points of U.
  {
    double ax = field.anchor[0] - p[0], ay = field.anchor[1] - p[1];
    double n = std::hypot(ax, ay);
    p = {p[0] + h * ax / n, p[1] + h * ay / n};
    out.path.vertices.push_back(p);
  }

  const double step = 0.5 * h, delta = 0.5 * h;
  for (std::size_t it = 0; it < max_steps; ++it) {
    if (near_anchor(p)) {
      out.path.vertices.push_back(field.anchor);
      out.complete = true;
      return out;
    }
    auto sample_or_bail = [&](const Vec2& q, double& v) {
      if (!g.contains(q)) return false;
      auto s = sample_field(field, q);
      if (!s.reachable) return false;
      v = s.value;
      return true;
    };
    double vxp, vxm, vyp, vym;
    if (!sample_or_bail({p[0] + delta, p[1]}, vxp) ||
        !sample_or_bail({p[0] - delta, p[1]}, vxm) ||
        !sample_or_bail({p[0], p[1] + delta}, vyp) ||
        !sample_or_bail({p[0], p[1] - delta}, vym))
      return out;
    double gx = (vxp - vxm) / (2 * delta), gy = (vyp - vym) / (2 * delta);
    double gn = std::hypot(gx, gy);
    if (gn < grad_tol) return out;  // plateau stall
    p = {p[0] - step * gx / gn, p[1] - step * gy / gn};
    out.path.vertices.push_back(p);
  }
  return out;
}

}  // namespace qpt
