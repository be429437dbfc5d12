#pragma once

// Rectangular grid, quasipotential field container and its binary format.
//
// QPF1 layout (little-endian): magic "QPF1", uint32 nx, uint32 ny,
// doubles x0 x1 y0 y1 anchor_x anchor_y beta nu, then nx*ny row-major
// float64 values (index iy*nx + ix), then nx*ny status bytes.

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpt {

using Vec2 = std::array<double, 2>;

struct Grid2D {
  double x0 = -0.45, x1 = 0.35;
  double y0 = -0.45, y1 = 0.35;
  int nx = 256, ny = 256;

  Grid2D() = default;
  Grid2D(double x0_, double x1_, double y0_, double y1_, int nx_, int ny_)
      : x0(x0_), x1(x1_), y0(y0_), y1(y1_), nx(nx_), ny(ny_) {
    if (nx < 16 || ny < 16)
      throw std::invalid_argument("Grid2D: nx, ny must be >= 16");
    if (!(x1 > x0 && y1 > y0))
      throw std::invalid_argument("Grid2D: empty range");
  }

  static Grid2D square(double lo, double hi, int n) {
    return Grid2D(lo, hi, lo, hi, n, n);
  }

  double hx() const { return (x1 - x0) / (nx - 1); }
  double hy() const { return (y1 - y0) / (ny - 1); }
  double h() const { return std::max(hx(), hy()); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }

  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * nx + ix;
  }
  double x_at(int ix) const { return x0 + ix * hx(); }
  double y_at(int iy) const { return y0 + iy * hy(); }
  Vec2 point(int ix, int iy) const { return {x_at(ix), y_at(iy)}; }

  bool contains(const Vec2& p) const {
    return p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1;
  }
};

enum class PointStatus : std::uint8_t {
  Unknown = 0,
  Considered = 1,
  Accepted = 2,
  Unreachable = 3,
};

struct QPField {
  Grid2D grid;
  std::vector<double> values;       // meaningful only where Accepted
  std::vector<PointStatus> status;
  Vec2 anchor{0.0, 0.0};
  std::string anchor_label;
  double beta = 0.0;
  double nu = 0.01;

  QPField() = default;
  explicit QPField(const Grid2D& g)
      : grid(g),
        values(g.size(), std::numeric_limits<double>::infinity()),
        status(g.size(), PointStatus::Unknown) {}

  bool accepted(int ix, int iy) const {
    return status[grid.index(ix, iy)] == PointStatus::Accepted;
  }
  double value(int ix, int iy) const { return values[grid.index(ix, iy)]; }
};

struct SampleResult {
  bool reachable = false;
  double value = std::numeric_limits<double>::quiet_NaN();
};

/// Bilinear interpolation; unreachable if any surrounding node is not
/// Accepted. Throws if the point is outside the grid.
inline SampleResult sample_field(const QPField& field, const Vec2& p) {
  const Grid2D& g = field.grid;
  if (!g.contains(p)) throw std::out_of_range("sample_field: point outside grid");
  double fx = (p[0] - g.x0) / g.hx();
  double fy = (p[1] - g.y0) / g.hy();
  int ix = std::min(static_cast<int>(fx), g.nx - 2);
  int iy = std::min(static_cast<int>(fy), g.ny - 2);
  double tx = fx - ix, ty = fy - iy;
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx)
      if (!field.accepted(ix + dx, iy + dy)) return {};
  double v00 = field.value(ix, iy), v10 = field.value(ix + 1, iy);
  double v01 = field.value(ix, iy + 1), v11 = field.value(ix + 1, iy + 1);
  double v = (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 +
             (1 - tx) * ty * v01 + tx * ty * v11;
  return {true, v};
}

namespace detail {
template <typename T>
void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void read_raw(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace detail

inline void save_field(const QPField& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_field: cannot open " + path);
  os.write("QPF1", 4);
  detail::write_raw(os, static_cast<std::uint32_t>(f.grid.nx));
  detail::write_raw(os, static_cast<std::uint32_t>(f.grid.ny));
  for (double d : {f.grid.x0, f.grid.x1, f.grid.y0, f.grid.y1, f.anchor[0],
                   f.anchor[1], f.beta, f.nu})
    detail::write_raw(os, d);
  os.write(reinterpret_cast<const char*>(f.values.data()),
           static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  os.write(reinterpret_cast<const char*>(f.status.data()),
           static_cast<std::streamsize>(f.status.size()));
  if (!os) throw std::runtime_error("save_field: write failed");
}

inline QPField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_field: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "QPF1", 4) != 0)
    throw std::runtime_error("load_field: bad magic, not a QPF1 file");
  std::uint32_t nx, ny;
  detail::read_raw(is, nx);
  detail::read_raw(is, ny);
  double x0, x1, y0, y1, ax, ay, beta, nu;
  for (double* d : {&x0, &x1, &y0, &y1, &ax, &ay, &beta, &nu})
    detail::read_raw(is, *d);
  QPField f(Grid2D(x0, x1, y0, y1, static_cast<int>(nx), static_cast<int>(ny)));
  f.anchor = {ax, ay};
  f.beta = beta;
  f.nu = nu;
  is.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  is.read(reinterpret_cast<char*>(f.status.data()),
          static_cast<std::streamsize>(f.status.size()));
  if (!is) throw std::runtime_error("load_field: truncated file");
  return f;
}

}  // namespace qpt
