#include <doctest.h>

#include <qpt/contours.hpp>
#include <qpt/solver.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace qpt;

namespace {

// Synthetic paraboloid field r^2 on [-1,1]^2, fully accepted.
QPField paraboloid_field(int n) {
  QPField f(Grid2D(-1.0, 1.0, -1.0, 1.0, n, n));
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      Vec2 p = f.grid.point(ix, iy);
      f.values[f.grid.index(ix, iy)] = p[0] * p[0] + p[1] * p[1];
      f.status[f.grid.index(ix, iy)] = PointStatus::Accepted;
    }
  f.anchor = {0.0, 0.0};
  return f;
}

}  // namespace

TEST_CASE("circular levels on a paraboloid") {
  auto f = paraboloid_field(128);
  double levels[] = {0.04, 0.25};
  auto lines = extract_contours(f, levels);
  REQUIRE(lines.size() == 2);
  for (const auto& line : lines) {
    CHECK(line.closed);
    double r = std::sqrt(line.level);
    for (const Vec2& p : line.points)
      CHECK(std::abs(std::hypot(p[0], p[1]) - r) < 2 * f.grid.h());
  }
}

TEST_CASE("level above maximum is empty") {
  auto f = paraboloid_field(64);
  double levels[] = {10.0};
  CHECK(extract_contours(f, levels).empty());
}

TEST_CASE("lines terminate at the unreachable region") {
  auto f = paraboloid_field(128);
  // mask the right half plane
  for (int iy = 0; iy < f.grid.ny; ++iy)
    for (int ix = f.grid.nx / 2; ix < f.grid.nx; ++ix)
      f.status[f.grid.index(ix, iy)] = PointStatus::Unreachable;
  double levels[] = {0.25};
  auto lines = extract_contours(f, levels);
  REQUIRE(!lines.empty());
  for (const auto& line : lines) {
    CHECK(!line.closed);
    for (const Vec2& p : line.points) CHECK(p[0] <= 0.0 + f.grid.h());
  }
}

TEST_CASE("small loop around the anchor of a solved field") {
  auto net = NetworkDrift::two_node(ModelParams{});
  auto s = node_states(0.01);
  Vec2 anchor{s.x_q, s.x_q};
  QPField f = solve(net, Grid2D::square(-0.45, 0.35, 128), anchor);
  double gate = (8.0 / 3.0) * std::pow(0.01, 1.5);
  double levels[] = {0.05 * gate};
  auto lines = extract_contours(f, levels);
  REQUIRE(!lines.empty());
  // every line at this tiny level stays near the anchor and closes
  for (const auto& line : lines) {
    CHECK(line.closed);
    for (const Vec2& p : line.points) {
      CHECK(std::hypot(p[0] - anchor[0], p[1] - anchor[1]) < 0.12);
    }
  }
}

TEST_CASE("csv export round trip") {
  auto f = paraboloid_field(64);
  double levels[] = {0.25};
  auto lines = extract_contours(f, levels);
  const char* path = "contours_test.csv";
  save_contours_csv(lines, path);
  std::ifstream is(path);
  REQUIRE(is.good());
  std::string header;
  std::getline(is, header);
  CHECK(header == "level,polyline,x,y");
  std::size_t rows = 0;
  for (std::string row; std::getline(is, row);) ++rows;
  std::size_t expected = 0;
  for (const auto& l : lines) expected += l.points.size();
  CHECK(rows == expected);
  std::remove(path);
}
