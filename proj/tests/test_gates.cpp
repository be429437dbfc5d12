#include <doctest.h>

#include <qpt/gates.hpp>

#include <cmath>

using namespace qpt;

namespace {

Equilibrium named(const std::string& label, Vec2 pos) {
  Equilibrium e;
  e.label = label;
  e.position = pos;
  e.stability = Stability::Saddle;
  return e;
}

}  // namespace

TEST_CASE("two equal gates at beta zero") {
  auto net = NetworkDrift::two_node(ModelParams{});
  auto s = node_states(0.01);
  QPField f = solve(net, Grid2D::square(-0.45, 0.35, 256), {s.x_q, s.x_q});
  f.anchor_label = "QQ";
  auto rep = gate_heights(
      f, {named("SQ", {s.x_s, s.x_q}), named("QS", {s.x_q, s.x_s})});
  double gate = (8.0 / 3.0) * std::pow(0.01, 1.5);
  REQUIRE(rep.heights.at("SQ").reachable);
  REQUIRE(rep.heights.at("QS").reachable);
  double hsq = rep.heights.at("SQ").value;
  double hqs = rep.heights.at("QS").value;
  CHECK(std::abs(hsq - gate) / gate <= 0.02);
  CHECK(std::abs(hqs - gate) / gate <= 0.02);
  CHECK(std::abs(hsq - hqs) / gate <= 0.01);
}

TEST_CASE("gate preference flips across the crossing") {
  ModelParams p;
  auto make = [&](double beta) {
    p.beta = beta;
    return NetworkDrift::two_node(p);
  };
  Grid2D domain = Grid2D::square(-0.45, 1.3, 192);
  for (double beta : {0.17, 0.19}) {
    auto net = make(beta);
    auto anchor = locate_labeled(net, "AQ", beta);
    auto sq = locate_labeled(net, "SQ", beta);
    auto as = locate_labeled(net, "AS", beta);
    REQUIRE(anchor);
    REQUIRE(sq);
    REQUIRE(as);
    QPField f = solve(net, domain, anchor->position);
    f.anchor_label = "AQ";
    auto rep =
        gate_heights(f, {named("SQ", sq->position), named("AS", as->position)});
    if (beta < 0.18)
      CHECK(rep.gate == "AS");
    else
      CHECK(rep.gate == "SQ");
  }
}

TEST_CASE("all saddles unreachable is an error") {
  QPField f(Grid2D::square(-1.0, 1.0, 64));
  CHECK_THROWS_AS(gate_heights(f, {named("SQ", {0.1, -0.1})}),
                  std::runtime_error);
}

TEST_CASE("gate height bifurcation bracket") {
  auto net = NetworkDrift::two_node(ModelParams{});
  GateScanParams gp;
  gp.domain = Grid2D::square(-0.45, 1.3, 16);
  gp.coarse_n = 128;
  gp.fine_n = 192;
  gp.coarse_samples = 6;
  gp.tol_beta = 2e-3;
  auto scan =
      gate_bifurcation_scan(net, 0.15, 0.20, "AQ", {"SQ", "AS"}, gp);
  REQUIRE(scan.crossing);
  CHECK(*scan.crossing >= 0.175);
  CHECK(*scan.crossing <= 0.195);
  CHECK(scan.bracket.second - scan.bracket.first <= 2e-3 + 1e-12);
  CHECK(scan.warnings.empty());
}

TEST_CASE("scan truncates when a participant folds away") {
  auto net = NetworkDrift::two_node(ModelParams{});
  GateScanParams gp;
  gp.domain = Grid2D::square(-0.45, 1.3, 16);
  gp.coarse_n = 128;
  gp.fine_n = 128;
  gp.coarse_samples = 5;
  // AQ anchor folds away at beta = 0.2025 inside [0.15, 0.25]
  auto scan = gate_bifurcation_scan(net, 0.15, 0.25, "AQ", {"SQ", "AS"}, gp);
  REQUIRE(!scan.warnings.empty());
  CHECK(scan.betas.size() < 5);
}

TEST_CASE("escape time estimate") {
  CHECK(escape_time_estimate(0.0, 0.3) == doctest::Approx(1.0));
  double u = 0.00266667;
  CHECK(escape_time_estimate(u, 0.05) == doctest::Approx(2.906).epsilon(1e-3));
  // doubling sigma divides the log estimate by four
  double a = std::log(escape_time_estimate(u, 0.05));
  double b = std::log(escape_time_estimate(u, 0.10));
  CHECK(a == doctest::Approx(4.0 * b));
  CHECK_THROWS_AS(escape_time_estimate(1.0, 0.0), std::invalid_argument);
}
