#include <doctest.h>

#include <cmath>
#include <random>

#include <qpt/model.hpp>

using namespace qpt;

TEST_CASE("node_drift roots and direct values") {
  CHECK(node_drift(1.0, 0.01) == doctest::Approx(0.0));
  CHECK(node_drift(0.1, 0.01) == doctest::Approx(0.0));
  CHECK(node_drift(-0.1, 0.01) == doctest::Approx(0.0));
  CHECK(node_drift(0.0, 0.01) == doctest::Approx(-0.01));
}

TEST_CASE("node states ordering") {
  auto s = node_states(0.01);
  CHECK(s.x_q == doctest::Approx(-0.1));
  CHECK(s.x_s == doctest::Approx(0.1));
  CHECK(s.x_a == doctest::Approx(1.0));
  CHECK(s.x_q < s.x_s);
  CHECK(s.x_s < s.x_a);
}

TEST_CASE("two-node drift examples") {
  ModelParams p{0.01, 0.1, 0.05};
  auto net = NetworkDrift::two_node(p);
  REQUIRE(net.dim() == 2);

  StateVector qq{-0.1, -0.1};
  auto f = net.drift(qq);
  CHECK(f[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(f[1] == doctest::Approx(0.0).epsilon(1e-14));

  StateVector x{1.0, -0.1};
  f = net.drift(x);
  CHECK(f[0] == doctest::Approx(-0.11));
  CHECK(f[1] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("three-node slice drift example") {
  ModelParams p{0.01, 0.05, 0.05};
  auto net = NetworkDrift::three_node_slice(p, -0.1);
  REQUIRE(net.dim() == 2);
  StateVector x{-0.1, 0.1};
  auto f = net.drift(x);
  CHECK(f[0] == doctest::Approx(0.01));
  CHECK(f[1] == doctest::Approx(-0.01));
}

TEST_CASE("drift dimension mismatch throws") {
  auto net = NetworkDrift::two_node({});
  StateVector x{0.0};
  CHECK_THROWS(net.drift(x));
}

TEST_CASE("jacobian examples") {
  auto one = NetworkDrift::single_node({0.01, 0.0, 0.05});
  double x1 = -0.1;
  auto j = one.jacobian(std::span<const double>(&x1, 1));
  CHECK(j[0] == doctest::Approx(-0.22));
  x1 = 0.1;
  j = one.jacobian(std::span<const double>(&x1, 1));
  CHECK(j[0] == doctest::Approx(0.18));

  auto two = NetworkDrift::two_node({0.01, 0.1, 0.05});
  StateVector ss{0.1, 0.1};
  j = two.jacobian(std::span<const double>(ss.values()));
  CHECK(j[0] == doctest::Approx(0.08));
  CHECK(j[1] == doctest::Approx(0.1));
  CHECK(j[2] == doctest::Approx(0.0));
  CHECK(j[3] == doctest::Approx(0.18));
}

TEST_CASE("jacobian matches central finite differences at random points") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 1.3);
  auto net = NetworkDrift::two_node({0.01, 0.13, 0.05});
  const double eps = 1e-6;
  for (int it = 0; it < 50; ++it) {
    StateVector x{u(rng), u(rng)};
    auto jac = net.jacobian(std::span<const double>(x.values()));
    for (int col = 0; col < 2; ++col) {
      StateVector xp = x, xm = x;
      xp[col] += eps;
      xm[col] -= eps;
      auto fp = net.drift(xp), fm = net.drift(xm);
      for (int row = 0; row < 2; ++row) {
        double fd = (fp[row] - fm[row]) / (2 * eps);
        CHECK(jac[row * 2 + col] == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("potential_uncoupled values and gradient identity") {
  const double nu = 0.01;
  CHECK(potential_uncoupled(0.0, 0.0, nu) == doctest::Approx(0.0));

  // barrier V(x_SQ) - V(x_QQ) = (4/3) nu^{3/2}
  auto s = node_states(nu);
  double barrier = potential_uncoupled(s.x_s, s.x_q, nu) -
                   potential_uncoupled(s.x_q, s.x_q, nu);
  CHECK(barrier == doctest::Approx((4.0 / 3.0) * std::pow(nu, 1.5)).epsilon(1e-12));
  CHECK(barrier == doctest::Approx(0.00133333333).epsilon(1e-6));

  // -grad V equals the beta=0 drift at random points
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.6, 1.4);
  auto net = NetworkDrift::two_node({nu, 0.0, 0.05});
  const double eps = 1e-6;
  for (int it = 0; it < 100; ++it) {
    StateVector x{u(rng), u(rng)};
    auto f = net.drift(x);
    double g1 = -(potential_uncoupled(x[0] + eps, x[1], nu) -
                  potential_uncoupled(x[0] - eps, x[1], nu)) /
                (2 * eps);
    double g2 = -(potential_uncoupled(x[0], x[1] + eps, nu) -
                  potential_uncoupled(x[0], x[1] - eps, nu)) /
                (2 * eps);
    CHECK(f[0] == doctest::Approx(g1).epsilon(1e-6));
    CHECK(f[1] == doctest::Approx(g2).epsilon(1e-6));
  }
}

TEST_CASE("symmetric states stay equilibria for every beta") {
  auto s = node_states(0.01);
  for (double beta : {0.0, 0.05, 0.17, 0.3, 1.0}) {
    for (auto net : {NetworkDrift::two_node({0.01, beta, 0.05}),
                     NetworkDrift::three_node_slice({0.01, beta, 0.05}, s.x_q)}) {
      StateVector qq{s.x_q, s.x_q};
      auto f = net.drift(qq);
      CHECK(std::abs(f[0]) < 1e-14);
      // node 2 of the slice couples to the frozen x_Q value
      CHECK(std::abs(f[1]) < 1e-14);
    }
    auto two = NetworkDrift::two_node({0.01, beta, 0.05});
    StateVector aa{s.x_a, s.x_a}, ss{s.x_s, s.x_s};
    auto fa = two.drift(aa);
    auto fs = two.drift(ss);
    CHECK(std::abs(fa[0]) + std::abs(fa[1]) < 1e-14);
    CHECK(std::abs(fs[0]) + std::abs(fs[1]) < 1e-14);
  }
}

TEST_CASE("planar compilation agrees with general drift") {
  for (auto net : {NetworkDrift::two_node({0.01, 0.17, 0.05}),
                   NetworkDrift::three_node_slice({0.01, 0.08, 0.05}, 1.0)}) {
    auto pd = net.compile_planar();
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-0.6, 1.4);
    for (int it = 0; it < 30; ++it) {
      StateVector x{u(rng), u(rng)};
      auto f = net.drift(x);
      double f1, f2;
      pd.eval(x[0], x[1], f1, f2);
      CHECK(f[0] == doctest::Approx(f1).epsilon(1e-14));
      CHECK(f[1] == doctest::Approx(f2).epsilon(1e-14));
    }
  }
}

TEST_CASE("json round trip") {
  auto net = NetworkDrift::three_node_slice({0.02, 0.07, 0.03}, -0.1414);
  auto j = net.to_json();
  auto back = NetworkDrift::from_json(j);
  CHECK(back.n_nodes() == 3);
  CHECK(back.dim() == 2);
  CHECK(back.params().nu == doctest::Approx(0.02));
  CHECK(back.params().beta == doctest::Approx(0.07));
  CHECK(back.frozen().at(2) == doctest::Approx(-0.1414));
  StateVector x{0.3, -0.2};
  auto f0 = net.drift(x);
  auto f1 = back.drift(x);
  CHECK(f0[0] == doctest::Approx(f1[0]).epsilon(1e-15));
  CHECK(f0[1] == doctest::Approx(f1[1]).epsilon(1e-15));
}

TEST_CASE("invalid parameters rejected") {
  CHECK_THROWS(NetworkDrift::two_node({1.5, 0.0, 0.05}));
  CHECK_THROWS(NetworkDrift::two_node({0.01, -0.1, 0.05}));
  CHECK_THROWS(NetworkDrift(2, {{0, 5}}, ModelParams{}));
}
