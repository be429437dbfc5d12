#include <doctest.h>

#include <qpt/mc.hpp>

#include <cmath>

using namespace qpt;

TEST_CASE("heun step is exact at an equilibrium with zero noise") {
  ModelParams p;
  p.alpha = 0.0;
  auto net = NetworkDrift::two_node(p);
  auto s = node_states(p.nu);
  StateVector x{s.x_q, s.x_a};
  StateVector noise{0.7, -1.3};  // irrelevant at alpha = 0
  auto out = heun_step(x, net, 1e-3, noise);
  CHECK(out[0] == doctest::Approx(s.x_q).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(s.x_a).epsilon(1e-14));
}

TEST_CASE("hand evaluated heun step") {
  ModelParams p;  // nu = 0.01, alpha = 0.05
  auto net = NetworkDrift::single_node(p);
  double dt = 1e-3, noise = 1.0, x = 0.0;
  // predictor and corrector written out from the scheme definition
  auto f = [&](double y) { return -(y - 1.0) * (y * y - p.nu); };
  double xp = x + f(x) * dt + p.alpha * std::sqrt(dt) * noise;
  double expected =
      x + 0.5 * (f(x) + f(xp)) * dt + p.alpha * std::sqrt(dt) * noise;
  StateVector out = heun_step(StateVector{x}, net, dt, StateVector{noise});
  CHECK(out[0] == doctest::Approx(expected).epsilon(1e-15));
  CHECK(out[0] == doctest::Approx(0.0015712).epsilon(1e-4));
}

TEST_CASE("deterministic heun matches a reference ODE integration") {
  ModelParams p;
  p.alpha = 0.0;
  auto net = NetworkDrift::single_node(p);
  StateVector x{0.5};
  StateVector zero{0.0};
  for (int i = 0; i < 10000; ++i) x = heun_step(x, net, 1e-3, zero);

  // RK4 with a much smaller step as the reference
  auto f = [&](double y) { return -(y - 1.0) * (y * y - p.nu); };
  double y = 0.5, h = 1e-5;
  for (int i = 0; i < 1000000; ++i) {
    double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2),
           k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  CHECK(std::abs(x[0] - y) < 1e-4);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(0.05));  // heading to x_A
}

TEST_CASE("event automaton") {
  double xi = 0.55, xip = 0.0;
  auto traj = [&](std::initializer_list<double> xs) {
    std::vector<std::pair<double, StateVector>> t;
    double time = 0.0;
    for (double v : xs) t.emplace_back(time++, StateVector{v});
    return t;
  };

  SUBCASE("single upward crossing") {
    auto rec = detect_events(traj({-0.1, 0.3, 0.6, 0.9}), xi, xip);
    REQUIRE(rec.events.size() == 1);
    CHECK(rec.events[0].second == 1);
    CHECK(rec.completed);
    CHECK(rec.completion_time == rec.events[0].first);
  }
  // two-node variants keep node 2 quiescent so completion never truncates
  auto traj2 = [&](std::initializer_list<double> xs) {
    std::vector<std::pair<double, StateVector>> t;
    double time = 0.0;
    for (double v : xs) t.emplace_back(time++, StateVector{v, -0.1});
    return t;
  };
  SUBCASE("escape, return, escape") {
    auto rec = detect_events(traj2({-0.1, 0.6, -0.05, 0.7}), xi, xip);
    REQUIRE(rec.events.size() == 3);
    CHECK(rec.events[0].second == 1);
    CHECK(rec.events[1].second == -1);
    CHECK(rec.events[2].second == 1);
    CHECK(!rec.completed);
  }
  SUBCASE("oscillation inside the band emits no return") {
    auto rec = detect_events(traj2({-0.1, 0.6, 0.2, 0.4, 0.1, 0.8}), xi, xip);
    REQUIRE(rec.events.size() == 1);
  }
  SUBCASE("first escape times per node") {
    std::vector<std::pair<double, StateVector>> t;
    t.emplace_back(0.0, StateVector{-0.1, -0.1});
    t.emplace_back(1.0, StateVector{0.6, -0.1});
    t.emplace_back(2.0, StateVector{0.7, 0.8});
    auto rec = detect_events(t, xi, xip);
    CHECK(rec.first_escape_times[0] == doctest::Approx(1.0));
    CHECK(rec.first_escape_times[1] == doctest::Approx(2.0));
    CHECK(rec.completed);
    CHECK(rec.completion_time == doctest::Approx(2.0));
  }
}

TEST_CASE("zero noise ensemble never escapes") {
  SimConfig cfg;
  ModelParams p;
  p.alpha = 0.0;
  cfg.network = NetworkDrift::two_node(p);
  cfg.n_realisations = 4;
  cfg.t_max = 10.0;
  auto s = node_states(p.nu);
  auto recs = run_ensemble(cfg, StateVector{s.x_q, s.x_q});
  for (const auto& r : recs) {
    CHECK(!r.completed);
    CHECK(r.events.empty());
  }
}

TEST_CASE("ensemble is bit reproducible and thread count invariant") {
  SimConfig cfg;
  cfg.n_realisations = 8;
  cfg.t_max = 50.0;
  cfg.master_seed = 42;
  auto s = node_states(0.01);
  StateVector init{s.x_q, s.x_q};
  auto a = run_ensemble(cfg, init, 1);
  auto b = run_ensemble(cfg, init, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].completed == b[i].completed);
    REQUIRE(a[i].events.size() == b[i].events.size());
    for (std::size_t e = 0; e < a[i].events.size(); ++e) {
      CHECK(a[i].events[e].first == b[i].events[e].first);
      CHECK(a[i].events[e].second == b[i].events[e].second);
    }
  }
}

TEST_CASE("symmetric first escape split at beta zero") {
  SimConfig cfg;
  cfg.n_realisations = 2000;
  cfg.master_seed = 7;
  auto s = node_states(0.01);
  auto recs = run_ensemble(cfg, StateVector{s.x_q, s.x_q});
  auto st = summarize(recs);
  REQUIRE(st.n_completed > 1900);
  CHECK(std::abs(st.p_first_escape[0] - 0.5) <= 0.03);

  // invariants of the four category means
  REQUIRE(st.first_star);
  REQUIRE(st.first);
  REQUIRE(st.second_star);
  REQUIRE(st.second);
  CHECK(*st.first_star <= *st.first + 1e-12);
  CHECK(*st.second_star <= *st.second + 1e-12);

  double hist_total = 0.0;
  for (const auto& [seq, prob] : st.sequence_histogram) hist_total += prob;
  CHECK(hist_total == doctest::Approx(1.0));
  CHECK(st.p_final_direction[0] + st.p_final_direction[1] ==
        doctest::Approx(1.0));
}

TEST_CASE("categories coincide without returns") {
  std::vector<EscapeRecord> recs(2);
  recs[0].events = {{1.0, 1}, {2.0, 2}};
  recs[0].first_escape_times = {1.0, 2.0};
  recs[0].completion_time = 2.0;
  recs[0].completed = true;
  recs[1].events = {{3.0, 2}, {5.0, 1}};
  recs[1].first_escape_times = {5.0, 3.0};
  recs[1].completion_time = 5.0;
  recs[1].completed = true;
  auto st = summarize(recs);
  CHECK(*st.first_star == *st.first);
  CHECK(*st.second_star == *st.second);
  CHECK(st.return_percentage == 0.0);
  CHECK(*st.first_star == doctest::Approx(2.0));
  CHECK(*st.second == doctest::Approx(1.5));
}

TEST_CASE("returns produce signed sequences and final order cancelling") {
  std::vector<EscapeRecord> recs(1);
  recs[0].events = {{1.0, 1}, {2.0, -1}, {3.0, 2}, {4.0, 1}};
  recs[0].first_escape_times = {1.0, 3.0};
  recs[0].completion_time = 4.0;
  recs[0].completed = true;
  auto st = summarize(recs);
  CHECK(st.return_percentage == doctest::Approx(100.0));
  // final order after cancelling [1 -1 3...]: node 2 escaped first
  CHECK(st.p_final_direction[1] == doctest::Approx(1.0));
  CHECK(st.p_first_escape[0] == doctest::Approx(1.0));
  // "first" tracks the last departure from all-quiescent (t = 3)
  CHECK(*st.first == doctest::Approx(3.0));
  CHECK(*st.first_star == doctest::Approx(1.0));
  CHECK(*st.second == doctest::Approx(3.0));
  CHECK(*st.second_star == doctest::Approx(1.0));
  std::vector<int> seq{1, -1, 2, 1};
  REQUIRE(st.sequence_histogram.count(seq) == 1);
}

TEST_CASE("invalid configuration is rejected") {
  SimConfig cfg;
  cfg.xi = 0.05;  // below x_S = 0.1
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.xi_prime = 0.2;  // above x_S
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
