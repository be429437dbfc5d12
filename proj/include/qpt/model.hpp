#pragma once

// Bistable node dynamics and coupled network drift fields.
//
// Each node follows dx = -(x-1)(x^2 - nu) dt plus diffusive coupling
// beta * sum_{j in N_i} (x_j - x_i) over directed in-edges, plus additive
// white noise of amplitude alpha. For 0 < nu < 1 a single node is bistable
// with states x_Q = -sqrt(nu) (quiescent), x_S = +sqrt(nu) (saddle),
// x_A = 1 (active).

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qpt {

struct ModelParams {
  double nu = 0.01;    // bistability parameter, 0 < nu < 1
  double beta = 0.0;   // coupling strength, >= 0
  double alpha = 0.05; // noise amplitude, >= 0

  void validate() const {
    if (!(nu > 0.0 && nu < 1.0))
      throw std::invalid_argument("ModelParams: require 0 < nu < 1");
    if (!(beta >= 0.0)) throw std::invalid_argument("ModelParams: beta >= 0");
    if (!(alpha >= 0.0)) throw std::invalid_argument("ModelParams: alpha >= 0");
  }
};

struct NodeStates {
  double x_q;
  double x_s;
  double x_a;
};

inline NodeStates node_states(double nu) {
  return {-std::sqrt(nu), std::sqrt(nu), 1.0};
}

/// Single-node drift -(x-1)(x^2 - nu).
inline double node_drift(double x, double nu) {
  return -(x - 1.0) * (x * x - nu);
}

/// d/dx of node_drift: -3x^2 + 2x + nu.
inline double node_drift_deriv(double x, double nu) {
  return -3.0 * x * x + 2.0 * x + nu;
}

/// Uncoupled two-node potential; drift with beta=0 equals -grad V.
inline double potential_uncoupled(double x1, double x2, double nu) {
  auto v1 = [nu](double x) {
    return x * x * x * x / 4.0 - x * x * x / 3.0 - nu * x * x / 2.0 + nu * x;
  };
  return v1(x1) + v1(x2);
}

class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::size_t n) : values_(n, 0.0) {}
  StateVector(std::initializer_list<double> v) : values_(v) {}

  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

// Planar drift specialization used in the solver hot path. Coupling is
// affine in the two evolving coordinates: f_i = g(x_i) + lin[i][0]*x1 +
// lin[i][1]*x2 + off[i], with the beta factor already folded in.
struct PlanarDrift {
  double nu = 0.01;
  std::array<std::array<double, 2>, 2> lin{{{0.0, 0.0}, {0.0, 0.0}}};
  std::array<double, 2> off{0.0, 0.0};

  void eval(double x1, double x2, double& f1, double& f2) const {
    f1 = node_drift(x1, nu) + lin[0][0] * x1 + lin[0][1] * x2 + off[0];
    f2 = node_drift(x2, nu) + lin[1][0] * x1 + lin[1][1] * x2 + off[1];
  }

  std::array<double, 2> operator()(const std::array<double, 2>& x) const {
    std::array<double, 2> f;
    eval(x[0], x[1], f[0], f[1]);
    return f;
  }

  /// Jacobian entries row-major: [df1/dx1, df1/dx2, df2/dx1, df2/dx2].
  std::array<double, 4> jacobian(double x1, double x2) const {
    return {node_drift_deriv(x1, nu) + lin[0][0], lin[0][1], lin[1][0],
            node_drift_deriv(x2, nu) + lin[1][1]};
  }
};

/// Directed coupling topology plus parameters; frozen nodes are substituted
/// into the drift and excluded from the evolving state dimension.
class NetworkDrift {
 public:
  NetworkDrift() = default;
  NetworkDrift(int n_nodes, std::vector<std::pair<int, int>> edges,
               ModelParams params, std::map<int, double> frozen = {})
      : n_nodes_(n_nodes),
        edges_(std::move(edges)),
        params_(params),
        frozen_(std::move(frozen)) {
    params_.validate();
    for (auto [s, t] : edges_)
      if (s < 0 || s >= n_nodes_ || t < 0 || t >= n_nodes_)
        throw std::invalid_argument("NetworkDrift: edge references invalid node");
    for (auto& [i, v] : frozen_)
      if (i < 0 || i >= n_nodes_)
        throw std::invalid_argument("NetworkDrift: frozen index out of range");
    for (int i = 0; i < n_nodes_; ++i)
      if (!frozen_.count(i)) evolving_.push_back(i);
  }

  int n_nodes() const { return n_nodes_; }
  std::size_t dim() const { return evolving_.size(); }
  const ModelParams& params() const { return params_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::map<int, double>& frozen() const { return frozen_; }
  const std::vector<int>& evolving_nodes() const { return evolving_; }

  NetworkDrift with_beta(double beta) const {
    ModelParams p = params_;
    p.beta = beta;
    return NetworkDrift(n_nodes_, edges_, p, frozen_);
  }

  /// Drift of the evolving coordinates; x and out have length dim().
  void drift(std::span<const double> x, std::span<double> out) const {
    if (x.size() != dim() || out.size() != dim())
      throw std::invalid_argument("NetworkDrift::drift: dimension mismatch");
    const double nu = params_.nu, beta = params_.beta;
    for (std::size_t k = 0; k < evolving_.size(); ++k)
      out[k] = node_drift(x[k], nu);
    for (auto [tgt, src] : in_edges_expanded()) {
      int kt = evolving_pos(tgt);
      if (kt < 0) continue;  // frozen target does not evolve
      double xt = x[static_cast<std::size_t>(kt)];
      int ks = evolving_pos(src);
      double xs = ks >= 0 ? x[static_cast<std::size_t>(ks)] : frozen_.at(src);
      out[static_cast<std::size_t>(kt)] += beta * (xs - xt);
    }
  }

  StateVector drift(const StateVector& x) const {
    StateVector out(dim());
    drift(std::span<const double>(x.values()), std::span<double>(out.values()));
    return out;
  }

  /// Dense Jacobian of the evolving drift, row-major dim() x dim().
  std::vector<double> jacobian(std::span<const double> x) const {
    if (x.size() != dim())
      throw std::invalid_argument("NetworkDrift::jacobian: dimension mismatch");
    const std::size_t n = dim();
    const double nu = params_.nu, beta = params_.beta;
    std::vector<double> jac(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      jac[k * n + k] = node_drift_deriv(x[k], nu);
    for (auto [tgt, src] : in_edges_expanded()) {
      int kt = evolving_pos(tgt);
      if (kt < 0) continue;
      auto t = static_cast<std::size_t>(kt);
      jac[t * n + t] -= beta;
      int ks = evolving_pos(src);
      if (ks >= 0) jac[t * n + static_cast<std::size_t>(ks)] += beta;
    }
    return jac;
  }

  /// Compile to the planar fast path; requires dim() == 2.
  PlanarDrift compile_planar() const {
    if (dim() != 2)
      throw std::invalid_argument("compile_planar: evolving dimension must be 2");
    PlanarDrift pd;
    pd.nu = params_.nu;
    const double beta = params_.beta;
    for (auto [tgt, src] : in_edges_expanded()) {
      int kt = evolving_pos(tgt);
      if (kt < 0) continue;
      auto t = static_cast<std::size_t>(kt);
      pd.lin[t][t] -= beta;
      int ks = evolving_pos(src);
      if (ks >= 0)
        pd.lin[t][static_cast<std::size_t>(ks)] += beta;
      else
        pd.off[t] += beta * frozen_.at(src);
    }
    return pd;
  }

  static NetworkDrift single_node(ModelParams p) {
    return NetworkDrift(1, {}, p);
  }

  /// Two nodes, node 1 driven by node 2 (unidirectional).
  static NetworkDrift two_node(ModelParams p) {
    return NetworkDrift(2, {{1, 0}}, p);
  }

  /// Chain 1 <- 2 <- 3; node 3 uncoupled.
  static NetworkDrift three_node(ModelParams p) {
    return NetworkDrift(3, {{1, 0}, {2, 1}}, p);
  }

  /// Three-node chain restricted to the plane x3 = frozen_value.
  static NetworkDrift three_node_slice(ModelParams p, double frozen_value) {
    return NetworkDrift(3, {{1, 0}, {2, 1}}, p, {{2, frozen_value}});
  }

  static NetworkDrift from_json(const nlohmann::json& j) {
    ModelParams p;
    p.nu = j.value("nu", 0.01);
    p.beta = j.value("beta", 0.0);
    p.alpha = j.value("alpha", 0.05);
    int n = j.at("n_nodes").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.value("edges", nlohmann::json::array()))
      edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    std::map<int, double> frozen;
    if (j.contains("frozen"))
      for (const auto& [k, v] : j.at("frozen").items())
        frozen[std::stoi(k)] = v.get<double>();
    return NetworkDrift(n, std::move(edges), p, std::move(frozen));
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n_nodes"] = n_nodes_;
    auto edges = nlohmann::json::array();
    for (auto [s, t] : edges_) edges.push_back({s, t});
    j["edges"] = edges;
    j["nu"] = params_.nu;
    j["beta"] = params_.beta;
    j["alpha"] = params_.alpha;
    nlohmann::json fz = nlohmann::json::object();
    for (auto& [i, v] : frozen_) fz[std::to_string(i)] = v;
    j["frozen"] = fz;
    return j;
  }

 private:
  int evolving_pos(int node) const {
    for (std::size_t k = 0; k < evolving_.size(); ++k)
      if (evolving_[k] == node) return static_cast<int>(k);
    return -1;
  }

  // Edges stored as (source, target); iterate as (target, source).
  std::vector<std::pair<int, int>> in_edges_expanded() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(edges_.size());
    for (auto [s, t] : edges_) out.emplace_back(t, s);
    return out;
  }

  int n_nodes_ = 0;
  std::vector<std::pair<int, int>> edges_;
  ModelParams params_;
  std::map<int, double> frozen_;
  std::vector<int> evolving_;
};

}  // namespace qpt
