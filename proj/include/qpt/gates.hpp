#pragma once

// Gate heights at boundary saddles, the gate-height bifurcation scan in
// beta, and the asymptotic escape-time estimate exp(U/sigma^2).

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "equilibria.hpp"
#include "grid.hpp"
#include "solver.hpp"

namespace qpt {

struct GateReport {
  double beta = 0.0;
  std::string anchor_label;
  std::map<std::string, SampleResult> heights;
  std::string gate;  // label with minimal finite height
};

/// Sample the field at each saddle; the gate is the argmin over finite
/// heights. Throws if every saddle is unreachable.
inline GateReport gate_heights(const QPField& field,
                               const std::vector<Equilibrium>& saddles) {
  GateReport rep;
  rep.beta = field.beta;
  rep.anchor_label = field.anchor_label;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : saddles) {
    SampleResult r;
    if (field.grid.contains(s.position)) r = sample_field(field, s.position);
    rep.heights[s.label] = r;
    if (r.reachable && r.value < best) {
      best = r.value;
      rep.gate = s.label;
    }
  }
  if (rep.gate.empty())
    throw std::runtime_error("gate_heights: all saddles unreachable, no gate");
  return rep;
}

struct GateScan {
  std::vector<double> betas;
  std::vector<GateReport> reports;
  std::optional<double> crossing;           // beta_G
  std::pair<double, double> bracket{0, 0};  // bisection interval
  std::vector<std::string> warnings;
};

struct GateScanParams {
  Grid2D domain;             // spatial window; resolution is overridden below
  int coarse_n = 256;        // grid for the coarse pass
  int fine_n = 512;          // grid for bisection solves
  int coarse_samples = 11;
  double tol_beta = 1e-3;
  SolverParams solver;
};

namespace detail {

// Height difference h(saddle1) - h(saddle2) from a fresh solve at beta.
// nullopt when the anchor or either saddle has disappeared, or when the
// polished saddles approach within 1e-3 of each other (indeterminate).
struct GateEval {
  std::optional<double> diff;
  GateReport report;
  bool participants_exist = true;
};

inline GateEval gate_eval(const NetworkDrift& net, double beta,
                          const std::string& anchor_label,
                          const std::pair<std::string, std::string>& pair,
                          const Grid2D& grid, const SolverParams& sp) {
  GateEval ev;
  auto anchor = locate_labeled(net, anchor_label, beta);
  auto s1 = locate_labeled(net, pair.first, beta);
  auto s2 = locate_labeled(net, pair.second, beta);
  if (!anchor || !s1 || !s2) {
    ev.participants_exist = false;
    return ev;
  }
  double sep = std::hypot(s1->position[0] - s2->position[0],
                          s1->position[1] - s2->position[1]);
  if (sep < 1e-3) return ev;  // near-coincident saddles: indeterminate
  auto scoped = net.with_beta(beta);
  QPField field = solve(scoped, grid, anchor->position, sp);
  field.anchor_label = anchor_label;
  s1->label = pair.first;
  s2->label = pair.second;
  ev.report = gate_heights(field, {*s1, *s2});
  const auto& h1 = ev.report.heights.at(pair.first);
  const auto& h2 = ev.report.heights.at(pair.second);
  if (h1.reachable && h2.reachable) ev.diff = h1.value - h2.value;
  return ev;
}

}  // namespace detail

/// Coarse scan of the gate-height difference over [beta_lo, beta_hi], then
/// bisection on the first sign change. If a participant disappears inside
/// the range (saddle-node), the range is truncated with a warning.
inline GateScan gate_bifurcation_scan(const NetworkDrift& net, double beta_lo,
                                      double beta_hi,
                                      const std::string& anchor_label,
                                      std::pair<std::string, std::string> pair,
                                      const GateScanParams& params = {}) {
  if (!(beta_hi > beta_lo) || params.coarse_samples < 2 ||
      params.tol_beta <= 0)
    throw std::invalid_argument("gate_bifurcation_scan: bad parameters");
  GateScan scan;
  Grid2D coarse(params.domain.x0, params.domain.x1, params.domain.y0,
                params.domain.y1, params.coarse_n, params.coarse_n);
  Grid2D fine(params.domain.x0, params.domain.x1, params.domain.y0,
              params.domain.y1, params.fine_n, params.fine_n);

  std::vector<double> betas(params.coarse_samples);
  for (int i = 0; i < params.coarse_samples; ++i)
    betas[i] = beta_lo + (beta_hi - beta_lo) * i / (params.coarse_samples - 1);

  std::vector<std::future<detail::GateEval>> jobs;
  jobs.reserve(betas.size());
  for (double b : betas)
    jobs.push_back(std::async(std::launch::async, [&, b] {
      return detail::gate_eval(net, b, anchor_label, pair, coarse,
                               params.solver);
    }));

  std::vector<detail::GateEval> evals;
  evals.reserve(betas.size());
  for (auto& j : jobs) evals.push_back(j.get());

  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!evals[i].participants_exist) {
      scan.warnings.push_back(
          "participant disappeared at beta=" + std::to_string(betas[i]) +
          "; range truncated");
      betas.resize(i);
      evals.resize(i);
      break;
    }
    scan.betas.push_back(betas[i]);
    scan.reports.push_back(evals[i].report);
  }

  // first adjacent pair with a sign change in the height difference
  std::optional<std::size_t> change;
  for (std::size_t i = 0; i + 1 < evals.size(); ++i) {
    if (!evals[i].diff || !evals[i + 1].diff) continue;
    if (*evals[i].diff == 0.0) {
      scan.crossing = betas[i];
      scan.bracket = {betas[i], betas[i]};
      return scan;
    }
    if (*evals[i].diff * *evals[i + 1].diff < 0.0) {
      change = i;
      break;
    }
  }
  if (!change) return scan;

  double lo = betas[*change], hi = betas[*change + 1];
  double sign_lo = *evals[*change].diff;
  while (hi - lo > params.tol_beta) {
    double mid = 0.5 * (lo + hi);
    auto ev = detail::gate_eval(net, mid, anchor_label, pair, fine,
                                params.solver);
    if (!ev.diff) {
      scan.warnings.push_back("indeterminate evaluation at beta=" +
                              std::to_string(mid) + "; bisection stopped");
      break;
    }
    if (*ev.diff * sign_lo > 0.0) {
      lo = mid;
      sign_lo = *ev.diff;
    } else {
      hi = mid;
    }
  }
  scan.crossing = 0.5 * (lo + hi);
  scan.bracket = {lo, hi};
  return scan;
}

/// Low-noise asymptotic mean escape time, log-equivalence order only.
inline double escape_time_estimate(double gate_height, double sigma) {
  if (!(sigma > 0)) throw std::invalid_argument("escape_time_estimate: sigma");
  return std::exp(gate_height / (sigma * sigma));
}

}  // namespace qpt
