#pragma once

// Equilibria of planar drift fields: Newton search from a seed lattice,
// eigenvalue classification, natural-parameter continuation in beta, and
// detection of saddle-node and transcritical bifurcations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"
#include "grid.hpp"

namespace qpt {

enum class Stability { Sink, Saddle, Source, Nonhyperbolic };

inline const char* stability_name(Stability s) {
  switch (s) {
    case Stability::Sink: return "sink";
    case Stability::Saddle: return "saddle";
    case Stability::Source: return "source";
    default: return "nonhyperbolic";
  }
}

struct Equilibrium {
  Vec2 position{0.0, 0.0};
  std::array<std::complex<double>, 2> eigenvalues;
  Stability stability = Stability::Nonhyperbolic;
  std::string label;
};

struct Rect {
  double x0 = -0.6, x1 = 1.4, y0 = -0.6, y1 = 1.4;
  bool contains(const Vec2& p) const {
    return p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1;
  }
};

namespace detail {

constexpr double kRootTol = 1e-10;
constexpr double kHyperbolicTol = 1e-8;
constexpr double kMergeRadius = 1e-6;

inline std::array<std::complex<double>, 2> eig2(const std::array<double, 4>& j) {
  double tr = j[0] + j[3];
  double det = j[0] * j[3] - j[1] * j[2];
  double disc = tr * tr / 4.0 - det;
  if (disc >= 0.0) {
    double s = std::sqrt(disc);
    return {std::complex<double>(tr / 2.0 - s, 0.0),
            std::complex<double>(tr / 2.0 + s, 0.0)};
  }
  double s = std::sqrt(-disc);
  return {std::complex<double>(tr / 2.0, -s), std::complex<double>(tr / 2.0, s)};
}

/// Damped Newton for the planar drift; returns root on convergence.
inline std::optional<Vec2> newton2(const PlanarDrift& d, Vec2 x,
                                   int max_iter = 60, double tol = kRootTol) {
  for (int it = 0; it < max_iter; ++it) {
    double f1, f2;
    d.eval(x[0], x[1], f1, f2);
    if (std::abs(f1) + std::abs(f2) < tol) return x;
    auto j = d.jacobian(x[0], x[1]);
    double det = j[0] * j[3] - j[1] * j[2];
    if (std::abs(det) < 1e-14) return std::nullopt;
    double dx = (-f1 * j[3] + f2 * j[1]) / det;
    double dy = (f1 * j[2] - f2 * j[0]) / det;
    double step = std::sqrt(dx * dx + dy * dy);
    double damp = step > 0.5 ? 0.5 / step : 1.0;  // cap the step length
    x[0] += damp * dx;
    x[1] += damp * dy;
  }
  double f1, f2;
  d.eval(x[0], x[1], f1, f2);
  if (std::abs(f1) + std::abs(f2) < tol) return x;
  return std::nullopt;
}

}  // namespace detail

/// Nearest beta=0 product-state letter per component.
inline std::string label_from_position(const Vec2& p, double nu) {
  auto s = node_states(nu);
  auto letter = [&](double x) {
    double dq = std::abs(x - s.x_q), ds = std::abs(x - s.x_s),
           da = std::abs(x - s.x_a);
    if (dq <= ds && dq <= da) return 'Q';
    if (ds <= da) return 'S';
    return 'A';
  };
  return {letter(p[0]), letter(p[1])};
}

inline Equilibrium classify(const Vec2& pos, const NetworkDrift& net) {
  auto d = net.compile_planar();
  Equilibrium eq;
  eq.position = pos;
  eq.eigenvalues = detail::eig2(d.jacobian(pos[0], pos[1]));
  double r1 = eq.eigenvalues[0].real(), r2 = eq.eigenvalues[1].real();
  if (std::abs(r1) < detail::kHyperbolicTol || std::abs(r2) < detail::kHyperbolicTol)
    eq.stability = Stability::Nonhyperbolic;
  else if (r1 < 0 && r2 < 0)
    eq.stability = Stability::Sink;
  else if (r1 > 0 && r2 > 0)
    eq.stability = Stability::Source;
  else
    eq.stability = Stability::Saddle;
  eq.label = label_from_position(pos, net.params().nu);
  return eq;
}

/// Newton iteration over a seed lattice; converged roots inside the domain
/// deduplicated within the merge radius (max norm).
inline std::vector<Equilibrium> find_equilibria(const NetworkDrift& net,
                                                const Rect& domain = {},
                                                int seed_density = 41) {
  auto d = net.compile_planar();
  std::vector<Vec2> roots;
  for (int i = 0; i < seed_density; ++i)
    for (int j = 0; j < seed_density; ++j) {
      Vec2 seed{domain.x0 + (domain.x1 - domain.x0) * i / (seed_density - 1),
                domain.y0 + (domain.y1 - domain.y0) * j / (seed_density - 1)};
      auto r = detail::newton2(d, seed);
      if (!r || !domain.contains(*r)) continue;
      bool dup = false;
      for (const auto& q : roots)
        if (std::max(std::abs(q[0] - (*r)[0]), std::abs(q[1] - (*r)[1])) <
            detail::kMergeRadius) {
          dup = true;
          break;
        }
      if (!dup) roots.push_back(*r);
    }
  std::sort(roots.begin(), roots.end(), [](const Vec2& a, const Vec2& b) {
    return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
  });
  std::vector<Equilibrium> out;
  out.reserve(roots.size());
  for (const auto& r : roots) out.push_back(classify(r, net));
  return out;
}

enum class BranchEnd { None, Fold, DomainExit };

struct ContinuationBranch {
  std::string label;
  std::vector<double> betas;
  std::vector<Equilibrium> states;
  BranchEnd terminated_by = BranchEnd::None;
  double fold_beta = std::numeric_limits<double>::quiet_NaN();
  Vec2 fold_position{0.0, 0.0};
};

namespace detail {

// Newton-correct at the given beta from a predictor; reject solutions that
// jump away from the predictor (root switching near folds).
inline std::optional<Vec2> correct_at(const NetworkDrift& base, double beta,
                                      const Vec2& pred, double jump_tol) {
  auto d = base.with_beta(beta).compile_planar();
  auto r = newton2(d, pred);
  if (!r) return std::nullopt;
  if (std::hypot((*r)[0] - pred[0], (*r)[1] - pred[1]) > jump_tol)
    return std::nullopt;
  return r;
}

}  // namespace detail

/// Natural-parameter continuation from `start` (an equilibrium at beta_lo)
/// toward beta_hi, with adaptive step halving; on persistent Newton failure
/// with a near-zero eigenvalue the fold is refined by bisection.
inline ContinuationBranch continue_branch(const NetworkDrift& net,
                                          const Equilibrium& start,
                                          double beta_lo, double beta_hi,
                                          double step = 1e-3) {
  ContinuationBranch br;
  br.label = start.label;
  double beta = beta_lo;
  Equilibrium cur = classify(start.position, net.with_beta(beta_lo));
  cur.label = start.label;
  br.betas.push_back(beta);
  br.states.push_back(cur);

  const double step_min = 1e-9;
  const double jump_tol = 0.1;
  double dstep = step;
  while (beta < beta_hi - 1e-15) {
    double bt = std::min(beta + dstep, beta_hi);
    // secant predictor keeps the branch on its own root through crossings
    Vec2 pred = cur.position;
    if (br.states.size() >= 2) {
      double prev_db = br.betas.back() - br.betas[br.betas.size() - 2];
      if (prev_db > 0) {
        double scale = (bt - beta) / prev_db;
        const Vec2& prev = br.states[br.states.size() - 2].position;
        pred = {cur.position[0] + scale * (cur.position[0] - prev[0]),
                cur.position[1] + scale * (cur.position[1] - prev[1])};
      }
    }
    auto r = detail::correct_at(net, bt, pred, jump_tol);
    if (r) {
      beta = bt;
      cur = classify(*r, net.with_beta(beta));
      cur.label = br.label;
      br.betas.push_back(beta);
      br.states.push_back(cur);
      if (dstep < step) dstep = std::min(step, dstep * 2.0);
      continue;
    }
    dstep *= 0.5;
    if (dstep >= step_min) continue;

    // Step underflow: fold if the smallest eigenvalue is near zero.
    double min_re = std::min(std::abs(cur.eigenvalues[0].real()),
                             std::abs(cur.eigenvalues[1].real()));
    if (min_re < 0.05) {
      double lo = beta, hi = std::min(beta + step, beta_hi);
      Vec2 last = cur.position;
      while (hi - lo > 1e-8) {
        double mid = 0.5 * (lo + hi);
        auto rm = detail::correct_at(net, mid, last, jump_tol);
        if (rm) {
          lo = mid;
          last = *rm;
        } else {
          hi = mid;
        }
      }
      br.terminated_by = BranchEnd::Fold;
      br.fold_beta = 0.5 * (lo + hi);
      br.fold_position = last;
    } else {
      br.terminated_by = BranchEnd::DomainExit;
    }
    return br;
  }
  return br;
}

enum class BifurcationKind { SaddleNode, Transcritical };

struct BifurcationPoint {
  double beta = 0.0;
  BifurcationKind kind = BifurcationKind::SaddleNode;
  std::pair<std::string, std::string> participants;
  Vec2 position{0.0, 0.0};
};

struct BifurcationScanResult {
  std::vector<BifurcationPoint> points;
  std::vector<std::string> warnings;
};

namespace detail {

// Zero crossing of the Jacobian determinant along a branch (one real
// eigenvalue through zero), refined by bisection with Newton re-solves.
struct EigCrossing {
  double beta;
  Vec2 position;
  std::size_t branch;
};

inline double jac_det(const NetworkDrift& net, double beta, const Vec2& x) {
  auto j = net.with_beta(beta).compile_planar().jacobian(x[0], x[1]);
  return j[0] * j[3] - j[1] * j[2];
}

}  // namespace detail

/// Pair fold terminations into saddle-nodes and match eigenvalue-crossing
/// branch intersections into transcritical points.
inline BifurcationScanResult detect_bifurcations(
    const NetworkDrift& net, const std::vector<ContinuationBranch>& branches) {
  BifurcationScanResult result;
  constexpr double beta_pair_tol = 1e-3;
  constexpr double pos_pair_tol = 1e-2;

  // Transcritical: determinant sign change along a continuing branch, with
  // a second branch passing through the same point at the crossing.
  std::vector<detail::EigCrossing> crossings;
  for (std::size_t b = 0; b < branches.size(); ++b) {
    const auto& br = branches[b];
    for (std::size_t k = 1; k < br.states.size(); ++k) {
      double e0 = detail::jac_det(net, br.betas[k - 1], br.states[k - 1].position);
      double e1 = detail::jac_det(net, br.betas[k], br.states[k].position);
      if (e0 * e1 > 0.0) continue;
      // Newton re-correction is unreliable here (it can slide onto the
      // coinciding partner root), so locate the determinant zero by secant
      // interpolation along the stored branch instead.
      double lo = br.betas[k - 1], hi = br.betas[k];
      double t = (e1 == e0) ? 0.5 : e0 / (e0 - e1);
      double bstar = lo + t * (hi - lo);
      const Vec2& p0 = br.states[k - 1].position;
      const Vec2& p1 = br.states[k].position;
      Vec2 x{p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])};
      crossings.push_back({bstar, x, b});
    }
  }
  struct TcSwap {
    std::size_t a, b;
    double beta;
  };
  std::vector<TcSwap> swaps;
  std::vector<bool> cused(crossings.size(), false);
  for (std::size_t i = 0; i < crossings.size(); ++i) {
    if (cused[i]) continue;
    for (std::size_t j = i + 1; j < crossings.size(); ++j) {
      if (cused[j] || crossings[i].branch == crossings[j].branch) continue;
      if (std::abs(crossings[i].beta - crossings[j].beta) > beta_pair_tol) continue;
      double dist = std::hypot(crossings[i].position[0] - crossings[j].position[0],
                               crossings[i].position[1] - crossings[j].position[1]);
      if (dist > pos_pair_tol) continue;
      BifurcationPoint bp;
      bp.beta = 0.5 * (crossings[i].beta + crossings[j].beta);
      bp.kind = BifurcationKind::Transcritical;
      bp.participants = {branches[crossings[i].branch].label,
                         branches[crossings[j].branch].label};
      bp.position = crossings[i].position;
      result.points.push_back(bp);
      swaps.push_back({crossings[i].branch, crossings[j].branch, bp.beta});
      cused[i] = cused[j] = true;
      break;
    }
  }

  // Branches exchange identities at a transcritical point; events past it
  // are reported under the partner's label.
  auto effective_label = [&](std::size_t b, double beta) {
    std::string label = branches[b].label;
    for (const auto& sw : swaps) {
      if (beta <= sw.beta + beta_pair_tol) continue;
      if (sw.a == b) label = branches[sw.b].label;
      if (sw.b == b) label = branches[sw.a].label;
    }
    return label;
  };

  // Saddle-nodes: folds with matching beta and position.
  std::vector<bool> used(branches.size(), false);
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (branches[i].terminated_by != BranchEnd::Fold || used[i]) continue;
    bool paired = false;
    for (std::size_t j = i + 1; j < branches.size(); ++j) {
      if (branches[j].terminated_by != BranchEnd::Fold || used[j]) continue;
      if (std::abs(branches[i].fold_beta - branches[j].fold_beta) > beta_pair_tol)
        continue;
      double dist = std::hypot(
          branches[i].fold_position[0] - branches[j].fold_position[0],
          branches[i].fold_position[1] - branches[j].fold_position[1]);
      if (dist > pos_pair_tol) continue;
      BifurcationPoint bp;
      bp.beta = 0.5 * (branches[i].fold_beta + branches[j].fold_beta);
      bp.kind = BifurcationKind::SaddleNode;
      bp.participants = {effective_label(i, bp.beta), effective_label(j, bp.beta)};
      bp.position = branches[i].fold_position;
      result.points.push_back(bp);
      used[i] = used[j] = true;
      paired = true;
      break;
    }
    if (!paired) {
      result.warnings.push_back("unpaired fold on branch " + branches[i].label +
                                " at beta=" + std::to_string(branches[i].fold_beta));
      BifurcationPoint bp;
      bp.beta = branches[i].fold_beta;
      bp.kind = BifurcationKind::SaddleNode;
      bp.participants = {effective_label(i, bp.beta), "?"};
      bp.position = branches[i].fold_position;
      result.points.push_back(bp);
      used[i] = true;
    }
  }

  std::sort(result.points.begin(), result.points.end(),
            [](const BifurcationPoint& a, const BifurcationPoint& b) {
              return a.beta < b.beta;
            });
  return result;
}

/// Continue every beta=0 product equilibrium across [0, beta_hi].
inline std::vector<ContinuationBranch> continue_all_branches(
    const NetworkDrift& net, double beta_hi, double step = 1e-3) {
  auto base = net.with_beta(0.0);
  auto eqs = find_equilibria(base);
  std::vector<ContinuationBranch> branches;
  branches.reserve(eqs.size());
  for (const auto& eq : eqs)
    branches.push_back(continue_branch(net, eq, 0.0, beta_hi, step));
  return branches;
}

/// Track the beta=0 state with the given label to the requested beta.
/// Returns nullopt when the branch folds before reaching it.
inline std::optional<Equilibrium> locate_labeled(const NetworkDrift& net,
                                                 const std::string& label,
                                                 double beta,
                                                 double step = 1e-3) {
  auto s = node_states(net.params().nu);
  auto coord = [&](char c) {
    return c == 'Q' ? s.x_q : (c == 'S' ? s.x_s : s.x_a);
  };
  if (label.size() != 2) throw std::invalid_argument("locate_labeled: bad label");
  Equilibrium start;
  start.position = {coord(label[0]), coord(label[1])};
  start.label = label;
  auto br = continue_branch(net, start, 0.0, beta, step);
  if (br.betas.empty() || std::abs(br.betas.back() - beta) > 1e-12)
    return std::nullopt;
  return br.states.back();
}

/// Beta at which the labeled branch folds, if it does before beta_hi.
inline std::optional<double> fold_of_labeled(const NetworkDrift& net,
                                             const std::string& label,
                                             double beta_hi,
                                             double step = 1e-3) {
  auto s = node_states(net.params().nu);
  auto coord = [&](char c) {
    return c == 'Q' ? s.x_q : (c == 'S' ? s.x_s : s.x_a);
  };
  Equilibrium start;
  start.position = {coord(label[0]), coord(label[1])};
  start.label = label;
  auto br = continue_branch(net, start, 0.0, beta_hi, step);
  if (br.terminated_by == BranchEnd::Fold) return br.fold_beta;
  return std::nullopt;
}

}  // namespace qpt
