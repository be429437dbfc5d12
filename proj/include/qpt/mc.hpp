#pragma once

// Ensemble simulation of the coupled SDE with the stochastic Heun scheme,
// threshold event detection with hysteresis, and escape statistics.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "model.hpp"

namespace qpt {

struct SimConfig {
  NetworkDrift network = NetworkDrift::two_node(ModelParams{});
  double dt = 1e-3;
  double xi = 0.55;       // escape threshold, x_S < xi <= x_A
  double xi_prime = 0.0;  // return threshold, x_Q <= xi' < x_S
  int n_realisations = 2000;
  double t_max = 1e5;
  std::uint64_t master_seed = 0;

  void validate() const {
    if (!network.frozen().empty())
      throw std::invalid_argument("SimConfig: frozen nodes not allowed");
    auto s = node_states(network.params().nu);
    if (!(s.x_s < xi && xi <= s.x_a))
      throw std::invalid_argument("SimConfig: xi outside (x_S, x_A]");
    if (!(s.x_q <= xi_prime && xi_prime < s.x_s))
      throw std::invalid_argument("SimConfig: xi' outside [x_Q, x_S)");
    if (!(xi_prime < xi)) throw std::invalid_argument("SimConfig: xi' >= xi");
    if (!(dt > 0)) throw std::invalid_argument("SimConfig: dt <= 0");
    if (n_realisations < 1)
      throw std::invalid_argument("SimConfig: n_realisations < 1");
    if (!(t_max > 0)) throw std::invalid_argument("SimConfig: t_max <= 0");
  }
};

struct EscapeRecord {
  std::vector<std::pair<double, int>> events;  // (time, signed 1-based node)
  std::vector<double> first_escape_times;      // NaN if the node never escaped
  double completion_time = std::numeric_limits<double>::quiet_NaN();
  bool completed = false;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream: every draw is a pure function of
// (master_seed, realisation, node, counter), so ensembles parallelize
// deterministically.
inline std::uint64_t stream_bits(std::uint64_t seed, std::uint64_t k,
                                 std::uint64_t node, std::uint64_t counter) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ k);
  h = splitmix64(h ^ node);
  h = splitmix64(h ^ counter);
  return h;
}

inline double normal_draw(std::uint64_t seed, std::uint64_t k,
                          std::uint64_t node, std::uint64_t step) {
  std::uint64_t b1 = stream_bits(seed, k, node, 2 * step);
  std::uint64_t b2 = stream_bits(seed, k, node, 2 * step + 1);
  double u1 = (static_cast<double>(b1 >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  double u2 = static_cast<double>(b2 >> 11) * 0x1.0p-53;          // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace detail

/// One stochastic Heun step: predictor with Euler-Maruyama, corrector with
/// the averaged drift, the same noise increment in both stages.
inline StateVector heun_step(const StateVector& x, const NetworkDrift& net,
                             double dt, const StateVector& noise) {
  if (!(dt > 0)) throw std::invalid_argument("heun_step: dt <= 0");
  const double alpha = net.params().alpha;
  const double sq = std::sqrt(dt);
  StateVector f = net.drift(x);
  StateVector xp(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    xp[i] = x[i] + f[i] * dt + alpha * sq * noise[i];
  StateVector fp = net.drift(xp);
  StateVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x[i] + 0.5 * (f[i] + fp[i]) * dt + alpha * sq * noise[i];
  return out;
}

/// Per-node two-state crossing automaton with hysteresis band [xi', xi].
/// Upward xi crossing emits +node, subsequent downward xi' crossing emits
/// -node; completion when all nodes are simultaneously in the above state.
class EventDetector {
 public:
  EventDetector(std::size_t n, double xi, double xi_prime)
      : xi_(xi), xip_(xi_prime), above_(n, false) {
    record_.first_escape_times.assign(
        n, std::numeric_limits<double>::quiet_NaN());
  }

  void init(const StateVector& x) {
    for (std::size_t i = 0; i < above_.size(); ++i) above_[i] = x[i] >= xi_;
  }

  // Feed the post-step state; returns true once completed.
  bool step(double t, const StateVector& x) {
    for (std::size_t i = 0; i < above_.size(); ++i) {
      if (!above_[i] && x[i] >= xi_) {
        above_[i] = true;
        record_.events.emplace_back(t, static_cast<int>(i) + 1);
        if (std::isnan(record_.first_escape_times[i]))
          record_.first_escape_times[i] = t;
      } else if (above_[i] && x[i] <= xip_) {
        above_[i] = false;
        record_.events.emplace_back(t, -(static_cast<int>(i) + 1));
      }
    }
    if (!record_.completed &&
        std::all_of(above_.begin(), above_.end(), [](bool b) { return b; })) {
      record_.completed = true;
      record_.completion_time = t;
    }
    return record_.completed;
  }

  const EscapeRecord& record() const { return record_; }

 private:
  double xi_, xip_;
  std::vector<bool> above_;
  EscapeRecord record_;
};

/// Run the automaton over a precomputed trajectory (times paired with
/// states); mainly for tests, the ensemble driver streams states directly.
inline EscapeRecord detect_events(
    const std::vector<std::pair<double, StateVector>>& trajectory, double xi,
    double xi_prime) {
  if (trajectory.empty()) throw std::invalid_argument("detect_events: empty");
  EventDetector det(trajectory.front().second.size(), xi, xi_prime);
  det.init(trajectory.front().second);
  for (std::size_t i = 1; i < trajectory.size(); ++i)
    if (det.step(trajectory[i].first, trajectory[i].second)) break;
  return det.record();
}

namespace detail {

inline EscapeRecord run_one(const SimConfig& cfg, const StateVector& initial,
                            std::uint64_t k) {
  const std::size_t n = cfg.network.dim();
  EventDetector det(n, cfg.xi, cfg.xi_prime);
  det.init(initial);
  StateVector x = initial;
  StateVector noise(n);
  const std::uint64_t n_steps =
      static_cast<std::uint64_t>(std::ceil(cfg.t_max / cfg.dt));
  for (std::uint64_t step = 0; step < n_steps; ++step) {
    for (std::size_t i = 0; i < n; ++i)
      noise[i] = normal_draw(cfg.master_seed, k, i, step);
    x = heun_step(x, cfg.network, cfg.dt, noise);
    if (det.step((step + 1) * cfg.dt, x)) break;
  }
  return det.record();
}

}  // namespace detail

/// n_realisations independent records; realisation k depends only on
/// (master_seed, k), so results are identical for any thread count.
inline std::vector<EscapeRecord> run_ensemble(const SimConfig& cfg,
                                              const StateVector& initial,
                                              int jobs = 0) {
  cfg.validate();
  if (initial.size() != cfg.network.dim())
    throw std::invalid_argument("run_ensemble: initial state dimension");
  std::vector<EscapeRecord> records(cfg.n_realisations);
  if (jobs <= 0)
    jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, cfg.n_realisations));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next.fetch_add(1); k < cfg.n_realisations;
         k = next.fetch_add(1))
      records[k] = detail::run_one(cfg, initial,
                                   static_cast<std::uint64_t>(k));
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs - 1);
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return records;
}

struct StatsSummary {
  // category means over completed realisations; absent when no realisation
  // qualifies
  std::optional<double> first_star;   // first escape event
  std::optional<double> first;        // last departure from all-quiescent
  std::optional<double> second_star;  // completion minus last departure
  std::optional<double> second;       // completion minus first escape
  double return_percentage = 0.0;     // over all realisations, in percent
  std::vector<double> p_first_escape;  // per node, among completed
  std::vector<double> p_final_direction;
  std::map<std::vector<int>, double> sequence_histogram;
  int n_completed = 0;
  int n_incomplete = 0;
};

namespace detail {

// Cancel each return against its preceding escape of the same node,
// yielding the final order of escape.
inline std::vector<int> cancel_returns(const std::vector<int>& seq) {
  std::vector<int> out;
  for (int e : seq) {
    if (e > 0) {
      out.push_back(e);
    } else {
      for (std::size_t i = out.size(); i-- > 0;) {
        if (out[i] == -e) {
          out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace detail

inline StatsSummary summarize(const std::vector<EscapeRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  StatsSummary s;
  std::size_t n_nodes = records.front().first_escape_times.size();
  s.p_first_escape.assign(n_nodes, 0.0);
  s.p_final_direction.assign(n_nodes, 0.0);

  double sum_fs = 0, sum_f = 0, sum_ss = 0, sum_s = 0;
  int n_returns = 0;
  for (const auto& r : records) {
    if (std::any_of(r.events.begin(), r.events.end(),
                    [](const auto& e) { return e.second < 0; }))
      ++n_returns;
    if (!r.completed) {
      ++s.n_incomplete;
      continue;
    }
    ++s.n_completed;

    // last escape that departed from the all-quiescent automaton state
    std::vector<bool> above(n_nodes, false);
    double first_escape = r.events.front().first;
    double last_departure = first_escape;
    for (const auto& [t, id] : r.events) {
      std::size_t node = static_cast<std::size_t>(std::abs(id)) - 1;
      if (id > 0) {
        if (std::none_of(above.begin(), above.end(),
                         [](bool b) { return b; }))
          last_departure = t;
        above[node] = true;
      } else {
        above[node] = false;
      }
    }
    sum_fs += first_escape;
    sum_f += last_departure;
    sum_ss += r.completion_time - last_departure;
    sum_s += r.completion_time - first_escape;

    std::vector<int> seq;
    seq.reserve(r.events.size());
    for (const auto& [t, id] : r.events) seq.push_back(id);
    s.sequence_histogram[seq] += 1.0;
    s.p_first_escape[static_cast<std::size_t>(seq.front()) - 1] += 1.0;
    auto final_order = detail::cancel_returns(seq);
    if (!final_order.empty())
      s.p_final_direction[static_cast<std::size_t>(final_order.front()) - 1] +=
          1.0;
  }

  s.return_percentage = 100.0 * n_returns / static_cast<double>(records.size());
  if (s.n_completed > 0) {
    double inv = 1.0 / s.n_completed;
    s.first_star = sum_fs * inv;
    s.first = sum_f * inv;
    s.second_star = sum_ss * inv;
    s.second = sum_s * inv;
    for (auto& p : s.p_first_escape) p *= inv;
    for (auto& p : s.p_final_direction) p *= inv;
    for (auto& [seq, cnt] : s.sequence_histogram) cnt *= inv;
  }
  return s;
}

}  // namespace qpt
