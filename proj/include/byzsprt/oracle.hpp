#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "byzsprt/common.hpp"
#include "byzsprt/detection.hpp"
#include "byzsprt/models.hpp"

namespace byzsprt {

/// Exact finite-alphabet engine. Walk sums live on an integer lattice with
/// quantum 2^-40 nats, so equality of reachable sums is exact; a barrier
/// counts as crossed within 1e-9 nats (matching the simulator's floating
/// sums, whose error over any sane horizon is far below that).
namespace oracle {

constexpr double kQuantum = 0x1p-40;
constexpr double kBarrierTol = 1e-9;

struct Limits {
  std::int64_t max_states = 4'000'000;   // lattice states per step, all classes
  double max_combine_cost = 4e9;          // H * s * 8 * (r+1)^4 guard
};

/// First-crossing flows of one sensor's latched walk, truncated at `horizon`.
/// Index k runs 1..horizon; index 0 is unused and zero.
///   flow_nl[k]: neither latched before, low latch set at k   (tau- = k < tau+)
///   flow_nh[k]: neither latched before, high latch set at k  (tau+ = k < tau-)
///   flow_lb[k]: low already latched, high latch set at k     (tau+ = k > tau-)
///   flow_hb[k]: high already latched, low latch set at k     (tau- = k > tau+)
/// A single step cannot set both latches (the open interval (-a, b) has
/// positive width), so the four flows partition all first crossings.
struct CrossingDistribution {
  std::int64_t horizon = 0;
  std::vector<double> flow_nl, flow_nh, flow_lb, flow_hb;
  std::vector<double> n_stock;  // P[neither latched after step k], k = 0..horizon
  double end_mass_n = 0, end_mass_l = 0, end_mass_h = 0, end_mass_b = 0;
  double mass_defect = 0;  // |1 - total accounted mass| after the run

  double p_tau_low(std::int64_t k) const { return flow_nl[k] + flow_hb[k]; }
  double p_tau_high(std::int64_t k) const { return flow_nh[k] + flow_lb[k]; }

  /// P[low barrier is reached strictly before the high one].
  double p_low_before_high() const {
    double t = 0;
    for (std::int64_t k = 1; k <= horizon; ++k) t += flow_nl[k];
    return t;
  }
  double p_high_before_low() const {
    double t = 0;
    for (std::int64_t k = 1; k <= horizon; ++k) t += flow_nh[k];
    return t;
  }
};

namespace detail {

struct Lattice {
  std::vector<std::int64_t> inc;  // per alphabet point, in quanta
  std::vector<double> mass;       // law the walk evolves under
  std::int64_t lo_key = 0, hi_key = 0;
};

inline Lattice build_lattice(const HypothesisModel& model, int law_theta,
                             const Thresholds& thr, std::int64_t horizon) {
  if (model.support() != Support::kFiniteAlphabet)
    throw ConfigError("exact engine: model must have a finite alphabet");
  if (thr.a < 1e-6 || thr.b < 1e-6)
    throw ConfigError("exact engine: thresholds must be at least 1e-6");
  Lattice lat;
  const auto& llr = model.llr_table();
  const auto& alpha = model.alphabet();
  lat.mass = law_theta == 0 ? alpha.mass0 : alpha.mass1;
  std::int64_t max_abs = 0;
  for (double l : llr) {
    const std::int64_t d = std::llround(l / kQuantum);
    lat.inc.push_back(d);
    max_abs = std::max<std::int64_t>(max_abs, std::llabs(d));
  }
  if (max_abs > 0 && horizon > (std::int64_t{1} << 62) / max_abs)
    throw CapacityError("exact engine: horizon times step size overflows the lattice");
  lat.lo_key = std::llround((-thr.a + kBarrierTol) / kQuantum);
  lat.hi_key = std::llround((thr.b - kBarrierTol) / kQuantum);
  if (!(lat.lo_key < 0 && lat.hi_key > 0))
    throw ConfigError("exact engine: barrier keys must straddle zero");
  return lat;
}

inline double map_total(const std::map<std::int64_t, double>& m) {
  double t = 0;
  for (const auto& [k, v] : m) t += v;
  return t;
}

}  // namespace detail

/// Exact latched-crossing flows for one sensor whose delivered observations
/// are i.i.d. from `law_theta` of the model. The walk keeps evolving after
/// its first latch so the second crossing time is tracked too.
inline CrossingDistribution single_sensor_crossing(const HypothesisModel& model, int law_theta,
                                                   const Thresholds& thr, std::int64_t horizon,
                                                   const Limits& limits = {}) {
  if (horizon < 1) throw ConfigError("exact engine: horizon must be at least 1");
  const auto lat = detail::build_lattice(model, law_theta, thr, horizon);

  CrossingDistribution out;
  out.horizon = horizon;
  const auto h1 = static_cast<std::size_t>(horizon) + 1;
  out.flow_nl.assign(h1, 0.0);
  out.flow_nh.assign(h1, 0.0);
  out.flow_lb.assign(h1, 0.0);
  out.flow_hb.assign(h1, 0.0);
  out.n_stock.assign(h1, 0.0);
  out.n_stock[0] = 1.0;

  // class maps keyed by lattice sum: N neither latched, L low only, H high
  // only; both-latched walkers need no further tracking
  std::map<std::int64_t, double> n_map, l_map, h_map;
  n_map[0] = 1.0;
  double b_mass = 0.0;

  const std::size_t m = lat.inc.size();
  for (std::int64_t k = 1; k <= horizon; ++k) {
    std::map<std::int64_t, double> next_n, next_l, next_h;
    for (const auto& [key, mass] : n_map) {
      for (std::size_t j = 0; j < m; ++j) {
        if (lat.mass[j] == 0.0) continue;
        const std::int64_t nk = key + lat.inc[j];
        const double p = mass * lat.mass[j];
        if (nk <= lat.lo_key) {
          out.flow_nl[static_cast<std::size_t>(k)] += p;
          next_l[nk] += p;
        } else if (nk >= lat.hi_key) {
          out.flow_nh[static_cast<std::size_t>(k)] += p;
          next_h[nk] += p;
        } else {
          next_n[nk] += p;
        }
      }
    }
    for (const auto& [key, mass] : l_map) {
      for (std::size_t j = 0; j < m; ++j) {
        if (lat.mass[j] == 0.0) continue;
        const std::int64_t nk = key + lat.inc[j];
        const double p = mass * lat.mass[j];
        if (nk >= lat.hi_key) {
          out.flow_lb[static_cast<std::size_t>(k)] += p;
          b_mass += p;
        } else {
          next_l[nk] += p;
        }
      }
    }
    for (const auto& [key, mass] : h_map) {
      for (std::size_t j = 0; j < m; ++j) {
        if (lat.mass[j] == 0.0) continue;
        const std::int64_t nk = key + lat.inc[j];
        const double p = mass * lat.mass[j];
        if (nk <= lat.lo_key) {
          out.flow_hb[static_cast<std::size_t>(k)] += p;
          b_mass += p;
        } else {
          next_h[nk] += p;
        }
      }
    }
    n_map.swap(next_n);
    l_map.swap(next_l);
    h_map.swap(next_h);
    out.n_stock[static_cast<std::size_t>(k)] = detail::map_total(n_map);

    const auto states = static_cast<std::int64_t>(n_map.size() + l_map.size() + h_map.size());
    if (states > limits.max_states)
      throw CapacityError("exact engine: lattice state count exceeded the limit");
    if (states == 0) break;  // everything absorbed; remaining flows are zero
  }

  out.end_mass_n = detail::map_total(n_map);
  out.end_mass_l = detail::map_total(l_map);
  out.end_mass_h = detail::map_total(h_map);
  out.end_mass_b = b_mass;
  out.mass_defect =
      std::abs(1.0 - (out.end_mass_n + out.end_mass_l + out.end_mass_h + out.end_mass_b));
  return out;
}

/// Exact operating characteristics of the voting rule at one hypothesis,
/// truncated at the horizon. Ties (both order statistics arriving at the
/// same step) contribute half their mass to each verdict, matching the fair
/// coin in the simulator.
struct ExactVotingPoint {
  double p_accept0 = 0;   // includes half of the tie mass
  double p_accept1 = 0;   // includes the other half
  double p_tie = 0;
  double p_decided = 0;
  double residual = 0;    // mass still undecided at the horizon
  double e_t_decided = 0; // E[T | decided by horizon]
  std::int64_t horizon = 0;
};

struct OracleOptions {
  std::int64_t horizon = 256;
  bool auto_widen = false;      // double the horizon until residual <= bound
  double residual_bound = 1e-9;
  int max_widenings = 6;
  Limits limits;
};

namespace detail {

/// Joint law of one sensor's latch pair relative to decision step T, as the
/// eight possible (tau- vs T, tau+ vs T) classes. Sums to one.
inline std::array<double, 8> latch_cells(const CrossingDistribution& d,
                                         const std::vector<double>& cnl,
                                         const std::vector<double>& cnh,
                                         const std::vector<double>& clb,
                                         const std::vector<double>& chb, std::int64_t t) {
  const auto i = static_cast<std::size_t>(t);
  std::array<double, 8> cell{};
  cell[0] = clb[i - 1] + chb[i - 1];                  // tau- <= T-1, tau+ <= T-1
  cell[1] = d.flow_lb[i];                             // tau- <= T-1, tau+ = T
  cell[2] = cnl[i - 1] - clb[i - 1] - d.flow_lb[i];   // tau- <= T-1, tau+ > T
  cell[3] = d.flow_hb[i];                             // tau- = T, tau+ <= T-1
  cell[4] = d.flow_nl[i];                             // tau- = T, tau+ > T
  cell[5] = cnh[i - 1] - chb[i - 1] - d.flow_hb[i];   // tau- > T, tau+ <= T-1
  cell[6] = d.flow_nh[i];                             // tau- > T, tau+ = T
  cell[7] = d.n_stock[i];                             // tau- > T, tau+ > T
  for (double& p : cell) {
    if (p < 0) {
      if (p < -1e-9) throw EstimationError("exact engine: negative cell mass");
      p = 0;
    }
  }
  return cell;
}

// per-cell counter increments: {low_prev, low_now, high_prev, high_now}
constexpr std::array<std::array<int, 4>, 8> kCellCounts = {{
    {1, 1, 1, 1},  // both prev
    {1, 1, 0, 1},  // low prev, high now
    {1, 1, 0, 0},  // low prev only
    {0, 1, 1, 1},  // low now, high prev
    {0, 1, 0, 0},  // low now only
    {0, 0, 1, 1},  // high prev only
    {0, 0, 0, 1},  // high now only
    {0, 0, 0, 0},  // neither
}};

inline std::vector<double> prefix(const std::vector<double>& flow) {
  std::vector<double> c(flow.size(), 0.0);
  for (std::size_t i = 1; i < flow.size(); ++i) c[i] = c[i - 1] + flow[i];
  return c;
}

}  // namespace detail

/// Exact voting-rule error and stopping characteristics for s sensors of
/// which c deliver flipped-law observations (the flip adversary; c = 0 is
/// the honest system). theta picks the true hypothesis the honest sensors
/// observe. Exponential in nothing: per decision step it convolves the s
/// independent latch-cell laws over saturating counters.
inline ExactVotingPoint exact_voting_point(const HypothesisModel& model, int s, int c,
                                           const VotingRule& rule, const Thresholds& thr,
                                           int theta, const OracleOptions& opts = {}) {
  if (c < 0 || c >= s) throw ConfigError("exact engine: need 0 <= c < s");
  validate_rule(DetectorRule{rule}, s);
  const int r = rule.r;

  for (int attempt = 0;; ++attempt) {
    const std::int64_t horizon = opts.horizon << attempt;
    const double cost = static_cast<double>(horizon) * s * 8.0 * std::pow(r + 1.0, 4.0);
    if (cost > opts.limits.max_combine_cost)
      throw CapacityError("exact engine: voting combination too large");

    const auto honest = single_sensor_crossing(model, theta, thr, horizon, opts.limits);
    CrossingDistribution flipped;
    if (c > 0) flipped = single_sensor_crossing(model, 1 - theta, thr, horizon, opts.limits);

    const auto cnl_h = detail::prefix(honest.flow_nl), cnh_h = detail::prefix(honest.flow_nh),
               clb_h = detail::prefix(honest.flow_lb), chb_h = detail::prefix(honest.flow_hb);
    std::vector<double> cnl_f, cnh_f, clb_f, chb_f;
    if (c > 0) {
      cnl_f = detail::prefix(flipped.flow_nl);
      cnh_f = detail::prefix(flipped.flow_nh);
      clb_f = detail::prefix(flipped.flow_lb);
      chb_f = detail::prefix(flipped.flow_hb);
    }

    ExactVotingPoint out;
    out.horizon = horizon;
    double et_acc = 0.0;

    const int dim = r + 1;  // counters saturate at r; index r means ">= r"
    const auto idx = [dim](int lp, int ln, int hp, int hn) {
      return ((static_cast<std::size_t>(lp) * dim + ln) * dim + hp) * dim + hn;
    };
    std::vector<double> dp(static_cast<std::size_t>(dim) * dim * dim * dim);
    std::vector<double> ndp(dp.size());

    for (std::int64_t t = 1; t <= horizon; ++t) {
      const auto cell_h = detail::latch_cells(honest, cnl_h, cnh_h, clb_h, chb_h, t);
      std::array<double, 8> cell_f{};
      if (c > 0) cell_f = detail::latch_cells(flipped, cnl_f, cnh_f, clb_f, chb_f, t);

      std::fill(dp.begin(), dp.end(), 0.0);
      dp[0] = 1.0;
      for (int sensor = 0; sensor < s; ++sensor) {
        const auto& cell = sensor < s - c ? cell_h : cell_f;
        std::fill(ndp.begin(), ndp.end(), 0.0);
        for (int lp = 0; lp < dim; ++lp)
          for (int ln = lp; ln < dim; ++ln)
            for (int hp = 0; hp < dim; ++hp)
              for (int hn = hp; hn < dim; ++hn) {
                const double mass = dp[idx(lp, ln, hp, hn)];
                if (mass == 0.0) continue;
                for (int e = 0; e < 8; ++e) {
                  if (cell[static_cast<std::size_t>(e)] == 0.0) continue;
                  const auto& inc = detail::kCellCounts[static_cast<std::size_t>(e)];
                  ndp[idx(std::min(lp + inc[0], r), std::min(ln + inc[1], r),
                          std::min(hp + inc[2], r), std::min(hn + inc[3], r))] +=
                      mass * cell[static_cast<std::size_t>(e)];
                }
              }
        dp.swap(ndp);
      }

      // decision events at t in the unstopped latch process: the r-th order
      // statistic of one side arrives now while the other side has not
      // gathered r latches yet (tie: both arrive now)
      double p0 = 0, p1 = 0, tie = 0;
      for (int lp = 0; lp < dim; ++lp)
        for (int ln = lp; ln < dim; ++ln)
          for (int hp = 0; hp < dim; ++hp)
            for (int hn = hp; hn < dim; ++hn) {
              const double mass = dp[idx(lp, ln, hp, hn)];
              if (mass == 0.0) continue;
              const bool new_low = ln == r && lp < r;
              const bool new_high = hn == r && hp < r;
              if (new_low && new_high) tie += mass;
              else if (new_low && hn < r) p0 += mass;
              else if (new_high && ln < r) p1 += mass;
            }
      out.p_accept0 += p0 + 0.5 * tie;
      out.p_accept1 += p1 + 0.5 * tie;
      out.p_tie += tie;
      et_acc += static_cast<double>(t) * (p0 + p1 + tie);
    }

    out.p_decided = out.p_accept0 + out.p_accept1;
    out.residual = 1.0 - out.p_decided;
    out.e_t_decided = out.p_decided > 0 ? et_acc / out.p_decided : 0.0;

    if (!opts.auto_widen || out.residual <= opts.residual_bound) return out;
    if (attempt >= opts.max_widenings)
      throw CapacityError("exact engine: residual mass stayed above the bound after widening");
  }
}

}  // namespace oracle
}  // namespace byzsprt
