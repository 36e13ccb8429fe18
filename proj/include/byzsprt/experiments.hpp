#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "byzsprt/config.hpp"
#include "byzsprt/montecarlo.hpp"
#include "byzsprt/oracle.hpp"

namespace byzsprt {

struct SweepResult {
  InfoConstants info;
  std::vector<GammaPoint> points;
};

inline SweepResult run_gamma_sweep(const Config& cfg) {
  const PanelExperiment exp = cfg.make_experiment();
  SweepResult res;
  res.info = exp.model.info();
  res.points = estimate_gamma_curve(exp, cfg.thresholds, cfg.make_options());
  return res;
}

struct OperatingPointResult {
  InfoConstants info;
  OperatingPoint op;
  std::optional<GammaPoint> point;  // absent when no false alarm was observed
};

inline OperatingPointResult run_operating_point(const Config& cfg) {
  const PanelExperiment exp = cfg.make_experiment();
  OperatingPointResult res;
  res.info = exp.model.info();
  res.op = estimate_operating_point(exp, Thresholds{cfg.a, cfg.b}, cfg.make_options());
  res.point = try_gamma_from(res.op, res.info);
  return res;
}

/// Three runs that bracket the equilibrium at one threshold: the quota
/// detector against its least-favorable attack, the same detector against a
/// cruder stress attack (should do no better for the adversary), and the
/// all-sensor sum rule against the least-favorable attack (should do no
/// better for the system).
struct SandwichResult {
  InfoConstants info;
  int c = 0;
  GammaPoint voting_flip, voting_suppression, sum_flip;
  // margins in normalized-gamma units, >= 0 when the ordering holds with
  // three combined standard errors of slack
  double suppression_margin = 0.0;
  double sum_margin = 0.0;
  bool suppression_ok = false;
  bool sum_ok = false;
};

inline SandwichResult run_sandwich(const Config& cfg) {
  const HypothesisModel model = cfg.make_model();
  SandwichResult res;
  res.info = model.info();
  res.c = cfg.sandwich_c;
  const Thresholds thr{cfg.sandwich_threshold, cfg.sandwich_threshold};
  const VotingRule star{cfg.s - cfg.sandwich_c};

  AttackSpec flip;
  flip.type = AttackType::kFlip;
  flip.placement.c = cfg.sandwich_c;
  AttackSpec supp;
  supp.type = AttackType::kSuppression;
  supp.placement.c = cfg.sandwich_c;
  supp.magnitude = cfg.sandwich_magnitude;

  const auto cell = [&](const DetectorRule& rule, const AttackSpec& attack, int point) {
    PanelExperiment exp{model, rule, attack, cfg.s, cfg.max_horizon};
    auto opt = cfg.make_options(point);
    return gamma_from(estimate_operating_point(exp, thr, opt), res.info);
  };
  res.voting_flip = cell(DetectorRule{star}, flip, 0);
  res.voting_suppression = cell(DetectorRule{star}, supp, 1);
  res.sum_flip = cell(DetectorRule{SumRule{}}, flip, 2);

  const auto combined = [](const GammaPoint& x, const GammaPoint& y) {
    return std::sqrt(x.normalized_se * x.normalized_se + y.normalized_se * y.normalized_se);
  };
  res.suppression_margin = res.voting_suppression.normalized - res.voting_flip.normalized +
                           3.0 * combined(res.voting_suppression, res.voting_flip);
  res.suppression_ok = res.suppression_margin >= 0.0;
  res.sum_margin = res.voting_flip.normalized - res.sum_flip.normalized +
                   3.0 * combined(res.voting_flip, res.sum_flip);
  res.sum_ok = res.sum_margin >= 0.0;
  return res;
}

/// Fixed quota r = s - c_bar ran against every actual compromise count in
/// c_list; each row also carries the guaranteed normalized exponent
/// s - c_bar - c for that row.
struct UnknownCResult {
  InfoConstants info;
  int c_bar = 0;
  struct Row {
    int c = 0;
    double bound = 0.0;  // guaranteed normalized exponent
    GammaPoint point;
  };
  std::vector<Row> rows;
};

inline UnknownCResult run_unknown_c(const Config& cfg) {
  const HypothesisModel model = cfg.make_model();
  UnknownCResult res;
  res.info = model.info();
  res.c_bar = cfg.c_bar;
  const VotingRule rule{cfg.s - cfg.c_bar};
  const Thresholds thr{cfg.unknown_c_threshold, cfg.unknown_c_threshold};

  for (std::size_t i = 0; i < cfg.c_list.size(); ++i) {
    const int c = cfg.c_list[i];
    AttackSpec attack;
    if (c > 0) {
      attack.type = AttackType::kFlip;
      attack.placement.c = c;
    }
    PanelExperiment exp{model, DetectorRule{rule}, attack, cfg.s, cfg.max_horizon};
    auto opt = cfg.make_options(static_cast<int>(i));
    UnknownCResult::Row row;
    row.c = c;
    row.bound = static_cast<double>(cfg.s - cfg.c_bar - c);
    row.point = gamma_from(estimate_operating_point(exp, thr, opt), res.info);
    res.rows.push_back(std::move(row));
  }
  return res;
}

/// Simulator-versus-exact-engine comparison on a finite-alphabet setup: the
/// same voting detector and flip adversary evaluated by Monte Carlo and by
/// the lattice recursion, both truncated at the same horizon.
struct ValidateResult {
  InfoConstants info;
  oracle::ExactVotingPoint exact0, exact1;  // theta = 0 and theta = 1
  OperatingPoint mc;
  // |simulated - exact| in units of the simulated standard error
  double z_alpha = 0.0, z_beta = 0.0, z_asn0 = 0.0, z_asn1 = 0.0;
};

inline ValidateResult run_validate(const Config& cfg) {
  Config local = cfg;
  local.max_horizon = cfg.validate_horizon;
  const PanelExperiment exp = local.make_experiment();

  ValidateResult res;
  res.info = exp.model.info();
  const Thresholds thr{cfg.a, cfg.b};
  oracle::OracleOptions opts;
  opts.horizon = cfg.validate_horizon;

  const int c = cfg.attack.c();
  res.exact0 = oracle::exact_voting_point(exp.model, cfg.s, c, VotingRule{cfg.r}, thr, 0, opts);
  res.exact1 = oracle::exact_voting_point(exp.model, cfg.s, c, VotingRule{cfg.r}, thr, 1, opts);
  res.mc = estimate_operating_point(exp, thr, local.make_options());

  const auto z = [](double mc_value, double exact_value, double se) {
    if (!(se > 0.0)) return mc_value == exact_value ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(mc_value - exact_value) / se;
  };
  res.z_alpha = z(res.mc.alpha(), res.exact0.p_accept1, res.mc.alpha_se());
  res.z_beta = z(res.mc.beta(), res.exact1.p_accept0, res.mc.beta_se());
  res.z_asn0 = z(res.mc.asn0(), res.exact0.e_t_decided, res.mc.side0.asn_se);
  res.z_asn1 = z(res.mc.asn1(), res.exact1.e_t_decided, res.mc.side1.asn_se);
  return res;
}

}  // namespace byzsprt
