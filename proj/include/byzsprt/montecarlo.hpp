#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "byzsprt/adversary.hpp"
#include "byzsprt/common.hpp"
#include "byzsprt/detection.hpp"
#include "byzsprt/models.hpp"
#include "byzsprt/numeric.hpp"
#include "byzsprt/parallel.hpp"
#include "byzsprt/random.hpp"

namespace byzsprt {

enum class Estimator { kPlain, kImportance };

inline const char* to_string(Estimator e) {
  return e == Estimator::kPlain ? "plain" : "importance";
}

/// Stream purposes: every run kind draws from its own key family, so adding
/// or reordering runs never perturbs another run's randomness.
namespace purpose {
constexpr std::uint64_t kPanelPlain = 1;
constexpr std::uint64_t kPanelTilted = 2;
constexpr std::uint64_t kWalkPlain = 3;
constexpr std::uint64_t kWalkTilted = 4;
}  // namespace purpose

/// One complete system description: hypothesis pair, detector, adversary.
struct PanelExperiment {
  HypothesisModel model;
  DetectorRule rule;
  AttackSpec attack;
  int s = 1;
  std::int64_t max_horizon = 1'000'000;
};

inline void validate_experiment(const PanelExperiment& exp) {
  if (exp.s < 1) throw ConfigError("experiment: need at least one sensor");
  if (exp.max_horizon < 1) throw ConfigError("experiment: max_horizon must be at least 1");
  validate_rule(exp.rule, exp.s);
  const int c = exp.attack.c();
  if (c > 0) {
    exp.attack.placement.validate(exp.s);
    if (exp.attack.type == AttackType::kFlip && exp.s <= 2 * c)
      throw ConfigError("flip attack needs s > 2c");
  }
}

/// Log-space sum of positive terms given by their logs. Partials merged in a
/// fixed order reproduce bit-identically for any thread count.
class LogSumAccumulator {
 public:
  void add(double log_x) {
    if (log_x == -std::numeric_limits<double>::infinity()) return;
    ++entries_;
    if (log_x > max_) {
      sum_ = sum_ * std::exp(max_ - log_x) + 1.0;
      max_ = log_x;
    } else {
      sum_ += std::exp(log_x - max_);
    }
  }

  void merge(const LogSumAccumulator& o) {
    entries_ += o.entries_;
    if (o.sum_ == 0.0) return;
    if (sum_ == 0.0) {
      max_ = o.max_;
      sum_ = o.sum_;
      return;
    }
    if (o.max_ > max_) {
      sum_ = sum_ * std::exp(max_ - o.max_) + o.sum_;
      max_ = o.max_;
    } else {
      sum_ += o.sum_ * std::exp(o.max_ - max_);
    }
  }

  double log_sum() const {
    return sum_ > 0.0 ? max_ + std::log(sum_) : -std::numeric_limits<double>::infinity();
  }
  std::uint64_t entries() const { return entries_; }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  std::uint64_t entries_ = 0;
};

/// Raw tallies of one simulated run at a fixed hypothesis.
struct SideAggregate {
  std::uint64_t n = 0, accept0 = 0, accept1 = 0, truncated = 0, ties = 0;
  RunningStat t_decided;
  LogSumAccumulator w_err, w2_err;  // weights of wrong-verdict trials

  void absorb(const TrialOutcome& out, int theta) {
    ++n;
    if (out.verdict == Verdict::kTruncated) {
      ++truncated;
      return;
    }
    if (out.verdict == Verdict::kAccept0) ++accept0;
    else ++accept1;
    if (out.tie) ++ties;
    t_decided.add(static_cast<double>(out.time));
    const bool wrong =
        (theta == 0 && out.verdict == Verdict::kAccept1) ||
        (theta == 1 && out.verdict == Verdict::kAccept0);
    if (wrong) {
      w_err.add(out.log_weight);
      w2_err.add(2.0 * out.log_weight);
    }
  }

  void merge(const SideAggregate& o) {
    n += o.n;
    accept0 += o.accept0;
    accept1 += o.accept1;
    truncated += o.truncated;
    ties += o.ties;
    t_decided.merge(o.t_decided);
    w_err.merge(o.w_err);
    w2_err.merge(o.w2_err);
  }

  std::uint64_t wrong_count(int theta) const { return theta == 0 ? accept1 : accept0; }
};

/// An error-probability estimate kept in log space so values far below the
/// smallest normal double survive. The estimate is unconditional but
/// horizon-censored: P[wrong verdict and T <= max_horizon].
struct ErrorRate {
  std::uint64_t events = 0;
  double log_value = -std::numeric_limits<double>::infinity();
  double log_se = -std::numeric_limits<double>::infinity();
  double ess = 0.0;      // effective sample size of the weighted events
  bool low_ess = false;  // weighted estimate with ess < 30: treat with suspicion

  double value() const { return std::exp(log_value); }
  double se() const { return std::exp(log_se); }
};

namespace detail {

inline ErrorRate make_error_rate(const SideAggregate& agg, int theta, bool weighted) {
  ErrorRate e;
  e.events = agg.wrong_count(theta);
  if (e.events == 0 || agg.n == 0) return e;
  const double log_n = std::log(static_cast<double>(agg.n));
  e.log_value = agg.w_err.log_sum() - log_n;
  const double log_m2 = agg.w2_err.log_sum() - log_n;  // log E[w^2 1{wrong}]
  const double d = 2.0 * e.log_value - log_m2;         // <= 0 up to rounding
  if (d < -1e-15) {
    const double log_var = log_m2 + std::log1p(-std::exp(d));
    e.log_se = 0.5 * (log_var - log_n);
  }
  e.ess = std::exp(2.0 * agg.w_err.log_sum() - agg.w2_err.log_sum());
  e.low_ess = weighted && e.ess < 30.0;
  return e;
}

}  // namespace detail

/// Everything measured at one hypothesis. Stopping-time statistics come
/// from the plain run and are conditional on deciding; the operative error
/// estimate comes from the weighted run when one was made.
struct SideSummary {
  std::uint64_t plain_n = 0, decided = 0, truncated = 0, ties = 0;
  double asn = 0.0, asn_se = 0.0;
  double trunc_rate = 0.0;  // worst truncated fraction over the runs backing this side
  ErrorRate plain_error;
  ErrorRate error;
  std::uint64_t weighted_n = 0;  // 0 when the plain estimate is operative
};

struct OperatingPoint {
  Thresholds thresholds;
  Estimator estimator = Estimator::kPlain;
  SideSummary side0, side1;  // theta = 0 and theta = 1

  double alpha() const { return side0.error.value(); }
  double alpha_se() const { return side0.error.se(); }
  double beta() const { return side1.error.value(); }
  double beta_se() const { return side1.error.se(); }
  double asn0() const { return side0.asn; }
  double asn1() const { return side1.asn; }
  double trunc_rate() const { return std::max(side0.trunc_rate, side1.trunc_rate); }
};

struct EstimationOptions {
  std::uint64_t trials = 10'000;           // plain trials per hypothesis
  std::uint64_t weighted_trials = 10'000;  // importance-sampled trials per hypothesis
  Estimator estimator = Estimator::kPlain;
  int threads = 1;
  std::uint64_t seed = 1;
  int point_index = 0;  // position in a threshold sweep; separates streams
};

namespace detail {

/// How many honest sensors the error-direction tilt must push so that the
/// wrong side can gather r latches: the attack's sensors cross on their own
/// whenever it drifts them wrongward, the tilt covers the rest.
inline int voting_tilt_count(const PanelExperiment& exp, const AttackStrategy* attack,
                             int theta, int r) {
  int free = 0;
  const int c = exp.attack.c();
  if (attack && c > 0 && attack->wrongward_drift(theta, exp.model) > 1e-12) free = c;
  return std::clamp(r - free, 0, exp.s - c);
}

inline SideAggregate simulate_panel(const PanelExperiment& exp, const Thresholds& thr, int theta,
                                    std::uint64_t trials, std::uint64_t run_purpose,
                                    const EstimationOptions& opt, const AttackStrategy* attack,
                                    int tilt_count) {
  TrialSetup setup;
  setup.model = &exp.model;
  setup.rule = &exp.rule;
  setup.attack = exp.attack.c() > 0 ? attack : nullptr;
  setup.placement = exp.attack.placement;
  setup.s = exp.s;
  setup.thresholds = thr;
  setup.max_horizon = exp.max_horizon;
  setup.tilt_count = tilt_count;

  std::vector<SideAggregate> parts(chunk_count(trials));
  try {
    run_chunked(trials, opt.threads, [&](std::uint64_t ci, std::uint64_t b, std::uint64_t e) {
      TrialWorkspace ws(exp.s);
      SideAggregate agg;
      StreamKey key{opt.seed, run_purpose, static_cast<std::uint64_t>(theta),
                    static_cast<std::uint64_t>(opt.point_index), 0, 0};
      for (std::uint64_t t = b; t < e; ++t) {
        key.trial = t;
        agg.absorb(run_trial(setup, theta, key, ws), theta);
      }
      parts[ci] = agg;
    });
  } catch (const ModelError& err) {
    throw EstimationError(std::string("model failure during estimation: ") + err.what());
  }
  SideAggregate total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

/// Per-composition laws of the summed-statistic walk under a given theta.
/// `comp_*` describe one compromised sensor inside the statistic: either a
/// random law (flip delivers the opposite hypothesis) or a constant LLR
/// shift (suppression delivers a fixed observation).
struct WalkComposition {
  int n_honest = 0;
  int n_comp = 0;
  double comp_const = 0.0;  // deterministic per-sensor increment, if constant
  bool comp_random = false;

  double lambda = 0.0;  // conjugate tilt making the weighted walk exact
  HypothesisModel::TiltedLaw honest_law, comp_law;
};

struct WalkPlan {
  std::vector<int> in_set;                          // sensor -> statistic membership
  int m_set = 0;                                    // |M|
  std::vector<std::optional<WalkComposition>> by_overlap;  // index: compromised in M
};

inline double walk_cumulant(const PanelExperiment& exp, int theta, int n_honest, int n_comp,
                            bool comp_random, double comp_const, double lambda) {
  double v = static_cast<double>(n_honest) * exp.model.log_mgf(theta, lambda);
  if (n_comp > 0) {
    if (comp_random)
      v += static_cast<double>(n_comp) * exp.model.log_mgf(1 - theta, lambda);
    else
      v += static_cast<double>(n_comp) * lambda * comp_const;
  }
  return v;
}

inline WalkPlan build_walk_plan(const PanelExperiment& exp, const AttackStrategy* attack,
                                int theta, bool tilted) {
  const auto& rule = std::get<SumRule>(exp.rule);
  WalkPlan plan;
  plan.in_set.assign(static_cast<std::size_t>(exp.s), rule.sensors.empty() ? 1 : 0);
  if (!rule.sensors.empty())
    for (int i : rule.sensors) plan.in_set[static_cast<std::size_t>(i)] = 1;
  plan.m_set = 0;
  for (int v : plan.in_set) plan.m_set += v;
  if (plan.m_set == 0) throw ConfigError("sum rule: empty sensor set");

  const int c = exp.attack.c();
  const bool comp_random = exp.attack.type == AttackType::kFlip;
  double comp_const = 0.0;
  if (exp.attack.type == AttackType::kSuppression) {
    const double delivered =
        exp.model.extreme_observation(theta == 0 ? +1 : -1, exp.attack.magnitude);
    comp_const = exp.model.log_likelihood_ratio(delivered);
  }

  const int outside = exp.s - plan.m_set;
  const int mc_lo = std::max(0, c - outside);
  const int mc_hi = std::min(c, plan.m_set);
  plan.by_overlap.resize(static_cast<std::size_t>(mc_hi) + 1);

  const auto [i0, i1] = exp.model.kl_divergences();
  for (int mc = mc_lo; mc <= mc_hi; ++mc) {
    WalkComposition comp;
    comp.n_honest = plan.m_set - mc;
    comp.n_comp = mc;
    comp.comp_random = comp_random;
    comp.comp_const = comp_const;

    if (tilted) {
      // drift of the summed increment under the true theta; the tilt is the
      // nonzero root of the cumulant, which exists only when the walk
      // drifts toward the correct barrier
      double drift = static_cast<double>(comp.n_honest) * (theta == 0 ? -i0 : i1);
      if (mc > 0) {
        if (comp_random) drift += static_cast<double>(mc) * (theta == 0 ? i1 : -i0);
        else drift += static_cast<double>(mc) * comp_const;
      }
      const double sign = theta == 0 ? 1.0 : -1.0;  // root lies on this side
      if (sign * drift >= 0.0)
        throw EstimationError(
            "sum walk: drift is not toward the correct barrier; "
            "the weighted estimator does not apply");
      const auto cumulant = [&](double u) {
        return walk_cumulant(exp, theta, comp.n_honest, comp.n_comp, comp_random, comp_const,
                             sign * u);
      };
      double hi = 1.0;
      int guard = 0;
      while (cumulant(hi) <= 0.0) {
        hi *= 2.0;
        if (++guard > 60)
          throw EstimationError("sum walk: the wrong barrier is unreachable under this law");
      }
      double root;
      try {
        root = bisect_root(cumulant, 1e-12, hi, 1e-13);
      } catch (const ModelError& err) {
        throw EstimationError(std::string("sum walk: tilt root search failed: ") + err.what());
      }
      comp.lambda = sign * root;
      comp.honest_law = exp.model.tilted_law(theta, comp.lambda);
      if (comp_random) comp.comp_law = exp.model.tilted_law(1 - theta, comp.lambda);
    }
    plan.by_overlap[static_cast<std::size_t>(mc)] = comp;
  }
  (void)attack;
  return plan;
}

/// Direct simulation of the summed statistic: no panel, one walk per trial.
/// The tilted variant draws every component from its conjugate law at the
/// composition's cumulant root, so the weight is exp(-lambda * S_T) exactly.
inline SideAggregate simulate_walk(const PanelExperiment& exp, const Thresholds& thr, int theta,
                                   std::uint64_t trials, std::uint64_t run_purpose,
                                   const EstimationOptions& opt, const AttackStrategy* attack,
                                   bool tilted) {
  const WalkPlan plan = build_walk_plan(exp, attack, theta, tilted);
  const int c = exp.attack.c();

  std::vector<SideAggregate> parts(chunk_count(trials));
  try {
    run_chunked(trials, opt.threads, [&](std::uint64_t ci, std::uint64_t b, std::uint64_t e) {
      SideAggregate agg;
      StreamKey key{opt.seed, run_purpose, static_cast<std::uint64_t>(theta),
                    static_cast<std::uint64_t>(opt.point_index), 0, 0};
      for (std::uint64_t t = b; t < e; ++t) {
        key.trial = t;
        int mc = 0;
        if (c > 0) {
          auto placement_rng = open_channel(key, StreamChannel::kPlacement);
          for (int i : exp.attack.placement.resolve(exp.s, placement_rng))
            mc += plan.in_set[static_cast<std::size_t>(i)];
        }
        const auto& comp = plan.by_overlap[static_cast<std::size_t>(mc)];
        if (!comp)
          throw EstimationError("sum walk: placement produced an unplanned composition");

        auto obs_rng = open_channel(key, StreamChannel::kObservation);
        double sum = 0.0;
        TrialOutcome out;
        out.verdict = Verdict::kTruncated;
        out.time = exp.max_horizon;
        for (std::int64_t k = 1; k <= exp.max_horizon; ++k) {
          if (tilted) {
            for (int i = 0; i < comp->n_honest; ++i)
              sum += exp.model.log_likelihood_ratio(comp->honest_law.sample(obs_rng));
            if (comp->comp_random)
              for (int i = 0; i < comp->n_comp; ++i)
                sum += exp.model.log_likelihood_ratio(comp->comp_law.sample(obs_rng));
            else
              sum += static_cast<double>(comp->n_comp) * comp->comp_const;
          } else {
            for (int i = 0; i < comp->n_honest; ++i)
              sum += exp.model.log_likelihood_ratio(exp.model.sample(theta, obs_rng));
            if (comp->comp_random)
              for (int i = 0; i < comp->n_comp; ++i)
                sum += exp.model.log_likelihood_ratio(exp.model.sample(1 - theta, obs_rng));
            else
              sum += static_cast<double>(comp->n_comp) * comp->comp_const;
          }
          if (sum <= -thr.a) {
            out = {Verdict::kAccept0, k, 0.0, false};
            break;
          }
          if (sum >= thr.b) {
            out = {Verdict::kAccept1, k, 0.0, false};
            break;
          }
        }
        if (tilted) out.log_weight = -comp->lambda * sum;
        agg.absorb(out, theta);
      }
      parts[ci] = agg;
    });
  } catch (const ModelError& err) {
    throw EstimationError(std::string("model failure during estimation: ") + err.what());
  }
  SideAggregate total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

inline SideSummary summarize_side(const SideAggregate& plain, int theta) {
  SideSummary side;
  side.plain_n = plain.n;
  side.decided = plain.accept0 + plain.accept1;
  side.truncated = plain.truncated;
  side.ties = plain.ties;
  side.asn = plain.t_decided.mean();
  side.asn_se = plain.t_decided.stderror();
  side.trunc_rate =
      plain.n > 0 ? static_cast<double>(plain.truncated) / static_cast<double>(plain.n) : 0.0;
  side.plain_error = make_error_rate(plain, theta, false);
  side.error = side.plain_error;
  return side;
}

}  // namespace detail

/// Estimates both error probabilities and stopping-time moments at one
/// threshold pair. The plain run always happens (it carries the stopping
/// times); the importance estimator adds a weighted run per hypothesis whose
/// error estimate replaces the plain one.
inline OperatingPoint estimate_operating_point(const PanelExperiment& exp, const Thresholds& thr,
                                               const EstimationOptions& opt) {
  validate_experiment(exp);
  thr.validate();
  if (opt.trials == 0) throw ConfigError("estimation: need at least one trial");
  if (opt.estimator == Estimator::kImportance && opt.weighted_trials == 0)
    throw ConfigError("estimation: need at least one weighted trial");

  const auto attack = make_attack(exp.attack);
  const bool sum_rule = std::holds_alternative<SumRule>(exp.rule);

  OperatingPoint op;
  op.thresholds = thr;
  op.estimator = opt.estimator;

  for (int theta = 0; theta <= 1; ++theta) {
    const auto plain = detail::simulate_panel(exp, thr, theta, opt.trials, purpose::kPanelPlain,
                                              opt, attack.get(), 0);
    SideSummary side = detail::summarize_side(plain, theta);

    if (opt.estimator == Estimator::kImportance) {
      SideAggregate weighted;
      if (sum_rule) {
        weighted = detail::simulate_walk(exp, thr, theta, opt.weighted_trials,
                                         purpose::kWalkTilted, opt, attack.get(), true);
      } else {
        const int r = std::get<VotingRule>(exp.rule).r;
        const int tilt = detail::voting_tilt_count(exp, attack.get(), theta, r);
        weighted = detail::simulate_panel(exp, thr, theta, opt.weighted_trials,
                                          purpose::kPanelTilted, opt, attack.get(), tilt);
      }
      side.error = detail::make_error_rate(weighted, theta, true);
      side.weighted_n = weighted.n;
      if (weighted.n > 0)
        side.trunc_rate = std::max(
            side.trunc_rate,
            static_cast<double>(weighted.truncated) / static_cast<double>(weighted.n));
    }
    (theta == 0 ? op.side0 : op.side1) = side;
  }
  return op;
}

/// Plain sum-statistic run exposed for cross-checking the walk sampler
/// against the panel simulator; same law, independent code path.
inline SideAggregate simulate_sum_walk_plain(const PanelExperiment& exp, const Thresholds& thr,
                                             int theta, const EstimationOptions& opt) {
  validate_experiment(exp);
  const auto attack = make_attack(exp.attack);
  return detail::simulate_walk(exp, thr, theta, opt.trials, purpose::kWalkPlain, opt,
                               attack.get(), false);
}

/// The error-exponent-per-delay ratio at one operating point:
///   gamma = log(1 / alpha) / max(ASN_0, ASN_1)
/// with a delta-method standard error; `normalized` divides by min(I0, I1),
/// the per-step information of one honest sensor.
struct GammaPoint {
  double threshold = 0.0;  // the accept-1 barrier b
  OperatingPoint op;
  double gamma = 0.0, gamma_se = 0.0;
  double normalized = 0.0, normalized_se = 0.0;
  double delay = 0.0;
};

/// Assembles a GammaPoint without the ratio when no false alarm was seen:
/// the operating point is still reportable, the exponent is not.
inline std::optional<GammaPoint> try_gamma_from(const OperatingPoint& op,
                                                const InfoConstants& info);

inline GammaPoint gamma_from(const OperatingPoint& op, const InfoConstants& info) {
  GammaPoint g;
  g.threshold = op.thresholds.b;
  g.op = op;
  const ErrorRate& err = op.side0.error;
  if (err.events == 0)
    throw EstimationError(
        "no false alarms observed; increase trials or use the importance estimator");
  const double delay = std::max(op.side0.asn, op.side1.asn);
  if (!(delay > 0.0)) throw EstimationError("no decided trials; the decision delay is undefined");
  g.delay = delay;
  g.gamma = std::max(0.0, -err.log_value) / delay;
  const double se_log = std::exp(err.log_se - err.log_value);  // se of log(1/alpha)
  const double asn_se = op.side0.asn >= op.side1.asn ? op.side0.asn_se : op.side1.asn_se;
  g.gamma_se = std::sqrt(se_log * se_log + g.gamma * g.gamma * asn_se * asn_se) / delay;
  g.normalized = g.gamma / info.i;
  g.normalized_se = g.gamma_se / info.i;
  return g;
}

inline std::optional<GammaPoint> try_gamma_from(const OperatingPoint& op,
                                                const InfoConstants& info) {
  if (op.side0.error.events == 0 || !(std::max(op.side0.asn, op.side1.asn) > 0.0))
    return std::nullopt;
  return gamma_from(op, info);
}

/// Sweeps symmetric thresholds a = b = t and reports one GammaPoint per t.
/// Each point draws from its own stream family, so inserting or removing
/// points never changes the others.
inline std::vector<GammaPoint> estimate_gamma_curve(const PanelExperiment& exp,
                                                    const std::vector<double>& thresholds,
                                                    EstimationOptions opt) {
  if (thresholds.empty()) throw ConfigError("sweep: need at least one threshold");
  const InfoConstants info = exp.model.info();
  std::vector<GammaPoint> out;
  out.reserve(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    opt.point_index = static_cast<int>(i);
    const Thresholds thr{thresholds[i], thresholds[i]};
    out.push_back(gamma_from(estimate_operating_point(exp, thr, opt), info));
  }
  return out;
}

}  // namespace byzsprt
