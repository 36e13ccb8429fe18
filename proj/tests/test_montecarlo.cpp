#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "byzsprt/montecarlo.hpp"
#include "byzsprt/oracle.hpp"

using namespace byzsprt;
using Catch::Approx;

namespace {

constexpr double kLn4 = 1.3862943611198906;

HypothesisModel bernoulli_model() {
  return HypothesisModel(FiniteAlphabet{{0.0, 1.0}, {0.8, 0.2}, {0.2, 0.8}});
}

AttackSpec flip_attack(int c) {
  AttackSpec spec;
  spec.type = AttackType::kFlip;
  spec.placement.c = c;
  return spec;
}

TrialOutcome outcome(Verdict v, std::int64_t t, double logw = 0.0, bool tie = false) {
  return {v, t, logw, tie};
}

}  // namespace

TEST_CASE("log-sum accumulator sums positive terms in log space") {
  LogSumAccumulator acc;
  acc.add(std::log(1.0));
  acc.add(std::log(2.0));
  acc.add(std::log(3.0));
  REQUIRE(acc.entries() == 3);
  REQUIRE(acc.log_sum() == Approx(std::log(6.0)).margin(1e-12));

  acc.add(-std::numeric_limits<double>::infinity());
  REQUIRE(acc.entries() == 3);  // -inf carries no mass

  LogSumAccumulator empty;
  REQUIRE(empty.log_sum() == -std::numeric_limits<double>::infinity());
  REQUIRE(empty.entries() == 0);

  // extreme spread must not overflow or vanish
  LogSumAccumulator wide;
  wide.add(700.0);
  wide.add(-700.0);
  REQUIRE(wide.log_sum() == Approx(log_add_exp(700.0, -700.0)).margin(1e-12));

  // merging two halves agrees with the sequential sum
  LogSumAccumulator a, b, all;
  const std::vector<double> logs{-3.0, 0.5, -1.2, 2.2, -0.7, 1.1};
  for (std::size_t i = 0; i < logs.size(); ++i) {
    (i < 3 ? a : b).add(logs[i]);
    all.add(logs[i]);
  }
  a.merge(b);
  REQUIRE(a.entries() == all.entries());
  REQUIRE(a.log_sum() == Approx(all.log_sum()).margin(1e-12));

  LogSumAccumulator into;
  into.merge(all);  // merge into empty
  REQUIRE(into.log_sum() == Approx(all.log_sum()).margin(1e-15));
  all.merge(LogSumAccumulator{});  // merge empty into full
  REQUIRE(all.entries() == logs.size());
}

TEST_CASE("side aggregates tally verdicts and merge cleanly") {
  SideAggregate agg;
  agg.absorb(outcome(Verdict::kAccept0, 4), 0);
  agg.absorb(outcome(Verdict::kAccept1, 6), 0);   // wrong under theta = 0
  agg.absorb(outcome(Verdict::kTruncated, 50), 0);
  agg.absorb(outcome(Verdict::kAccept0, 2, 0.0, true), 0);
  REQUIRE(agg.n == 4);
  REQUIRE(agg.accept0 == 2);
  REQUIRE(agg.accept1 == 1);
  REQUIRE(agg.truncated == 1);
  REQUIRE(agg.ties == 1);
  REQUIRE(agg.wrong_count(0) == 1);
  REQUIRE(agg.wrong_count(1) == 2);
  REQUIRE(agg.t_decided.count() == 3);  // truncated trials carry no stopping time
  REQUIRE(agg.t_decided.mean() == Approx(4.0).margin(1e-12));
  REQUIRE(agg.w_err.entries() == 1);

  SideAggregate other;
  other.absorb(outcome(Verdict::kAccept1, 8), 0);
  agg.merge(other);
  REQUIRE(agg.n == 5);
  REQUIRE(agg.wrong_count(0) == 2);
  REQUIRE(agg.w_err.entries() == 2);
}

TEST_CASE("error rates keep sub-normal probabilities in log space") {
  SideAggregate agg;
  for (int i = 0; i < 8; ++i) agg.absorb(outcome(Verdict::kAccept0, 3), 0);
  agg.absorb(outcome(Verdict::kAccept1, 3, -800.0), 0);
  agg.absorb(outcome(Verdict::kAccept1, 3, -800.0), 0);
  auto e = detail::make_error_rate(agg, 0, true);
  REQUIRE(e.events == 2);
  REQUIRE(e.log_value == Approx(-800.0 + std::log(0.2)).margin(1e-12));
  REQUIRE(e.value() == 0.0);  // underflows as a plain double, by design
  REQUIRE(e.log_se ==
          Approx(0.5 * (-1600.0 + std::log(0.2) + std::log(0.8) - std::log(10.0)))
              .margin(1e-9));
  REQUIRE(e.ess == Approx(2.0).margin(1e-9));
  REQUIRE(e.low_ess);  // 2 effective events is far below 30

  // unweighted: the log-space formulas reduce to the binomial ones
  SideAggregate plain;
  for (int i = 0; i < 8; ++i) plain.absorb(outcome(Verdict::kAccept0, 3), 0);
  plain.absorb(outcome(Verdict::kAccept1, 3), 0);
  plain.absorb(outcome(Verdict::kAccept1, 3), 0);
  auto p = detail::make_error_rate(plain, 0, false);
  REQUIRE(p.value() == Approx(0.2).margin(1e-14));
  REQUIRE(p.se() == Approx(std::sqrt(0.2 * 0.8 / 10.0)).margin(1e-12));
  REQUIRE(!p.low_ess);

  SideAggregate none;
  none.absorb(outcome(Verdict::kAccept0, 3), 0);
  auto z = detail::make_error_rate(none, 0, false);
  REQUIRE(z.events == 0);
  REQUIRE(z.log_value == -std::numeric_limits<double>::infinity());
  REQUIRE(z.value() == 0.0);
}

TEST_CASE("experiment validation") {
  PanelExperiment exp{bernoulli_model(), VotingRule{2}, flip_attack(1), 3, 100};
  REQUIRE_NOTHROW(validate_experiment(exp));
  exp.attack.placement.c = 2;  // s = 3 <= 2c = 4
  REQUIRE_THROWS_AS(validate_experiment(exp), ConfigError);
  exp.attack.placement.c = 1;
  exp.s = 0;
  REQUIRE_THROWS_AS(validate_experiment(exp), ConfigError);
  exp.s = 3;
  exp.max_horizon = 0;
  REQUIRE_THROWS_AS(validate_experiment(exp), ConfigError);
  exp.max_horizon = 100;
  exp.rule = VotingRule{1};  // 2r = 2 is not > 3
  REQUIRE_THROWS_AS(validate_experiment(exp), ConfigError);

  PanelExperiment ok{bernoulli_model(), VotingRule{2}, flip_attack(1), 3, 100};
  EstimationOptions opt;
  opt.trials = 0;
  REQUIRE_THROWS_AS(estimate_operating_point(ok, {1.0, 1.0}, opt), ConfigError);
  opt.trials = 10;
  opt.estimator = Estimator::kImportance;
  opt.weighted_trials = 0;
  REQUIRE_THROWS_AS(estimate_operating_point(ok, {1.0, 1.0}, opt), ConfigError);
}

TEST_CASE("plain estimates match the exact voting point") {
  auto model = bernoulli_model();
  const Thresholds thr{3.0 * kLn4, 3.0 * kLn4};
  const int H = 60;
  auto exact0 = oracle::exact_voting_point(model, 3, 1, VotingRule{2}, thr, 0, {.horizon = H});
  auto exact1 = oracle::exact_voting_point(model, 3, 1, VotingRule{2}, thr, 1, {.horizon = H});

  PanelExperiment exp{bernoulli_model(), VotingRule{2}, flip_attack(1), 3, H};
  EstimationOptions opt;
  opt.trials = 300000;
  opt.seed = 20240917;
  auto op = estimate_operating_point(exp, thr, opt);

  REQUIRE(op.side0.error.events > 0);
  REQUIRE(std::abs(op.alpha() - exact0.p_accept1) < 4.0 * op.alpha_se());
  REQUIRE(std::abs(op.beta() - exact1.p_accept0) < 4.0 * op.beta_se());
  REQUIRE(std::abs(op.asn0() - exact0.e_t_decided) < 4.0 * op.side0.asn_se);
  REQUIRE(std::abs(op.asn1() - exact1.e_t_decided) < 4.0 * op.side1.asn_se);
  // residuals are tiny here, so truncation should be rare to absent
  REQUIRE(op.trunc_rate() < 1e-3);
}

TEST_CASE("importance estimates match the exact voting point") {
  auto model = bernoulli_model();
  const Thresholds thr{3.0 * kLn4, 3.0 * kLn4};
  const int H = 60;
  auto exact0 = oracle::exact_voting_point(model, 3, 1, VotingRule{2}, thr, 0, {.horizon = H});

  PanelExperiment exp{bernoulli_model(), VotingRule{2}, flip_attack(1), 3, H};
  EstimationOptions opt;
  opt.trials = 50000;
  opt.weighted_trials = 100000;
  opt.estimator = Estimator::kImportance;
  opt.seed = 424242;
  auto op = estimate_operating_point(exp, thr, opt);

  REQUIRE(op.side0.weighted_n == 100000);
  REQUIRE(op.side0.error.events > 100);
  REQUIRE(!op.side0.error.low_ess);
  REQUIRE(std::abs(op.alpha() - exact0.p_accept1) < 5.0 * op.alpha_se());
  // the weighted estimate must agree with the plain one too
  REQUIRE(std::abs(op.alpha() - op.side0.plain_error.value()) <
          5.0 * std::sqrt(std::pow(op.alpha_se(), 2) +
                          std::pow(op.side0.plain_error.se(), 2)));
}

TEST_CASE("importance sampling works without any attack") {
  // single honest sensor, unanimous vote: the tilt drives the lone sensor
  HypothesisModel model(GaussianPair{});
  PanelExperiment exp{HypothesisModel(GaussianPair{}), VotingRule{1}, AttackSpec{}, 1, 100000};
  const Thresholds thr{2.5, 2.5};
  EstimationOptions plain_opt;
  plain_opt.trials = 300000;
  plain_opt.seed = 7;
  auto plain = estimate_operating_point(exp, thr, plain_opt);

  EstimationOptions is_opt;
  is_opt.trials = 20000;
  is_opt.weighted_trials = 30000;
  is_opt.estimator = Estimator::kImportance;
  is_opt.seed = 8;
  auto is = estimate_operating_point(exp, thr, is_opt);

  REQUIRE(is.side0.error.events > 1000);
  const double tol =
      5.0 * std::sqrt(std::pow(plain.alpha_se(), 2) + std::pow(is.alpha_se(), 2));
  REQUIRE(std::abs(is.alpha() - plain.alpha()) < tol);
  const double tol1 =
      5.0 * std::sqrt(std::pow(plain.beta_se(), 2) + std::pow(is.beta_se(), 2));
  REQUIRE(std::abs(is.beta() - plain.beta()) < tol1);
}

TEST_CASE("walk tilt roots match the closed forms") {
  // s = 10, c = 2 flip on the full-sum statistic: root of
  // 16 lambda (lambda - 1) + 4 lambda (lambda + 1) = 0 at lambda = 0.6
  PanelExperiment exp{HypothesisModel(GaussianPair{}), SumRule{}, flip_attack(2), 10, 1000};
  auto plan = detail::build_walk_plan(exp, nullptr, 0, true);
  REQUIRE(plan.m_set == 10);
  REQUIRE(plan.by_overlap.size() == 3);
  REQUIRE(plan.by_overlap[2].has_value());
  REQUIRE(plan.by_overlap[2]->lambda == Approx(0.6).margin(1e-9));
  // full-sum statistic: every compromised sensor is inside, overlap is c
  REQUIRE((!plan.by_overlap[0].has_value() || plan.by_overlap[0]->lambda != 0.0));

  // suppression with a unit-LLR delivered point: 4 lambda(lambda-1) + lambda = 0
  AttackSpec sup;
  sup.type = AttackType::kSuppression;
  sup.placement.c = 1;
  sup.magnitude = 0.5;  // delivered LLR is 2 * 0.5 = 1
  PanelExperiment exp2{HypothesisModel(GaussianPair{}), SumRule{}, sup, 3, 1000};
  auto plan2 = detail::build_walk_plan(exp2, nullptr, 0, true);
  REQUIRE(plan2.by_overlap[1].has_value());
  REQUIRE(plan2.by_overlap[1]->lambda == Approx(0.75).margin(1e-9));
}

TEST_CASE("tilting fails loudly when the attack reverses the drift") {
  // suppression at magnitude 3 delivers LLR 6 per compromised sensor; with
  // two honest sensors the summed drift under theta = 0 is -4 + 6 > 0
  AttackSpec sup;
  sup.type = AttackType::kSuppression;
  sup.placement.c = 1;
  sup.magnitude = 3.0;
  PanelExperiment exp{HypothesisModel(GaussianPair{}), SumRule{}, sup, 3, 1000};
  REQUIRE_THROWS_AS(detail::build_walk_plan(exp, nullptr, 0, true), EstimationError);
}

TEST_CASE("walk and panel simulators agree on the sum rule") {
  const Thresholds thr{4.0, 4.0};
  PanelExperiment exp{HypothesisModel(GaussianPair{}), SumRule{}, flip_attack(1), 3, 10000};
  EstimationOptions opt;
  opt.trials = 200000;
  opt.seed = 99;
  auto panel = estimate_operating_point(exp, thr, opt);
  auto walk = detail::summarize_side(simulate_sum_walk_plain(exp, thr, 0, opt), 0);

  const double tol_err = 5.0 * std::sqrt(std::pow(panel.alpha_se(), 2) +
                                         std::pow(walk.plain_error.se(), 2));
  REQUIRE(std::abs(panel.alpha() - walk.plain_error.value()) < tol_err);
  const double tol_asn =
      5.0 * std::sqrt(std::pow(panel.side0.asn_se, 2) + std::pow(walk.asn_se, 2));
  REQUIRE(std::abs(panel.asn0() - walk.asn) < tol_asn);
}

TEST_CASE("weighted walk agrees with the plain walk") {
  AttackSpec sup;
  sup.type = AttackType::kSuppression;
  sup.placement.c = 1;
  sup.magnitude = 0.5;
  PanelExperiment exp{HypothesisModel(GaussianPair{}), SumRule{}, sup, 3, 10000};
  const Thresholds thr{3.0, 3.0};

  EstimationOptions opt;
  opt.trials = 200000;
  opt.weighted_trials = 50000;
  opt.estimator = Estimator::kImportance;
  opt.seed = 1234;
  auto op = estimate_operating_point(exp, thr, opt);

  REQUIRE(op.side0.weighted_n == 50000);
  REQUIRE(op.side0.error.events > 1000);
  const double tol = 5.0 * std::sqrt(std::pow(op.alpha_se(), 2) +
                                     std::pow(op.side0.plain_error.se(), 2));
  REQUIRE(std::abs(op.alpha() - op.side0.plain_error.value()) < tol);
}

TEST_CASE("results are identical for any thread count") {
  PanelExperiment exp{bernoulli_model(), VotingRule{2}, flip_attack(1), 3, 60};
  const Thresholds thr{2.0 * kLn4, 2.0 * kLn4};
  EstimationOptions one;
  one.trials = 20000;
  one.weighted_trials = 20000;
  one.estimator = Estimator::kImportance;
  one.seed = 5;
  one.threads = 1;
  EstimationOptions four = one;
  four.threads = 4;

  auto a = estimate_operating_point(exp, thr, one);
  auto b = estimate_operating_point(exp, thr, four);
  REQUIRE(a.side0.error.log_value == b.side0.error.log_value);
  REQUIRE(a.side0.error.log_se == b.side0.error.log_se);
  REQUIRE(a.side1.error.log_value == b.side1.error.log_value);
  REQUIRE(a.asn0() == b.asn0());
  REQUIRE(a.asn1() == b.asn1());
  REQUIRE(a.side0.decided == b.side0.decided);
  REQUIRE(a.side0.ties == b.side0.ties);
}

TEST_CASE("gamma assembly and its failure modes") {
  InfoConstants info;
  info.i0 = info.i1 = info.i = 2.0;

  OperatingPoint op;
  op.thresholds = {7.0, 7.0};
  op.side0.asn = 5.0;
  op.side0.asn_se = 0.05;
  op.side1.asn = 4.0;
  op.side1.asn_se = 0.04;
  op.side0.error.events = 25;
  op.side0.error.log_value = -10.0;
  op.side0.error.log_se = -12.0;

  auto g = gamma_from(op, info);
  REQUIRE(g.threshold == 7.0);
  REQUIRE(g.delay == 5.0);
  REQUIRE(g.gamma == Approx(10.0 / 5.0).margin(1e-12));
  REQUIRE(g.normalized == Approx(g.gamma / 2.0).margin(1e-15));
  // delta method: se(log 1/alpha) = exp(log_se - log_value)
  const double se_log = std::exp(-12.0 + 10.0);
  const double expect = std::sqrt(se_log * se_log + g.gamma * g.gamma * 0.05 * 0.05) / 5.0;
  REQUIRE(g.gamma_se == Approx(expect).margin(1e-12));

  OperatingPoint empty = op;
  empty.side0.error = ErrorRate{};
  REQUIRE_THROWS_AS(gamma_from(empty, info), EstimationError);
  REQUIRE(!try_gamma_from(empty, info).has_value());
  REQUIRE(try_gamma_from(op, info).has_value());

  OperatingPoint undecided = op;
  undecided.side0.asn = 0.0;
  undecided.side1.asn = 0.0;
  REQUIRE_THROWS_AS(gamma_from(undecided, info), EstimationError);
  REQUIRE(!try_gamma_from(undecided, info).has_value());
}

TEST_CASE("gamma curve rises with the threshold toward the honest slope") {
  PanelExperiment exp{HypothesisModel(GaussianPair{}), VotingRule{1}, AttackSpec{}, 1, 100000};
  EstimationOptions opt;
  opt.trials = 20000;
  opt.weighted_trials = 20000;
  opt.estimator = Estimator::kImportance;
  opt.seed = 31;
  auto curve = estimate_gamma_curve(exp, {5.0, 9.0}, opt);
  REQUIRE(curve.size() == 2);
  REQUIRE(curve[0].threshold == 5.0);
  REQUIRE(curve[1].threshold == 9.0);
  REQUIRE(curve[0].normalized > 0.5);
  REQUIRE(curve[1].normalized < 1.1);
  REQUIRE(curve[1].normalized > curve[0].normalized);
  REQUIRE(curve[1].gamma_se > 0.0);

  REQUIRE_THROWS_AS(estimate_gamma_curve(exp, {}, opt), ConfigError);
}

TEST_CASE("wald identity holds for simulated likelihood ratios") {
  HypothesisModel g(GaussianPair{});
  auto b = bernoulli_model();
  for (const auto* m : {&g, &b}) {
    RandomStream rng({321, 9, 1, 0, 0, 1});
    RunningStat st;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
      st.add(std::exp(-m->log_likelihood_ratio(m->sample(1, rng))));
    REQUIRE(std::abs(st.mean() - 1.0) < 4.0 * st.stderror());
  }
}
