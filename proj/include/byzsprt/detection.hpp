#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "byzsprt/adversary.hpp"
#include "byzsprt/common.hpp"
#include "byzsprt/models.hpp"
#include "byzsprt/random.hpp"

namespace byzsprt {

/// Log-scale barriers, both strictly positive: accept hypothesis 0 at -a,
/// accept hypothesis 1 at +b.
struct Thresholds {
  double a = 1.0;
  double b = 1.0;

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
      throw ConfigError("thresholds: a and b must be positive and finite");
  }
};

enum class Verdict { kContinue, kAccept0, kAccept1, kTruncated };

struct Decision {
  Verdict verdict = Verdict::kContinue;
  std::int64_t time = 0;  // stopping step (1-based); meaningful unless kContinue
  bool tie = false;       // both sides qualified at the same step
};

/// Per-sensor cumulative LLRs with latched one-sided crossing times.
/// A crossing time records the first step at which S_i left [-a, b] on that
/// side and never resets, even though S_i keeps evolving. Both latches can
/// be set for the same sensor (first one side, later the other).
class SensorPanel {
 public:
  static constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

  explicit SensorPanel(int s)
      : sum_(static_cast<std::size_t>(s), 0.0),
        low_time_(static_cast<std::size_t>(s), kNever),
        high_time_(static_cast<std::size_t>(s), kNever),
        low_sum_(static_cast<std::size_t>(s), 0.0),
        high_sum_(static_cast<std::size_t>(s), 0.0) {
    if (s < 1) throw ConfigError("panel: need at least one sensor");
  }

  void reset() {
    now_ = 0;
    n_low_ = n_high_ = 0;
    std::fill(sum_.begin(), sum_.end(), 0.0);
    std::fill(low_time_.begin(), low_time_.end(), kNever);
    std::fill(high_time_.begin(), high_time_.end(), kNever);
    std::fill(low_sum_.begin(), low_sum_.end(), 0.0);
    std::fill(high_sum_.begin(), high_sum_.end(), 0.0);
  }

  /// Advances one step with per-sensor LLR increments. The two latch checks
  /// are independent: a jump past both barriers at once would set both.
  void step(std::span<const double> llr, const Thresholds& thr) {
    ++now_;
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      sum_[i] += llr[i];
      if (low_time_[i] == kNever && sum_[i] <= -thr.a) {
        low_time_[i] = now_;
        low_sum_[i] = sum_[i];
        ++n_low_;
      }
      if (high_time_[i] == kNever && sum_[i] >= thr.b) {
        high_time_[i] = now_;
        high_sum_[i] = sum_[i];
        ++n_high_;
      }
    }
  }

  int size() const { return static_cast<int>(sum_.size()); }
  std::int64_t now() const { return now_; }
  double sum(int i) const { return sum_[static_cast<std::size_t>(i)]; }
  std::int64_t low_time(int i) const { return low_time_[static_cast<std::size_t>(i)]; }
  std::int64_t high_time(int i) const { return high_time_[static_cast<std::size_t>(i)]; }
  bool crossed_low(int i) const { return low_time_[static_cast<std::size_t>(i)] != kNever; }
  bool crossed_high(int i) const { return high_time_[static_cast<std::size_t>(i)] != kNever; }
  int n_crossed_low() const { return n_low_; }
  int n_crossed_high() const { return n_high_; }
  std::span<const std::int64_t> low_times() const { return low_time_; }
  std::span<const std::int64_t> high_times() const { return high_time_; }
  // Sum frozen at the latch step, overshoot included. Only meaningful once
  // the corresponding latch is set.
  double sum_at_low_latch(int i) const { return low_sum_[static_cast<std::size_t>(i)]; }
  double sum_at_high_latch(int i) const { return high_sum_[static_cast<std::size_t>(i)]; }

 private:
  std::int64_t now_ = 0;
  int n_low_ = 0;
  int n_high_ = 0;
  std::vector<double> sum_;
  std::vector<std::int64_t> low_time_;
  std::vector<std::int64_t> high_time_;
  std::vector<double> low_sum_;
  std::vector<double> high_sum_;
};

/// Runs a plain SPRT on the summed statistic of a fixed sensor subset.
struct SumRule {
  std::vector<int> sensors;  // empty means "all sensors"
};

/// Decides when the r-th order statistic of the one-sided crossing times
/// arrives: accept 0 once r sensors have ever crossed low, accept 1 once r
/// have ever crossed high, whichever happens first. s/2 < r <= s.
struct VotingRule {
  int r = 1;
};

using DetectorRule = std::variant<SumRule, VotingRule>;

inline void validate_rule(const DetectorRule& rule, int s) {
  if (const auto* sum = std::get_if<SumRule>(&rule)) {
    std::vector<int> seen;
    for (int i : sum->sensors) {
      if (i < 0 || i >= s) throw ConfigError("sum rule: sensor index out of range");
      seen.push_back(i);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw ConfigError("sum rule: duplicate sensor index");
  } else {
    const int r = std::get<VotingRule>(rule).r;
    if (!(2 * r > s && r <= s))
      throw ConfigError("voting rule: need s/2 < r <= s");
  }
}

/// One-step decision for the sum rule. A single sum cannot sit on both
/// sides, so there is no tie branch here.
inline Decision sum_rule_decide(const SensorPanel& panel, const SumRule& rule,
                                const Thresholds& thr) {
  double total = 0.0;
  if (rule.sensors.empty()) {
    for (int i = 0; i < panel.size(); ++i) total += panel.sum(i);
  } else {
    for (int i : rule.sensors) total += panel.sum(i);
  }
  if (total <= -thr.a) return {Verdict::kAccept0, panel.now(), false};
  if (total >= thr.b) return {Verdict::kAccept1, panel.now(), false};
  return {};
}

namespace detail {

/// r-th smallest value of a latched-time vector (kNever sentinels sort last).
inline std::int64_t kth_crossing_time(std::span<const std::int64_t> times, int r) {
  thread_local std::vector<std::int64_t> scratch;
  scratch.assign(times.begin(), times.end());
  auto nth = scratch.begin() + (r - 1);
  std::nth_element(scratch.begin(), nth, scratch.end());
  return *nth;
}

}  // namespace detail

/// Retrospective voting decision: compares the r-th order statistics of the
/// two crossing-time families and picks the earlier side. When both arrive
/// at the same step the verdict is a fair coin from `tie_rng`. Returns
/// kContinue while fewer than r sensors have crossed either side.
///
/// Called once per step by the trial loop, so the coin is consumed at most
/// once per trial (the trial stops at the first non-continue decision).
inline Decision voting_decide(const SensorPanel& panel, const VotingRule& rule,
                              RandomStream& tie_rng) {
  const int r = rule.r;
  const bool low_ready = panel.n_crossed_low() >= r;
  const bool high_ready = panel.n_crossed_high() >= r;
  if (!low_ready && !high_ready) return {};
  const std::int64_t t_low =
      low_ready ? detail::kth_crossing_time(panel.low_times(), r) : SensorPanel::kNever;
  const std::int64_t t_high =
      high_ready ? detail::kth_crossing_time(panel.high_times(), r) : SensorPanel::kNever;
  if (t_low < t_high) return {Verdict::kAccept0, t_low, false};
  if (t_high < t_low) return {Verdict::kAccept1, t_high, false};
  return {tie_rng.coin() ? Verdict::kAccept0 : Verdict::kAccept1, t_low, true};
}

inline Decision rule_decide(const SensorPanel& panel, const DetectorRule& rule,
                            const Thresholds& thr, RandomStream& tie_rng) {
  if (const auto* sum = std::get_if<SumRule>(&rule))
    return sum_rule_decide(panel, *sum, thr);
  return voting_decide(panel, std::get<VotingRule>(rule), tie_rng);
}

/// Everything fixed across the trials of one estimation run.
struct TrialSetup {
  const HypothesisModel* model = nullptr;
  const DetectorRule* rule = nullptr;
  const AttackStrategy* attack = nullptr;  // null behaves like NullAttack
  PlacementSpec placement;                 // carries c
  int s = 1;
  Thresholds thresholds;
  std::int64_t max_horizon = 1'000'000;

  /// Importance-sampling knob: this many honest sensors (a uniformly chosen
  /// subset, fresh per trial) draw from the opposite law until their own
  /// wrong-barrier latch sets. The trial weight is taken against the mixture
  /// over all subsets of this size, which keeps it bounded on wrong-verdict
  /// trials. Zero means plain sampling.
  int tilt_count = 0;
};

struct TrialOutcome {
  Verdict verdict = Verdict::kTruncated;
  std::int64_t time = 0;      // decision step, or max_horizon when truncated
  double log_weight = 0.0;    // log importance weight (0 for plain trials)
  bool tie = false;
};

/// Reusable per-worker buffers so the trial loop never allocates.
class TrialWorkspace {
 public:
  explicit TrialWorkspace(int s)
      : panel_(s),
        obs_(static_cast<std::size_t>(s)),
        bias_(static_cast<std::size_t>(s)),
        llr_(static_cast<std::size_t>(s)),
        tilted_(static_cast<std::size_t>(s)) {}

  SensorPanel panel_;
  std::vector<double> obs_, bias_, llr_, comp_obs_, esym_;
  std::vector<char> tilted_;
  std::vector<int> compromised_, scratch_honest_;
};

/// Simulates one trial: draw true observations, let the attack bias its
/// sensors, feed delivered LLRs to the panel, stop at the rule's decision or
/// at the horizon. All randomness comes from channels of `trial_key`, so a
/// trial is reproducible in isolation and the honest observation sequence is
/// unchanged when only the attack differs.
inline TrialOutcome run_trial(const TrialSetup& setup, int theta, const StreamKey& trial_key,
                              TrialWorkspace& ws) {
  const HypothesisModel& model = *setup.model;
  const int s = setup.s;
  const int c = setup.attack ? setup.placement.c : 0;

  auto obs_rng = open_channel(trial_key, StreamChannel::kObservation);
  auto attack_rng = open_channel(trial_key, StreamChannel::kAttack);
  auto tie_rng = open_channel(trial_key, StreamChannel::kTieBreak);

  ws.panel_.reset();
  ws.compromised_.clear();
  if (c > 0) {
    auto placement_rng = open_channel(trial_key, StreamChannel::kPlacement);
    ws.compromised_ = setup.placement.resolve(s, placement_rng);
  }

  std::fill(ws.tilted_.begin(), ws.tilted_.end(), char{0});
  if (setup.tilt_count > 0) {
    ws.scratch_honest_.clear();
    for (int i = 0, j = 0; i < s; ++i) {
      while (j < static_cast<int>(ws.compromised_.size()) && ws.compromised_[j] < i) ++j;
      const bool comp = j < static_cast<int>(ws.compromised_.size()) && ws.compromised_[j] == i;
      if (!comp) ws.scratch_honest_.push_back(i);
    }
    if (setup.tilt_count > static_cast<int>(ws.scratch_honest_.size()))
      throw EstimationError("tilt plan asks for more sensors than there are honest ones");
    auto plan_rng = open_channel(trial_key, StreamChannel::kTiltPlan);
    auto chosen = plan_rng.sample_without_replacement(std::move(ws.scratch_honest_),
                                                      static_cast<std::size_t>(setup.tilt_count));
    for (int i : chosen) ws.tilted_[static_cast<std::size_t>(i)] = 1;
  }

  // A tilted sensor samples the opposite law until its own wrong-barrier
  // latch sets (wrong barrier: high under theta = 0, low under theta = 1).
  const auto tilt_active = [&](int i) {
    if (!ws.tilted_[static_cast<std::size_t>(i)]) return false;
    return theta == 0 ? !ws.panel_.crossed_high(i) : !ws.panel_.crossed_low(i);
  };

  Verdict verdict = Verdict::kTruncated;
  std::int64_t time = setup.max_horizon;
  bool tie = false;
  auto& comp_obs = ws.comp_obs_;  // true observations of compromised sensors

  for (std::int64_t k = 1; k <= setup.max_horizon; ++k) {
    for (int i = 0; i < s; ++i) {
      if (tilt_active(i)) {
        ws.obs_[static_cast<std::size_t>(i)] = model.sample(1 - theta, obs_rng);
      } else {
        ws.obs_[static_cast<std::size_t>(i)] = model.sample(theta, obs_rng);
      }
    }

    std::fill(ws.bias_.begin(), ws.bias_.end(), 0.0);
    if (setup.attack && !ws.compromised_.empty()) {
      comp_obs.clear();
      for (int i : ws.compromised_) comp_obs.push_back(ws.obs_[static_cast<std::size_t>(i)]);
      AttackInput in{ws.compromised_, comp_obs, theta, k};
      setup.attack->apply(in, model, attack_rng, ws.bias_);
      // admissibility: the attack may only touch its own sensors
      for (int i = 0, j = 0; i < s; ++i) {
        while (j < static_cast<int>(ws.compromised_.size()) && ws.compromised_[j] < i) ++j;
        const bool comp = j < static_cast<int>(ws.compromised_.size()) && ws.compromised_[j] == i;
        if (!comp && ws.bias_[static_cast<std::size_t>(i)] != 0.0)
          throw EstimationError("attack wrote outside its compromised set");
      }
    }

    for (int i = 0; i < s; ++i)
      ws.llr_[static_cast<std::size_t>(i)] =
          model.log_likelihood_ratio(ws.obs_[static_cast<std::size_t>(i)] +
                                     ws.bias_[static_cast<std::size_t>(i)]);

    ws.panel_.step(ws.llr_, setup.thresholds);
    const Decision d = rule_decide(ws.panel_, *setup.rule, setup.thresholds, tie_rng);
    if (d.verdict != Verdict::kContinue) {
      verdict = d.verdict;
      time = d.time;
      tie = d.tie;
      break;
    }
  }

  // The tilted subset is uniform over the C(h, tc) honest subsets of size tc,
  // so the trial is a draw from the mixture of all those proposals and the
  // weight is dP / dQ_mix = C(h, tc) / e_tc(z). Here z_j tracks how far sensor
  // j's sum ran toward the wrong barrier under the tilt stopping rule: under
  // theta = 0, log z_j = S_j frozen at its high latch (or at the end if none);
  // under theta = 1 the sign flips and the low latch freezes it. e_tc is the
  // elementary symmetric polynomial, built in log space. A wrong verdict needs
  // at least tc honest wrong-side latches, so on those trials
  // log w <= log C(h, tc) - tc * barrier: no heavy-tail weights.
  double log_weight = 0.0;
  if (setup.tilt_count > 0) {
    const int tc = setup.tilt_count;
    auto& e = ws.esym_;
    e.assign(static_cast<std::size_t>(tc) + 1, -std::numeric_limits<double>::infinity());
    e[0] = 0.0;
    int honest = 0;
    for (int i = 0, j = 0; i < s; ++i) {
      while (j < static_cast<int>(ws.compromised_.size()) && ws.compromised_[j] < i) ++j;
      if (j < static_cast<int>(ws.compromised_.size()) && ws.compromised_[j] == i) continue;
      const double log_z =
          theta == 0
              ? (ws.panel_.crossed_high(i) ? ws.panel_.sum_at_high_latch(i) : ws.panel_.sum(i))
              : -(ws.panel_.crossed_low(i) ? ws.panel_.sum_at_low_latch(i) : ws.panel_.sum(i));
      ++honest;
      for (int k = std::min(honest, tc); k >= 1; --k)
        e[static_cast<std::size_t>(k)] = log_add_exp(
            e[static_cast<std::size_t>(k)], e[static_cast<std::size_t>(k - 1)] + log_z);
    }
    log_weight = std::lgamma(honest + 1.0) - std::lgamma(tc + 1.0) -
                 std::lgamma(honest - tc + 1.0) - e[static_cast<std::size_t>(tc)];
  }

  return {verdict, time, log_weight, tie};
}

}  // namespace byzsprt
