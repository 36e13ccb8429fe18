#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "byzsprt/common.hpp"
#include "byzsprt/models.hpp"
#include "byzsprt/random.hpp"

namespace byzsprt {

/// Which sensors the adversary controls. The system model fixes the count c;
/// the identity of the set is either pinned in the config or redrawn
/// uniformly at each trial (the default, so no detector can exploit a fixed
/// placement).
struct PlacementSpec {
  enum class Mode { kRandomPerTrial, kFixed };
  Mode mode = Mode::kRandomPerTrial;
  int c = 0;
  std::vector<int> fixed_indices;  // 0-based, used when mode == kFixed

  void validate(int s) const {
    if (c < 0 || c > s) throw ConfigError("placement: need 0 <= c <= s");
    if (mode == Mode::kFixed && c > 0) {
      if (static_cast<int>(fixed_indices.size()) != c)
        throw ConfigError("placement: fixed index list must have length c");
      auto set = fixed_indices;
      std::sort(set.begin(), set.end());
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (set[i] < 0 || set[i] >= s) throw ConfigError("placement: index out of range");
        if (i > 0 && set[i] == set[i - 1]) throw ConfigError("placement: duplicate index");
      }
    }
  }

  /// Returns the sorted compromised set for one trial.
  std::vector<int> resolve(int s, RandomStream& rng) const {
    validate(s);
    if (c == 0) return {};
    if (mode == Mode::kFixed) {
      auto set = fixed_indices;
      std::sort(set.begin(), set.end());
      return set;
    }
    std::vector<int> pool(s);
    for (int i = 0; i < s; ++i) pool[i] = i;
    auto set = rng.sample_without_replacement(std::move(pool), static_cast<std::size_t>(c));
    std::sort(set.begin(), set.end());
    return set;
  }
};

/// What the adversary sees at one step: the true observations of its own
/// sensors, the hypothesis, and the time index. Honest observations are
/// never exposed here, so no strategy can read them.
struct AttackInput {
  std::span<const int> compromised;      // sorted sensor indices
  std::span<const double> true_obs;      // aligned with `compromised`
  int theta = 0;
  std::int64_t k = 0;
};

/// A causal attack: at each step it may add an arbitrary bias to the
/// delivered observation of each compromised sensor. `bias` arrives zeroed
/// and spans all s sensors; implementations must write only at compromised
/// indices (the trial loop checks).
class AttackStrategy {
 public:
  virtual ~AttackStrategy() = default;
  virtual std::string name() const = 0;
  virtual void apply(const AttackInput& in, const HypothesisModel& model,
                     RandomStream& rng, std::span<double> bias) const = 0;
  /// Mean per-step delivered LLR drift of a compromised sensor, signed so
  /// that positive means "toward the barrier that is wrong for this theta".
  /// Zero for attacks that do not push. The estimation layer uses it to
  /// count the wrong-barrier crossings the attack supplies on its own.
  virtual double wrongward_drift(int theta, const HypothesisModel& model) const = 0;
};

/// Does nothing; every sensor delivers its true observation.
class NullAttack : public AttackStrategy {
 public:
  std::string name() const override { return "none"; }
  void apply(const AttackInput&, const HypothesisModel&, RandomStream&,
             std::span<double>) const override {}
  double wrongward_drift(int, const HypothesisModel&) const override { return 0.0; }
};

/// Replaces each compromised observation with an independent draw from the
/// opposite law: under theta the delivered sample follows law 1-theta.
/// This is the least-favorable strategy the equilibrium analysis is built
/// around; it hides the hypothesis from the compromised sensors entirely.
class FlipAttack : public AttackStrategy {
 public:
  std::string name() const override { return "flip"; }

  void apply(const AttackInput& in, const HypothesisModel& model, RandomStream& rng,
             std::span<double> bias) const override {
    for (std::size_t j = 0; j < in.compromised.size(); ++j) {
      const double fake = model.sample(1 - in.theta, rng);
      bias[static_cast<std::size_t>(in.compromised[j])] = fake - in.true_obs[j];
    }
  }

  double wrongward_drift(int theta, const HypothesisModel& model) const override {
    const auto [i0, i1] = model.kl_divergences();
    // delivered law is the opposite one, so the drift is +i1 (theta = 0,
    // pushing up) or -(-i0) (theta = 1, pushing down); both wrongward
    return theta == 0 ? i1 : i0;
  }
};

/// Stress attack: each compromised sensor delivers a fixed observation whose
/// LLR pushes its statistic toward the wrong barrier for the true theta.
/// For the Gaussian pair the delivered value is -+magnitude against the
/// truth; on alphabets it is the extreme-LLR point.
class SuppressionAttack : public AttackStrategy {
 public:
  explicit SuppressionAttack(double magnitude) : magnitude_(magnitude) {
    if (!(magnitude > 0.0) || !std::isfinite(magnitude))
      throw ConfigError("suppression attack: magnitude must be positive and finite");
  }

  std::string name() const override { return "suppression"; }

  void apply(const AttackInput& in, const HypothesisModel& model, RandomStream&,
             std::span<double> bias) const override {
    const double delivered = model.extreme_observation(wrong_direction(in.theta), magnitude_);
    for (std::size_t j = 0; j < in.compromised.size(); ++j)
      bias[static_cast<std::size_t>(in.compromised[j])] = delivered - in.true_obs[j];
  }

  double wrongward_drift(int theta, const HypothesisModel& model) const override {
    const double delivered = model.extreme_observation(wrong_direction(theta), magnitude_);
    const double drift = model.log_likelihood_ratio(delivered);
    return theta == 0 ? drift : -drift;
  }

  double magnitude() const { return magnitude_; }

 private:
  static int wrong_direction(int theta) { return theta == 0 ? +1 : -1; }
  double magnitude_;
};

enum class AttackType { kNone, kFlip, kSuppression };

inline const char* to_string(AttackType t) {
  switch (t) {
    case AttackType::kNone: return "none";
    case AttackType::kFlip: return "flip";
    case AttackType::kSuppression: return "suppression";
  }
  return "?";
}

/// Declarative attack description; `make_attack` turns it into a strategy.
struct AttackSpec {
  AttackType type = AttackType::kNone;
  PlacementSpec placement;  // carries c
  double magnitude = 10.0;  // suppression only

  int c() const { return type == AttackType::kNone ? 0 : placement.c; }
};

inline std::unique_ptr<AttackStrategy> make_attack(const AttackSpec& spec) {
  switch (spec.type) {
    case AttackType::kNone: return std::make_unique<NullAttack>();
    case AttackType::kFlip: return std::make_unique<FlipAttack>();
    case AttackType::kSuppression: return std::make_unique<SuppressionAttack>(spec.magnitude);
  }
  throw ConfigError("unknown attack type");
}

}  // namespace byzsprt
