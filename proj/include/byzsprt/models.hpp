#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "byzsprt/common.hpp"
#include "byzsprt/numeric.hpp"
#include "byzsprt/random.hpp"

namespace byzsprt {

enum class Support { kContinuousLine, kFiniteAlphabet };

/// Two Gaussians with a shared variance. Hypothesis 0 observes
/// N(mean0, sigma^2), hypothesis 1 observes N(mean1, sigma^2).
struct GaussianPair {
  double mean0 = -1.0;
  double mean1 = 1.0;
  double sigma = 1.0;
};

/// Two probability mass functions on a common finite set of points.
struct FiniteAlphabet {
  std::vector<double> points;
  std::vector<double> mass0;
  std::vector<double> mass1;
};

/// Divergence constants of a hypothesis pair, in nats.
///   i0 = KL(law0 || law1), i1 = KL(law1 || law0),
///   i  = min(i0, i1) (the normalizer used for reporting),
///   i_tilde = -log inf_w E_0[(dLaw1/dLaw0)^w], the error exponent of the
///   fixed-sample-size likelihood ratio test; 0 < i_tilde < i for any
///   non-degenerate pair. w_star is the minimizing exponent.
struct InfoConstants {
  double i0 = 0.0;
  double i1 = 0.0;
  double i = 0.0;
  double i_tilde = 0.0;
  double w_star = 0.0;
};

/// One binary hypothesis pair: observation laws for theta in {0,1} and the
/// per-observation log-likelihood ratio L(x) = log dLaw1/dLaw0 (x).
/// All log quantities are natural logs.
class HypothesisModel {
 public:
  explicit HypothesisModel(GaussianPair g, std::string name = "gaussian")
      : family_(g), name_(std::move(name)) {
    if (!(g.sigma > 0.0) || !std::isfinite(g.sigma))
      throw ConfigError("gaussian model: sigma must be positive and finite");
    if (!std::isfinite(g.mean0) || !std::isfinite(g.mean1))
      throw ConfigError("gaussian model: means must be finite");
    if (g.mean0 == g.mean1)
      throw ModelError("degenerate model: the two laws coincide (mean0 == mean1)");
  }

  explicit HypothesisModel(FiniteAlphabet f, std::string name = "finite")
      : family_(std::move(f)), name_(std::move(name)) {
    validate_alphabet(std::get<FiniteAlphabet>(family_));
    build_tables(std::get<FiniteAlphabet>(family_));
  }

  const std::string& name() const { return name_; }

  Support support() const {
    return std::holds_alternative<GaussianPair>(family_) ? Support::kContinuousLine
                                                         : Support::kFiniteAlphabet;
  }

  bool is_gaussian() const { return std::holds_alternative<GaussianPair>(family_); }
  const GaussianPair& gaussian() const { return std::get<GaussianPair>(family_); }
  const FiniteAlphabet& alphabet() const { return std::get<FiniteAlphabet>(family_); }

  /// Log-likelihood ratio of one observation. Throws if the result is not
  /// finite (observation off the common support).
  double log_likelihood_ratio(double x) const {
    double value;
    if (const auto* g = std::get_if<GaussianPair>(&family_)) {
      value = llr_slope(*g) * (x - llr_center(*g));
    } else {
      const auto& f = std::get<FiniteAlphabet>(family_);
      const std::size_t j = locate_point(f, x);
      value = llr_[j];
    }
    if (!std::isfinite(value))
      throw ModelError("degenerate model: non-finite log-likelihood ratio at x=" +
                       std::to_string(x));
    return value;
  }

  /// Draws one observation under hypothesis `theta`.
  double sample(int theta, RandomStream& rng) const {
    if (const auto* g = std::get_if<GaussianPair>(&family_))
      return (theta == 0 ? g->mean0 : g->mean1) + g->sigma * rng.normal();
    const auto& f = std::get<FiniteAlphabet>(family_);
    const auto& cdf = theta == 0 ? cdf0_ : cdf1_;
    return f.points[rng.categorical(cdf)];
  }

  /// log E_0[exp(w L)], the cumulant of the likelihood ratio under law 0.
  /// Finite for w in [0,1] by convexity; closed form for the Gaussian pair,
  /// log-sum-exp over the alphabet otherwise.
  double log_tilted_integral(double w) const {
    if (const auto* g = std::get_if<GaussianPair>(&family_)) {
      const double i = gaussian_kl(*g);
      return i * w * (w - 1.0);
    }
    const auto& f = std::get<FiniteAlphabet>(family_);
    std::vector<double> terms(f.points.size());
    for (std::size_t j = 0; j < f.points.size(); ++j)
      terms[j] = std::log(f.mass0[j]) + w * llr_[j];
    return log_sum_exp(terms);
  }

  /// log E_theta[exp(lambda L)]. Uses E_1[e^{lambda L}] = E_0[e^{(lambda+1) L}].
  double log_mgf(int theta, double lambda) const {
    return log_tilted_integral(theta == 0 ? lambda : lambda + 1.0);
  }

  /// KL divergences in closed form (Gaussian) or by exact summation.
  std::pair<double, double> kl_divergences() const {
    if (const auto* g = std::get_if<GaussianPair>(&family_)) {
      const double i = gaussian_kl(*g);
      return {i, i};
    }
    const auto& f = std::get<FiniteAlphabet>(family_);
    double i0 = 0.0, i1 = 0.0;
    for (std::size_t j = 0; j < f.points.size(); ++j) {
      i0 -= f.mass0[j] * llr_[j];
      i1 += f.mass1[j] * llr_[j];
    }
    return {i0, i1};
  }

  /// KL divergences through adaptive quadrature on the smoothed integrand
  /// (continuous support) or the exact finite sum. Exists to cross-check the
  /// closed forms; relative tolerance 1e-9.
  std::pair<double, double> kl_divergences_by_quadrature() const {
    if (const auto* g = std::get_if<GaussianPair>(&family_)) {
      const double lo = std::min(g->mean0, g->mean1) - 12.0 * g->sigma;
      const double hi = std::max(g->mean0, g->mean1) + 12.0 * g->sigma;
      const double slope = llr_slope(*g), center = llr_center(*g);
      const auto density = [g](double x, double mean) {
        const double z = (x - mean) / g->sigma;
        return std::exp(-0.5 * z * z) / (g->sigma * std::sqrt(2.0 * M_PI));
      };
      const double i0 = integrate(
          [&](double x) { return -slope * (x - center) * density(x, g->mean0); }, lo, hi);
      const double i1 = integrate(
          [&](double x) { return slope * (x - center) * density(x, g->mean1); }, lo, hi);
      return {i0, i1};
    }
    return kl_divergences();
  }

  /// All divergence constants. Throws ModelError when the pair is degenerate
  /// (i0 or i1 vanishes / diverges) or the tilted-integral minimizer is not
  /// strictly inside (0,1).
  InfoConstants info() const {
    const auto [i0, i1] = kl_divergences();
    if (!(i0 > 0.0) || !(i1 > 0.0) || !std::isfinite(i0) || !std::isfinite(i1))
      throw ModelError("degenerate model: KL divergences must be positive and finite");
    double value = 0.0;
    const double lo = 1e-6, hi = 1.0 - 1e-6;
    const double w = golden_section_minimize(
        [this](double u) { return log_tilted_integral(u); }, lo, hi, 1e-10, &value);
    if (w < lo + 1e-5 || w > hi - 1e-5)
      throw ModelError("tilted-integral minimizer not strictly inside (0,1)");
    InfoConstants c;
    c.i0 = i0;
    c.i1 = i1;
    c.i = std::min(i0, i1);
    c.i_tilde = -value;
    c.w_star = w;
    return c;
  }

  /// CDF of law `theta`; right-continuous step function on finite alphabets.
  double cdf(int theta, double x) const {
    if (const auto* g = std::get_if<GaussianPair>(&family_))
      return normal_cdf((x - (theta == 0 ? g->mean0 : g->mean1)) / g->sigma);
    const auto& f = std::get<FiniteAlphabet>(family_);
    double acc = 0.0;
    for (std::size_t j = 0; j < f.points.size(); ++j)
      if (f.points[j] <= x) acc += (theta == 0 ? f.mass0[j] : f.mass1[j]);
    return acc;
  }

  /// An observation whose log-likelihood ratio has sign `direction` and is
  /// as damaging as the family allows: `center +- magnitude` for the
  /// Gaussian pair, the extreme-LLR alphabet point otherwise.
  double extreme_observation(int direction, double magnitude) const {
    if (const auto* g = std::get_if<GaussianPair>(&family_)) {
      const double s = llr_slope(*g) >= 0.0 ? 1.0 : -1.0;
      return llr_center(*g) + direction * s * magnitude;
    }
    const auto& f = std::get<FiniteAlphabet>(family_);
    std::size_t best = 0;
    for (std::size_t j = 1; j < f.points.size(); ++j)
      if (direction * llr_[j] > direction * llr_[best]) best = j;
    return f.points[best];
  }

  /// Law `theta` exponentially tilted by exp(lambda L), normalized.
  /// For the Gaussian pair this is a mean shift by lambda*(mean1-mean0);
  /// for alphabets a reweighted mass table.
  class TiltedLaw {
   public:
    double sample(RandomStream& rng) const {
      if (gaussian_) return mean_ + sigma_ * rng.normal();
      return points_[rng.categorical(cdf_)];
    }

   private:
    friend class HypothesisModel;
    bool gaussian_ = true;
    double mean_ = 0.0, sigma_ = 1.0;
    std::vector<double> points_, cdf_;
  };

  TiltedLaw tilted_law(int theta, double lambda) const {
    TiltedLaw law;
    if (const auto* g = std::get_if<GaussianPair>(&family_)) {
      law.gaussian_ = true;
      law.mean_ = (theta == 0 ? g->mean0 : g->mean1) + lambda * (g->mean1 - g->mean0);
      law.sigma_ = g->sigma;
      return law;
    }
    const auto& f = std::get<FiniteAlphabet>(family_);
    law.gaussian_ = false;
    law.points_ = f.points;
    const double norm = log_mgf(theta, lambda);
    law.cdf_.resize(f.points.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < f.points.size(); ++j) {
      const double base = theta == 0 ? f.mass0[j] : f.mass1[j];
      acc += std::exp(std::log(base) + lambda * llr_[j] - norm);
      law.cdf_[j] = acc;
    }
    law.cdf_.back() = 1.0;
    return law;
  }

  /// Per-point LLR table (finite alphabets only).
  const std::vector<double>& llr_table() const { return llr_; }

 private:
  static double gaussian_kl(const GaussianPair& g) {
    const double d = g.mean1 - g.mean0;
    return d * d / (2.0 * g.sigma * g.sigma);
  }
  static double llr_slope(const GaussianPair& g) {
    return (g.mean1 - g.mean0) / (g.sigma * g.sigma);
  }
  static double llr_center(const GaussianPair& g) { return 0.5 * (g.mean0 + g.mean1); }

  static void validate_alphabet(const FiniteAlphabet& f) {
    const std::size_t n = f.points.size();
    if (n < 2) throw ConfigError("finite model: need at least two alphabet points");
    if (f.mass0.size() != n || f.mass1.size() != n)
      throw ConfigError("finite model: points/mass0/mass1 must have equal length");
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(f.points[j])) throw ConfigError("finite model: non-finite point");
      for (std::size_t k = j + 1; k < n; ++k)
        if (std::abs(f.points[j] - f.points[k]) < 1e-6)
          throw ConfigError("finite model: alphabet points closer than 1e-6 are not supported");
      if (f.mass0[j] < 0.0 || f.mass1[j] < 0.0)
        throw ConfigError("finite model: negative mass");
      if ((f.mass0[j] > 0.0) != (f.mass1[j] > 0.0))
        throw ModelError(
            "degenerate model: laws must share support (mass zero under exactly one "
            "hypothesis at point " +
            std::to_string(f.points[j]) + ")");
      if (f.mass0[j] == 0.0)
        throw ConfigError("finite model: drop points carrying no mass");
      s0 += f.mass0[j];
      s1 += f.mass1[j];
    }
    if (std::abs(s0 - 1.0) > 1e-12 || std::abs(s1 - 1.0) > 1e-12)
      throw ConfigError("finite model: masses must each sum to 1 (within 1e-12)");
  }

  void build_tables(const FiniteAlphabet& f) {
    const std::size_t n = f.points.size();
    llr_.resize(n);
    cdf0_.resize(n);
    cdf1_.resize(n);
    double a0 = 0.0, a1 = 0.0;
    bool distinct = false;
    for (std::size_t j = 0; j < n; ++j) {
      llr_[j] = std::log(f.mass1[j]) - std::log(f.mass0[j]);
      if (llr_[j] != 0.0) distinct = true;
      a0 += f.mass0[j];
      a1 += f.mass1[j];
      cdf0_[j] = a0;
      cdf1_[j] = a1;
    }
    cdf0_.back() = 1.0;
    cdf1_.back() = 1.0;
    if (!distinct) throw ModelError("degenerate model: the two laws coincide");
  }

  // Tolerant lookup: delivered observations are built by adding a bias to a
  // true observation, so a value meant to be an alphabet point can be off by
  // a rounding error. Points are at least 1e-6 apart (validated), so a 1e-9
  // window is unambiguous.
  static std::size_t locate_point(const FiniteAlphabet& f, double x) {
    for (std::size_t j = 0; j < f.points.size(); ++j)
      if (std::abs(f.points[j] - x) <= 1e-9) return j;
    throw ModelError("observation " + std::to_string(x) + " is not an alphabet point");
  }

  std::variant<GaussianPair, FiniteAlphabet> family_;
  std::string name_;
  std::vector<double> llr_;   // finite alphabet only
  std::vector<double> cdf0_;  // cumulative masses under law 0
  std::vector<double> cdf1_;
};

}  // namespace byzsprt
