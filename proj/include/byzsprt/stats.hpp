#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "byzsprt/common.hpp"

namespace byzsprt {

/// Kolmogorov limit distribution survival function
/// Q(t) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2).
inline double kolmogorov_sf(double t) {
  if (t <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  const double q = 2.0 * sum;
  return q < 0.0 ? 0.0 : (q > 1.0 ? 1.0 : q);
}

struct KsResult {
  double statistic = 0.0;  // sup-norm distance between the compared CDFs
  double p_value = 1.0;    // asymptotic, with Stephens' finite-n adjustment
};

/// One-sample two-sided KS test of `data` against a continuous CDF.
inline KsResult ks_one_sample(std::vector<double> data,
                              const std::function<double(double)>& cdf) {
  if (data.empty()) throw EstimationError("KS test on empty sample");
  std::sort(data.begin(), data.end());
  const double n = static_cast<double>(data.size());
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = cdf(data[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(f - lo), std::abs(hi - f)});
  }
  const double en = std::sqrt(n);
  return {d, kolmogorov_sf((en + 0.12 + 0.11 / en) * d)};
}

/// Two-sample two-sided KS test.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw EstimationError("KS test on empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_sf((en + 0.12 + 0.11 / en) * d)};
}

namespace detail {

// regularized lower incomplete gamma P(a,x), series branch
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// regularized upper incomplete gamma Q(a,x), continued-fraction branch
inline double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Chi-square upper tail probability with k degrees of freedom.
inline double chi_square_sf(double x, double k) {
  if (x <= 0.0) return 1.0;
  const double a = 0.5 * k, hx = 0.5 * x;
  if (hx < a + 1.0) return 1.0 - detail::gamma_p_series(a, hx);
  return detail::gamma_q_cf(a, hx);
}

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;
};

/// Pearson goodness-of-fit of observed counts against expected masses.
inline ChiSquareResult chi_square_gof(std::span<const std::uint64_t> counts,
                                      std::span<const double> masses) {
  if (counts.size() != masses.size() || counts.empty())
    throw EstimationError("chi-square: size mismatch");
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  double stat = 0.0;
  double dof = -1.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double e = n * masses[j];
    if (e <= 0.0) continue;
    const double d = static_cast<double>(counts[j]) - e;
    stat += d * d / e;
    dof += 1.0;
  }
  if (dof < 1.0) dof = 1.0;
  return {stat, chi_square_sf(stat, dof), dof};
}

}  // namespace byzsprt
