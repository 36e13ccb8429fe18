#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "byzsprt/common.hpp"
#include "byzsprt/numeric.hpp"
#include "byzsprt/stats.hpp"

using namespace byzsprt;
using Catch::Approx;

TEST_CASE("log_sum_exp handles plain and degenerate inputs") {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> two{std::log(1.0), std::log(1.0)};
  REQUIRE(log_sum_exp(two) == Approx(std::log(2.0)).margin(1e-15));

  std::vector<double> mixed{-inf, 0.0, -inf};
  REQUIRE(log_sum_exp(mixed) == Approx(0.0).margin(1e-15));

  std::vector<double> empty;
  REQUIRE(log_sum_exp(empty) == -inf);

  std::vector<double> all_neg{-inf, -inf};
  REQUIRE(log_sum_exp(all_neg) == -inf);

  // large magnitudes must not overflow
  std::vector<double> big{1000.0, 1000.0};
  REQUIRE(log_sum_exp(big) == Approx(1000.0 + std::log(2.0)).margin(1e-12));
}

TEST_CASE("log_add_exp agrees with log_sum_exp") {
  const double inf = std::numeric_limits<double>::infinity();
  REQUIRE(log_add_exp(-inf, -inf) == -inf);
  REQUIRE(log_add_exp(-inf, 2.5) == Approx(2.5));
  REQUIRE(log_add_exp(-1.0, -2.0) ==
          Approx(std::log(std::exp(-1.0) + std::exp(-2.0))).margin(1e-15));
}

TEST_CASE("normal_cdf reference values") {
  REQUIRE(normal_cdf(0.0) == Approx(0.5).margin(1e-16));
  REQUIRE(normal_cdf(1.959963984540054) == Approx(0.975).margin(1e-12));
  REQUIRE(normal_cdf(-1.959963984540054) == Approx(0.025).margin(1e-12));
  REQUIRE(normal_cdf(5.0) == Approx(1.0).margin(1e-6));
}

TEST_CASE("integrate recovers closed-form integrals") {
  REQUIRE(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
          Approx(1.0 / 3.0).margin(1e-10));
  // standard normal density over +-12 sigma
  auto phi = [](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
  };
  REQUIRE(integrate(phi, -12.0, 12.0) == Approx(1.0).margin(1e-9));
  REQUIRE(integrate([](double x) { return std::sin(x); }, 0.0, 3.14159265358979323846) ==
          Approx(2.0).margin(1e-9));
}

TEST_CASE("golden_section_minimize finds a quadratic minimum") {
  double value = 0.0;
  double x = golden_section_minimize([](double t) { return (t - 0.3) * (t - 0.3) + 1.5; },
                                     0.0, 1.0, 1e-10, &value);
  REQUIRE(x == Approx(0.3).margin(1e-8));
  REQUIRE(value == Approx(1.5).margin(1e-12));
}

TEST_CASE("bisect_root finds sqrt(2) and rejects bad brackets") {
  double r = bisect_root([](double t) { return t * t - 2.0; }, 0.0, 2.0, 1e-13);
  REQUIRE(r == Approx(std::sqrt(2.0)).margin(1e-12));
  REQUIRE_THROWS_AS(bisect_root([](double t) { return t * t + 1.0; }, 0.0, 2.0, 1e-13),
                    ModelError);
}

TEST_CASE("RunningStat matches direct formulas and merge is consistent") {
  const std::vector<double> xs{1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  RunningStat all;
  for (double x : xs) all.add(x);
  REQUIRE(all.count() == xs.size());
  REQUIRE(all.mean() == Approx(10.5).margin(1e-12));
  // sample variance of {1,2,4,8,16,32}
  double m = 10.5, ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  REQUIRE(all.variance() == Approx(ss / 5.0).margin(1e-10));
  REQUIRE(all.stderror() == Approx(std::sqrt(ss / 5.0 / 6.0)).margin(1e-10));

  RunningStat a, b;
  for (std::size_t i = 0; i < 2; ++i) a.add(xs[i]);
  for (std::size_t i = 2; i < xs.size(); ++i) b.add(xs[i]);
  a.merge(b);
  REQUIRE(a.count() == all.count());
  REQUIRE(a.mean() == Approx(all.mean()).margin(1e-12));
  REQUIRE(a.variance() == Approx(all.variance()).margin(1e-10));

  RunningStat empty;
  empty.merge(all);
  REQUIRE(empty.mean() == Approx(all.mean()).margin(1e-12));
  all.merge(RunningStat{});
  REQUIRE(all.count() == xs.size());
}

TEST_CASE("binomial_stderr closed form") {
  REQUIRE(binomial_stderr(0.5, 100) == Approx(0.05).margin(1e-15));
  REQUIRE(binomial_stderr(0.0, 100) == 0.0);
  REQUIRE(binomial_stderr(0.3, 1) == 0.0);
}

TEST_CASE("kolmogorov_sf reference values") {
  // Q(t) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2), truncated far past 1e-18
  auto direct = [](double t) {
    double s = 0.0;
    for (int k = 1; k <= 50; ++k)
      s += ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
    return 2.0 * s;
  };
  for (double t : {0.4, 0.7, 1.0, 1.36, 2.0})
    REQUIRE(kolmogorov_sf(t) == Approx(direct(t)).margin(1e-14));
  REQUIRE(kolmogorov_sf(0.0) == 1.0);
  REQUIRE(kolmogorov_sf(5.0) < 1e-20);
}

TEST_CASE("chi_square_sf agrees with the normal square relation at one dof") {
  // If Z ~ N(0,1) then P[Z^2 > x] = 2 (1 - Phi(sqrt(x))).
  for (double x : {0.5, 1.0, 3.841458820694124, 6.634896601021214}) {
    const double via_normal = 2.0 * (1.0 - normal_cdf(std::sqrt(x)));
    REQUIRE(chi_square_sf(x, 1.0) == Approx(via_normal).margin(1e-12));
  }
  // Two dof is exponential: sf(x) = exp(-x/2).
  for (double x : {0.5, 2.0, 10.0})
    REQUIRE(chi_square_sf(x, 2.0) == Approx(std::exp(-0.5 * x)).margin(1e-12));
}

TEST_CASE("ks_one_sample is calm on an ideal grid and loud on a shifted one") {
  std::vector<double> grid(1000);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(grid.size());
  auto ideal = ks_one_sample(grid, [](double x) { return x; });
  REQUIRE(ideal.statistic == Approx(0.0005).margin(1e-12));
  REQUIRE(ideal.p_value > 0.999);

  std::vector<double> shifted = grid;
  for (auto& x : shifted) x = x * 0.5;  // uniform on [0, 0.5] against U(0,1)
  auto bad = ks_one_sample(shifted, [](double x) { return x; });
  REQUIRE(bad.p_value < 1e-10);
}

TEST_CASE("ks_two_sample separates unequal laws") {
  std::vector<double> a(800), b(800), c(800);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(a.size());
    a[i] = u;
    b[i] = u;          // same law
    c[i] = u * u;      // different law
  }
  REQUIRE(ks_two_sample(a, b).p_value > 0.999);
  REQUIRE(ks_two_sample(a, c).p_value < 1e-10);
}

TEST_CASE("chi_square_gof flags a biased die") {
  std::vector<std::uint64_t> fair{100, 101, 99, 100, 98, 102};
  std::vector<double> masses(6, 1.0 / 6.0);
  REQUIRE(chi_square_gof(fair, masses).p_value > 0.99);
  std::vector<std::uint64_t> biased{200, 80, 80, 80, 80, 80};
  REQUIRE(chi_square_gof(biased, masses).p_value < 1e-6);
}
