#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "byzsprt/numeric.hpp"
#include "byzsprt/random.hpp"
#include "byzsprt/stats.hpp"

using namespace byzsprt;

namespace {

std::vector<std::uint64_t> take(RandomStream& s, int n) {
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(s.next_u64());
  return out;
}

std::vector<std::uint64_t> take(RandomStream&& s, int n) { return take(s, n); }

constexpr std::uint64_t kObs = static_cast<std::uint64_t>(StreamChannel::kObservation);

}  // namespace

TEST_CASE("same key yields the same sequence") {
  StreamKey key{123, 1, 0, 7, 42, kObs};
  RandomStream a(key);
  RandomStream b(key);
  REQUIRE(take(a, 64) == take(b, 64));
}

TEST_CASE("any key component separates streams") {
  StreamKey base{9, 2, 1, 3, 5, kObs};
  RandomStream ref(base);
  auto ref_seq = take(ref, 16);

  auto differs = [&](StreamKey k) {
    RandomStream s(k);
    return take(s, 16) != ref_seq;
  };

  StreamKey k = base;
  k.seed = 10;
  REQUIRE(differs(k));
  k = base;
  k.purpose = 3;
  REQUIRE(differs(k));
  k = base;
  k.theta = 0;
  REQUIRE(differs(k));
  k = base;
  k.point = 4;
  REQUIRE(differs(k));
  k = base;
  k.trial = 6;
  REQUIRE(differs(k));
  REQUIRE(take(open_channel(base, StreamChannel::kAttack), 16) != ref_seq);
}

TEST_CASE("all-zero key still produces a live stream") {
  StreamKey key{};
  RandomStream s(key);
  auto seq = take(s, 8);
  bool any_nonzero = false;
  for (auto v : seq) any_nonzero |= (v != 0);
  REQUIRE(any_nonzero);
  std::set<std::uint64_t> uniq(seq.begin(), seq.end());
  REQUIRE(uniq.size() == seq.size());
}

TEST_CASE("uniform01 stays in the half-open unit interval") {
  RandomStream s({1, 1, 0, 0, 0, kObs});
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double u = s.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  REQUIRE(lo < 0.01);
  REQUIRE(hi > 0.99);
}

TEST_CASE("uniform01 passes a KS check against the uniform law") {
  RandomStream s({2, 1, 0, 0, 0, kObs});
  std::vector<double> draws(20000);
  for (auto& d : draws) d = s.uniform01();
  auto r = ks_one_sample(draws, [](double x) { return x; });
  REQUIRE(r.p_value > 1e-3);
}

TEST_CASE("normal draws match the standard normal law") {
  RandomStream s({3, 1, 0, 0, 0, kObs});
  const int n = 200000;
  RunningStat st;
  std::vector<double> sample(4000);
  for (int i = 0; i < n; ++i) {
    double x = s.normal();
    st.add(x);
    if (i < 4000) sample[static_cast<std::size_t>(i)] = x;
  }
  REQUIRE(std::abs(st.mean()) < 4.0 / std::sqrt(double(n)));
  REQUIRE(std::abs(st.variance() - 1.0) < 0.02);
  auto r = ks_one_sample(sample, [](double x) { return normal_cdf(x); });
  REQUIRE(r.p_value > 1e-3);
}

TEST_CASE("bernoulli and coin frequencies") {
  RandomStream s({4, 1, 0, 0, 0, kObs});
  const int n = 100000;
  int hits = 0, heads = 0;
  for (int i = 0; i < n; ++i) {
    hits += s.bernoulli(0.3) ? 1 : 0;
    heads += s.coin() ? 1 : 0;
  }
  REQUIRE(std::abs(hits / double(n) - 0.3) < 4.0 * binomial_stderr(0.3, n));
  REQUIRE(std::abs(heads / double(n) - 0.5) < 4.0 * binomial_stderr(0.5, n));
}

TEST_CASE("uniform_int covers its range uniformly") {
  RandomStream s({5, 1, 0, 0, 0, kObs});
  const int n = 70000, bins = 7;
  std::vector<std::uint64_t> counts(bins, 0);
  for (int i = 0; i < n; ++i) {
    auto v = s.uniform_int(bins);
    REQUIRE(v < std::uint64_t(bins));
    counts[static_cast<std::size_t>(v)] += 1;
  }
  std::vector<double> masses(bins, 1.0 / bins);
  auto r = chi_square_gof(counts, masses);
  REQUIRE(r.p_value > 1e-3);
}

TEST_CASE("categorical respects its cdf") {
  RandomStream s({6, 1, 0, 0, 0, kObs});
  const std::vector<double> cdf{0.2, 0.5, 1.0};
  const int n = 60000;
  std::vector<std::uint64_t> counts(3, 0);
  for (int i = 0; i < n; ++i) counts[s.categorical(cdf)] += 1;
  const std::vector<double> masses{0.2, 0.3, 0.5};
  auto r = chi_square_gof(counts, masses);
  REQUIRE(r.p_value > 1e-3);
}

TEST_CASE("sample_without_replacement gives distinct in-range picks") {
  RandomStream s({7, 1, 0, 0, 0, kObs});
  const int n = 10, k = 4, reps = 30000;
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> inclusion(n, 0);
  for (int rep = 0; rep < reps; ++rep) {
    auto pick = s.sample_without_replacement(pool, std::size_t(k));
    REQUIRE(pick.size() == std::size_t(k));
    std::set<int> uniq(pick.begin(), pick.end());
    REQUIRE(uniq.size() == pick.size());
    for (int v : pick) {
      REQUIRE(v >= 0);
      REQUIRE(v < n);
      inclusion[static_cast<std::size_t>(v)] += 1;
    }
  }
  // every index is included with probability k/n
  for (int v = 0; v < n; ++v) {
    double freq = inclusion[static_cast<std::size_t>(v)] / double(reps);
    REQUIRE(std::abs(freq - double(k) / n) < 5.0 * binomial_stderr(double(k) / n, reps));
  }
}

TEST_CASE("oversized subset request returns the whole pool") {
  RandomStream s({7, 2, 0, 0, 0, kObs});
  auto pick = s.sample_without_replacement({3, 1, 2}, 9);
  std::sort(pick.begin(), pick.end());
  REQUIRE(pick == std::vector<int>{1, 2, 3});
}

TEST_CASE("normal cache does not leak across streams") {
  StreamKey key{8, 1, 0, 0, 0, kObs};
  RandomStream a(key);
  (void)a.normal();
  (void)a.uniform01();
  RandomStream b(key);
  (void)b.normal();
  (void)b.uniform01();
  for (int i = 0; i < 32; ++i) REQUIRE(a.normal() == b.normal());
}
