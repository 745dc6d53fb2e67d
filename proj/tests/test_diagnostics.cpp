#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rjfit/diagnostics.hpp"
#include "rjfit/rng.hpp"

using namespace rjfit;

namespace {

// Brute-force 10^6-term evaluation of 2 sum (-1)^(i-1) exp(-2 i^2 t^2).
double ks_series_oracle(long double t) {
  long double sum = 0.0L;
  for (long i = 1; i <= 1'000'000; ++i) {
    const long double term = std::exp(-2.0L * i * i * t * t);
    sum += (i % 2 == 1) ? term : -term;
  }
  return static_cast<double>(2.0L * sum);
}

}  // namespace

TEST(Histogram, SmallExamples) {
  auto h = histogram(std::vector<double>{0.0, 1.0}, 2);
  EXPECT_EQ(h.mass, (std::vector<double>{0.5, 0.5}));
  h = histogram(std::vector<double>{0.0, 0.0, 0.0, 1.0}, 2);
  EXPECT_EQ(h.mass, (std::vector<double>{0.75, 0.25}));
  EXPECT_EQ(h.edges.front(), 0.0);
  EXPECT_EQ(h.edges.back(), 1.0);
}

TEST(Histogram, MassSumsToOne) {
  Rng rng(1);
  const auto xs = sample({Family::t, 1.0, 1.0}, 5000, rng);
  const auto h = histogram(xs, 100);
  double s = 0.0;
  for (double m : h.mass) {
    EXPECT_GE(m, 0.0);
    s += m;
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_TRUE(std::is_sorted(h.edges.begin(), h.edges.end()));
  EXPECT_TRUE(std::adjacent_find(h.edges.begin(), h.edges.end()) == h.edges.end());
}

TEST(Histogram, InvalidInputs) {
  EXPECT_THROW(histogram(std::vector<double>{}, 10), std::invalid_argument);
  EXPECT_THROW(histogram(std::vector<double>{1.0, 1.0}, 10), std::invalid_argument);
  EXPECT_THROW(histogram(std::vector<double>{0.0, 1.0}, 1), std::invalid_argument);
}

TEST(KlDivergence, SelfSimilarityIsZero) {
  for (const DistSpec& s : {DistSpec{Family::sas, 1.5, 2.0}, DistSpec{Family::gg, 0.5, 0.5},
                            DistSpec{Family::t, 3.0, 1.0}}) {
    Histogram h;
    for (int i = 0; i <= 50; ++i) h.edges.push_back(-6.0 + 12.0 * i / 50.0);
    h.mass = model_bin_mass(h, s);
    EXPECT_NEAR(kl_divergence(h, s), 0.0, 1e-9) << describe(s);
  }
}

TEST(KlDivergence, NonNegativeAndRanksCandidates) {
  Rng rng(2);
  const DistSpec truth{Family::gg, 0.8, 1.0};
  const auto xs = sample(truth, 2000, rng);
  const auto h = histogram(xs, 100);
  const double near = kl_divergence(h, truth);
  const double far = kl_divergence(h, {Family::gg, 2.0, 3.0});
  EXPECT_GE(near, -1e-10);
  EXPECT_GE(far, -1e-10);
  EXPECT_LT(near, far);
}

TEST(KlDivergence, StableDrawsAgainstGeneratingSpec) {
  Rng rng(3);
  const DistSpec s{Family::sas, 1.5, 2.0};
  const auto xs = sample(s, 1000, rng);
  EXPECT_LE(kl_divergence(histogram(xs, 100), s), 0.08);
}

TEST(KsPValue, SeriesMatchesBruteForceOracle) {
  const double ne = 22.4;
  const double factor = ne + 0.12 + 0.11 / ne;
  for (double t = 0.3; t <= 5.0 + 1e-12; t += 0.1) {
    EXPECT_NEAR(ks_p_value(t / factor, ne), std::clamp(ks_series_oracle(t), 0.0, 1.0), 1e-10)
        << t;
  }
  // t = 1: 2 (e^-2 - e^-8 + e^-18 - ...)
  EXPECT_NEAR(ks_p_value(1.0 / factor, ne), 0.2700, 5e-5);
}

TEST(KsPValue, EdgeAndMonotone) {
  EXPECT_EQ(ks_p_value(0.0, 10.0), 1.0);
  EXPECT_EQ(ks_p_value(0.0, 0.5), 1.0);
  for (double ne : {1.0, 7.0, 22.4, 500.0}) {
    double prev = 1.0;
    for (double d = 0.0; d <= 1.0; d += 0.001) {
      const double p = ks_p_value(d, ne);
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      EXPECT_LE(p, prev + 1e-15) << ne << " " << d;
      prev = p;
    }
  }
  EXPECT_THROW(ks_p_value(1.5, 10.0), std::invalid_argument);
  EXPECT_THROW(ks_p_value(0.1, 0.0), std::invalid_argument);
}

TEST(KsTwoSample, IdenticalSamples) {
  Rng rng(4);
  const auto xs = sample({Family::t, 2.0, 1.0}, 500, rng);
  const auto r = ks_two_sample(xs, xs);
  EXPECT_EQ(r.score, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_NEAR(r.n_effective, std::sqrt(250.0), 1e-12);
}

TEST(KsTwoSample, StatisticMatchesDefinition) {
  Rng rng(5);
  auto a = sample({Family::gg, 1.0, 1.0}, 137, rng);
  auto b = sample({Family::gg, 1.0, 1.3}, 89, rng);
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  double d = 0.0;
  for (double x : pooled) {
    const double fa = static_cast<double>(std::count_if(a.begin(), a.end(), [&](double v) { return v <= x; })) / a.size();
    const double fb = static_cast<double>(std::count_if(b.begin(), b.end(), [&](double v) { return v <= x; })) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  EXPECT_NEAR(ks_statistic(a, b), d, 1e-15);
}

TEST(KsTwoSample, NullPropertyOverSeeds) {
  const DistSpec s{Family::sas, 1.2, 1.0};
  int passing = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(derive_seed(1234, seed));
    const auto data = sample(s, 1000, rng);
    const auto r = ks_two_sample(data, s, 1000, rng);
    EXPECT_GE(r.score, 0.0);
    EXPECT_LE(r.score, 1.0);
    passing += r.p_value > 0.05;
  }
  EXPECT_GE(passing, 180);
}

TEST(KsTwoSample, DetectsWrongModel) {
  Rng rng(6);
  const auto data = sample({Family::sas, 0.6, 1.0}, 1000, rng);
  EXPECT_LT(ks_two_sample(data, {Family::gg, 2.0, 1.0}, 1000, rng).p_value, 0.01);
}

TEST(QqPoints, SelfReferenceIsIdentityLine) {
  const DistSpec s{Family::t, 3.0, 1.0};
  Rng r1(7);
  const auto data = sample(s, 300, r1);
  Rng r2(7);
  const auto qq = qq_points(data, s, r2);
  ASSERT_EQ(qq.size(), data.size());
  for (const auto& [x, y] : qq) EXPECT_EQ(x, y);
}

TEST(QqPoints, SortedPairs) {
  Rng rng(8);
  const auto data = sample({Family::gg, 0.5, 1.0}, 400, rng);
  const auto qq = qq_points(data, {Family::gg, 1.0, 1.0}, rng);
  for (std::size_t i = 1; i < qq.size(); ++i) {
    EXPECT_LE(qq[i - 1].first, qq[i].first);
    EXPECT_LE(qq[i - 1].second, qq[i].second);
  }
}

TEST(QqPoints, CauchyInsideSimulationEnvelope) {
  const DistSpec s{Family::t, 1.0, 1.0};
  Rng rng(9);
  const std::size_t n = 1000;
  const auto data = sample(s, n, rng);
  std::vector<double> lo(n, INFINITY), hi(n, -INFINITY);
  for (int rep = 0; rep < 100; ++rep) {
    auto ref = sample(s, n, rng);
    std::sort(ref.begin(), ref.end());
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], ref[i]);
      hi[i] = std::max(hi[i], ref[i]);
    }
  }
  auto sorted = data;
  std::sort(sorted.begin(), sorted.end());
  std::size_t inside = 0, total = 0;
  for (std::size_t i = n / 20; i < n - n / 20; ++i) {
    ++total;
    inside += sorted[i] >= lo[i] && sorted[i] <= hi[i];
  }
  EXPECT_GE(static_cast<double>(inside) / static_cast<double>(total), 0.95);
  // A wrong model sits outside the envelope for most of the middle range.
  Rng rng2(10);
  auto normal = sample({Family::gg, 2.0, 1.0}, n, rng2);
  std::sort(normal.begin(), normal.end());
  std::size_t normal_inside = 0;
  for (std::size_t i = n / 20; i < n - n / 20; ++i) {
    normal_inside += normal[i] >= lo[i] && normal[i] <= hi[i];
  }
  EXPECT_LT(static_cast<double>(normal_inside) / static_cast<double>(total), 0.7);
}
