#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qmeter/rng.hpp"
#include "qmeter/stats.hpp"

namespace qmeter {
namespace {

TEST(PairwiseSum, MatchesExtendedPrecision) {
  std::vector<double> v(10001);
  long double ref = 0.0L;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = 1.0 + 1e-3 * std::sin(double(i));
    ref += v[i];
  }
  EXPECT_NEAR(pairwise_sum(v), double(ref), 1e-9);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
  EXPECT_EQ(pairwise_sum(std::vector<double>{3.5}), 3.5);
}

TEST(NormalCdf, AnchorsAndSymmetry) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
  EXPECT_NEAR(normal_cdf(-1.959963984540054), 0.025, 1e-12);
  RandomStream rs(3, 0);
  for (int i = 0; i < 100; ++i) {
    const double x = 8.0 * (rs.next_unit() - 0.5);
    EXPECT_NEAR(normal_cdf(x) + normal_cdf(-x), 1.0, 1e-15);
  }
}

TEST(KolmogorovTail, AlternatingSeriesBracket) {
  // 2(e^{-2 l^2} - e^{-8 l^2}) <= Q(l) <= 2 e^{-2 l^2} for the alternating
  // series, and Q is monotone decreasing.
  double prev = 1.0;
  for (double l : {0.4, 0.6, 0.8, 1.0, 1.2, 1.5, 2.0}) {
    const double q = kolmogorov_tail(l);
    const double head = 2.0 * std::exp(-2.0 * l * l);
    EXPECT_LE(q, head + 1e-15);
    EXPECT_GE(q, head - 2.0 * std::exp(-8.0 * l * l) - 1e-15);
    EXPECT_LT(q, prev);
    prev = q;
  }
  EXPECT_EQ(kolmogorov_tail(1e-9), 1.0);
  EXPECT_LT(kolmogorov_tail(3.0), 1e-7);
}

TEST(KsTest, AcceptsTheTrueDistributionAndRejectsAShift) {
  RandomStream rs(5, 0);
  std::vector<double> u(5000);
  for (double& x : u) x = rs.next_unit();
  auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const KsResult good = ks_test(u, uniform_cdf);
  EXPECT_GE(good.p_value, 0.01);

  for (double& x : u) x *= 0.9;  // compressed support
  const KsResult bad = ks_test(std::move(u), uniform_cdf);
  EXPECT_LT(bad.p_value, 1e-6);
  EXPECT_GT(bad.statistic, good.statistic);

  EXPECT_THROW(ks_test({1.0, 2.0, 3.0}, uniform_cdf), std::invalid_argument);
}

TEST(KsTwoSample, SeparatesShiftedSamples) {
  RandomStream ra(8, 0), rb(9, 0);
  std::vector<double> a(4000), b(4000), c(4000);
  for (double& x : a) x = normal(ra);
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = normal(rb);
    c[i] = b[i] + 0.5;
  }
  EXPECT_GE(ks_two_sample(a, b).p_value, 0.01);
  EXPECT_LT(ks_two_sample(std::move(a), std::move(c)).p_value, 1e-6);
  EXPECT_THROW(ks_two_sample({1.0, 2.0}, {3.0, 4.0}), std::invalid_argument);
}

TEST(LinearFit, ExactOnALineAndValidated) {
  const std::vector<double> x = {-1.0, 0.0, 2.0, 5.0, 9.5};
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.0 * x[i] - 2.0;
  const LinearFit f = linear_fit(x, y);
  EXPECT_NEAR(f.slope, 3.0, 1e-12);
  EXPECT_NEAR(f.intercept, -2.0, 1e-12);
  EXPECT_THROW(linear_fit(x, std::vector<double>(3)), std::invalid_argument);
  EXPECT_THROW(linear_fit(std::vector<double>{1.0}, std::vector<double>{1.0}),
               std::invalid_argument);
}

TEST(MomentMatrix, HandComputedSample) {
  // four observations of (x, y) split over two blocks
  MomentMatrix m(2, 2);
  const double data[4][2] = {{1, 2}, {3, 5}, {4, 7}, {10, 11}};
  for (int i = 0; i < 4; ++i)
    MomentMatrix::accumulate(m.block_slot(i / 2), data[i], 2);
  m.finalize();
  EXPECT_EQ(m.n_quantities(), 2u);
  EXPECT_DOUBLE_EQ(m.n(), 4.0);
  EXPECT_DOUBLE_EQ(m.mean(0), 4.5);
  EXPECT_DOUBLE_EQ(m.mean(1), 6.25);
  EXPECT_DOUBLE_EQ(m.var(0), 15.0);              // (126 - 81)/3
  EXPECT_DOUBLE_EQ(m.var(1), 14.25);             // (199 - 156.25)/3
  EXPECT_DOUBLE_EQ(m.cov(0, 1), 42.5 / 3.0);     // (155 - 112.5)/3
  EXPECT_DOUBLE_EQ(m.cov(0, 1), m.cov(1, 0));
  EXPECT_DOUBLE_EQ(m.se_mean(0), std::sqrt(15.0 / 4.0));
  const std::vector<double> diff = {1.0, -1.0};
  EXPECT_NEAR(m.var_of_combination(diff), 15.0 + 14.25 - 2.0 * 42.5 / 3.0,
              1e-12);
  EXPECT_NEAR(m.se_of_combination(diff),
              std::sqrt((15.0 + 14.25 - 2.0 * 42.5 / 3.0) / 4.0), 1e-12);
}

TEST(MomentMatrix, VarianceIsClampedNonnegative) {
  // constant data: cancellation may drive the raw variance slightly negative
  MomentMatrix m(1, 1);
  const double x = 0.1;
  for (int i = 0; i < 1000; ++i) MomentMatrix::accumulate(m.block_slot(0), &x, 1);
  m.finalize();
  EXPECT_GE(m.var(0), 0.0);
  EXPECT_LT(m.var(0), 1e-12);
  EXPECT_NEAR(m.mean(0), 0.1, 1e-12);
}

TEST(MomentMatrix, BlockPartitionIsOnlyARoundingDetail) {
  // The same sample accumulated under different block partitions must agree
  // to rounding; bit-identity is only promised for a fixed partition.
  RandomStream rs(77, 0);
  std::vector<double> x(1024);
  for (double& v : x) v = normal(rs);

  auto summarize = [&](std::size_t n_blocks) {
    MomentMatrix m(1, n_blocks);
    const std::size_t per = x.size() / n_blocks;
    for (std::size_t i = 0; i < x.size(); ++i)
      MomentMatrix::accumulate(m.block_slot(i / per), &x[i], 1);
    m.finalize();
    return std::pair{m.mean(0), m.var(0)};
  };

  const auto [m1, v1] = summarize(1);
  const auto [m4, v4] = summarize(4);
  const auto [m8, v8] = summarize(8);
  EXPECT_NEAR(m4, m1, 1e-12);
  EXPECT_NEAR(m8, m1, 1e-12);
  EXPECT_NEAR(v4, v1, 1e-12);
  EXPECT_NEAR(v8, v1, 1e-12);

  // replaying the same partition reproduces the same bits
  const auto [m4b, v4b] = summarize(4);
  EXPECT_EQ(m4, m4b);
  EXPECT_EQ(v4, v4b);
}

}  // namespace
}  // namespace qmeter
