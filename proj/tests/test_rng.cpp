#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "oneshot/rng.hpp"
#include "oneshot/stats.hpp"

using namespace oneshot;

TEST(Philox, KnownAnswer) {
  // Random123 known-answer vectors for philox4x32-10.
  auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(zero[0], 0x6627e8d5u);
  EXPECT_EQ(zero[1], 0xe169c58du);
  EXPECT_EQ(zero[2], 0xbc57ac4cu);
  EXPECT_EQ(zero[3], 0x9b00dbd8u);
  auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                         {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(ones[0], 0x408f276du);
  EXPECT_EQ(ones[1], 0x41c83b0eu);
  EXPECT_EQ(ones[2], 0xa20bc7c6u);
  EXPECT_EQ(ones[3], 0x6d5451fdu);
  auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                       {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(pi[0], 0xd16cfe09u);
  EXPECT_EQ(pi[1], 0x94fdccebu);
  EXPECT_EQ(pi[2], 0x5001e420u);
  EXPECT_EQ(pi[3], 0x24126ea1u);
}

TEST(SeededStream, SameSeedSameSequence) {
  SeededStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs |= x != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(SeededStream, JumpToMatchesSequentialDraws) {
  SeededStream seq(3, 1);
  std::vector<double> draws;
  for (int i = 0; i < 10; ++i) draws.push_back(seq.exp());
  SeededStream j(3, 1);
  j.jump_to(0);
  EXPECT_EQ(j.exp(), draws[0]);
  j.jump_to(5);
  EXPECT_EQ(j.exp(), draws[5]);
  EXPECT_EQ(jump_to(j, 9).exp(), draws[9]);
}

TEST(SeededStream, CounterAccounting) {
  SeededStream s(1, 2);
  s.uniform();
  EXPECT_EQ(s.counter(), 1u);
  s.exp();
  EXPECT_EQ(s.counter(), 2u);
  s.normal();
  EXPECT_EQ(s.counter(), 3u);
}

TEST(SeededStream, JumpCostIndependentOfK) {
  SeededStream s(9, 9);
  auto time_jumps = [&](uint64_t k) {
    const auto t0 = std::chrono::steady_clock::now();
    double acc = 0;
    for (int i = 0; i < 20000; ++i) acc += s.jump_to(k + i).uniform();
    EXPECT_GT(acc, 0.0);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const double small = time_jumps(0);
  const double large = time_jumps(uint64_t{1} << 60);
  EXPECT_LT(large, 5.0 * small + 0.01);
}

TEST(DrawExp, MeanAndTail) {
  SeededStream s(11, 0);
  const int n = 1000000;
  RunningStats st;
  int over3 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = draw_exp(s);
    ASSERT_GT(x, 0.0);
    ASSERT_TRUE(std::isfinite(x));
    st.add(x);
    over3 += x > 3.0;
  }
  EXPECT_NEAR(st.mean(), 1.0, 0.01);
  EXPECT_NEAR(static_cast<double>(over3) / n, 0.049787068, 0.002);
}

TEST(DrawGammaTrunc01, CdfAtHalf) {
  // gamma(1/2, 1/2) / gamma(1/2, 1) = erf(sqrt(1/2)) / erf(1).
  SeededStream s(12, 0);
  const int n = 1000000;
  int below = 0;
  uint64_t attempts_total = 0;
  for (int i = 0; i < n; ++i) {
    uint64_t attempts = 0;
    const double v = draw_gamma_trunc01(s, 0.5, &attempts);
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    below += v <= 0.5;
    attempts_total += attempts;
  }
  EXPECT_NEAR(static_cast<double>(below) / n, 0.8101208612, 0.005);
  // Acceptance rate gamma(s, 1) / Gamma(s) = erf(1) at s = 1/2.
  EXPECT_NEAR(static_cast<double>(n) / attempts_total, 0.8427007929, 0.005);
}

TEST(DrawGammaTrunc01, OtherShapeCdf) {
  // shape 1/3: P(V <= 0.2) = P(1/3, 0.2) / P(1/3, 1), regularized gamma.
  SeededStream s(13, 0);
  const int n = 200000;
  int below = 0;
  for (int i = 0; i < n; ++i) below += s.gamma_trunc01(1.0 / 3.0) <= 0.2;
  EXPECT_NEAR(static_cast<double>(below) / n, 0.6899708391, 0.005);
}

TEST(DrawGammaTrunc01, RejectsBadShape) {
  SeededStream s;
  EXPECT_THROW(s.gamma_trunc01(0.0), std::invalid_argument);
  EXPECT_THROW(s.gamma_trunc01(1.0), std::invalid_argument);
  EXPECT_THROW(s.gamma(-1.0), std::invalid_argument);
}

TEST(DrawGaussianVec, MeanWithinFourSigma) {
  SeededStream s(14, 0);
  const std::vector<double> mean = {1.0, -2.0, 0.5};
  const double var = 4.0;
  const int n = 100000;
  std::vector<RunningStats> st(3);
  for (int i = 0; i < n; ++i) {
    const auto v = draw_gaussian_vec(s, 3, mean, var);
    for (int j = 0; j < 3; ++j) st[j].add(v[j]);
  }
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(st[j].mean(), mean[j], 4.0 * std::sqrt(var / n));
    EXPECT_NEAR(st[j].variance(), var, 0.05 * var);
  }
}

TEST(DrawSphereUniform, UnitNormAndCentered) {
  SeededStream s(15, 0);
  const int n = 100000;
  std::vector<RunningStats> st(3);
  for (int i = 0; i < n; ++i) {
    const auto v = draw_sphere_uniform(s, 3);
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    ASSERT_NEAR(norm, 1.0, 1e-12);
    for (int j = 0; j < 3; ++j) st[j].add(v[j]);
  }
  // Var of a coordinate on S^2 is 1/3.
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(st[j].mean(), 0.0, 4.0 * std::sqrt(1.0 / 3.0 / n));
}

TEST(DrawDims, ZeroDimensionRejected) {
  SeededStream s;
  EXPECT_THROW(draw_sphere_uniform(s, 0), std::invalid_argument);
  EXPECT_THROW(draw_gaussian_vec(s, 0, {}, 1.0), std::invalid_argument);
  const std::vector<double> m = {0.0};
  EXPECT_THROW(draw_gaussian_vec(s, 2, m, 1.0), std::invalid_argument);
  EXPECT_THROW(draw_gaussian_vec(s, 1, m, 0.0), std::invalid_argument);
}

TEST(Substreams, Uncorrelated) {
  SeededStream a(5, derive(1, 2)), b(5, derive(1, 3));
  const int n = 1000000;
  double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform(), y = b.uniform();
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Below, RangeAndUniformity) {
  SeededStream s(16, 0);
  std::vector<double> counts(6, 0.0);
  for (int i = 0; i < 60000; ++i) {
    const auto v = s.below(6);
    ASSERT_LT(v, 6u);
    counts[v] += 1.0;
  }
  const std::vector<double> p(6, 1.0 / 6.0);
  EXPECT_GT(chi_square_gof(counts, p).p_value, 1e-3);
  EXPECT_THROW(s.below(0), std::invalid_argument);
}
