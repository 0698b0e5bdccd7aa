#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "oneshot/adn.hpp"
#include "oneshot/stats.hpp"

using namespace oneshot;

namespace {

Matrix identity(std::size_t q) {
  Matrix m(q, std::vector<double>(q, 0.0));
  for (std::size_t i = 0; i < q; ++i) m[i][i] = 1.0;
  return m;
}

}  // namespace

TEST(AdnBuild, Validation) {
  EXPECT_THROW(build_p2p({0.5, 0.5}, {{0.9, 0.2}, {0.0, 1.0}}, 1), std::invalid_argument);
  EXPECT_THROW(build_p2p({0.5, 0.6}, identity(2), 1), std::invalid_argument);
  EXPECT_THROW(build_p2p({0.5, 0.5}, identity(2), 0), std::invalid_argument);
  EXPECT_THROW(adn_preset("nope"), std::invalid_argument);
  EXPECT_THROW(adn_preset("p2p", 0.6), std::invalid_argument);
  EXPECT_THROW(AdnScheme(build_p2p({0.25, 0.25, 0.25, 0.25}, identity(4), 4), 8),
               std::invalid_argument);

  AdnProblem pr = build_p2p({0.5, 0.5}, identity(2), 1);
  pr.spec.nodes.back().decode = {pr.spec.nodes.size() - 1};
  EXPECT_THROW(validate(pr), std::invalid_argument);
  AdnProblem pr2 = build_p2p({0.5, 0.5}, identity(2), 1);
  pr2.error = nullptr;
  EXPECT_THROW(validate(pr2), std::invalid_argument);
}

TEST(AdnBuild, PresetsValidate) {
  EXPECT_EQ(adn_preset_names().size(), 7u);
  for (const auto& n : adn_preset_names())
    for (std::size_t L : {1, 2}) {
      const auto p = adn_preset(n, 0.05, L);
      EXPECT_NO_THROW(validate(p.problem)) << n;
      const auto j = ideal_joint(p.problem);
      double total = 0.0;
      for (double v : j.prob) total += v;
      EXPECT_NEAR(total, 1.0, 1e-12) << n;
    }
}

TEST(AdnRun, NoiselessSingleMessageNeverFails) {
  AdnScheme s(build_p2p({0.5, 0.5}, identity(2), 1));
  const auto r = s.run(5000, 1);
  EXPECT_EQ(r.failure.mean, 0.0);
  EXPECT_NEAR(s.bound_total().value, 0.5, 1e-12);
}

TEST(AdnRun, NoiselessCodebookCollisions) {
  // With a random codebook over uniform X, a wrong message wins iff its mark
  // at the sent symbol beats the minimum of |X| marks of the true one:
  // P = (L-1) / (L-1+|X|).
  struct Case { std::size_t q, L; double p; };
  for (const Case c : {Case{2, 2, 1.0 / 3.0}, Case{4, 2, 0.2}, Case{4, 4, 3.0 / 7.0}}) {
    AdnScheme s(build_p2p(std::vector<double>(c.q, 1.0 / c.q), identity(c.q), c.L));
    const auto r = s.run(40000, 2);
    EXPECT_NEAR(r.failure.mean, c.p, 4.0 * r.failure.stderr_) << c.q << " " << c.L;
    EXPECT_LE(r.failure.mean, s.bound_total().value + 3.0 * r.failure.stderr_);
  }
}

TEST(AdnRun, WynerZivLosslessLimit) {
  // U = X with useless side information: the decoder errs iff the other
  // symbol's mark in the sent bin beats the min of L marks, P = 1/(L+1).
  const Matrix dist = {{0.0, 1.0}, {1.0, 0.0}};
  const Matrix useless = {{0.5, 0.5}, {0.5, 0.5}};
  const IndexMap z_of = {{0, 0}, {1, 1}};
  for (std::size_t L : {1, 3, 7}) {
    AdnScheme s(build_wyner_ziv({0.5, 0.5}, useless, identity(2), z_of, L, dist, 0.0));
    const auto r = s.run(40000, 3);
    EXPECT_NEAR(r.failure.mean, 1.0 / (L + 1.0), 4.0 * r.failure.stderr_) << L;
    EXPECT_LE(r.failure.mean, s.bound_total().value + 3.0 * r.failure.stderr_);
  }
}

TEST(AdnRun, Deterministic) {
  AdnScheme s(adn_preset("relay", 0.05).problem);
  const auto a = s.run(2000, 9), b = s.run(2000, 9);
  EXPECT_EQ(a.failure.mean, b.failure.mean);
  EXPECT_EQ(a.misdecodes, b.misdecodes);
  const auto t1 = s.run_trial(9, 17), t2 = s.run_trial(9, 17);
  EXPECT_EQ(t1.x, t2.x);
  EXPECT_EQ(t1.u, t2.u);
}

TEST(AdnRun, GenieFollowsIdealJoint) {
  for (const char* name : {"gelfand_pinsker", "mac", "cascade"}) {
    AdnScheme s(adn_preset(name, 0.1, 2).problem);
    const auto& J = s.joint();
    std::map<std::tuple<std::vector<Symbol>, std::vector<Symbol>, std::vector<Symbol>>, std::size_t> index;
    for (std::size_t r = 0; r < J.size(); ++r) {
      auto ys = J.ys(r), us = J.us(r), xs = J.xs(r);
      index[{{ys.begin(), ys.end()}, {us.begin(), us.end()}, {xs.begin(), xs.end()}}] = r;
    }
    std::vector<double> counts(J.size(), 0.0);
    for (uint64_t t = 0; t < 50000; ++t) {
      const auto o = s.run_trial(4, t, true);
      EXPECT_FALSE(o.misdecode);
      const auto it = index.find({o.y, o.u, o.x});
      ASSERT_NE(it, index.end()) << name;
      counts[it->second] += 1.0;
    }
    EXPECT_GT(chi_square_gof(counts, J.prob).p_value, 1e-3) << name;
  }
}

TEST(AdnBound, GenericMatchesCorollaries) {
  for (const auto& n : adn_preset_names()) {
    if (n == "cascade") continue;
    for (double noise : {0.02, 0.1, 0.3})
      for (std::size_t L : {1, 2, 3}) {
        const auto p = adn_preset(n, noise, L);
        EXPECT_NEAR(bound_total(p.problem).value, p.corollary, 1e-9) << n << " " << noise << " " << L;
      }
  }
  EXPECT_TRUE(std::isnan(adn_preset("cascade").corollary));
}

TEST(AdnBound, MacGammaUsesFirstEncoder) {
  // Noiseless Y = (X1, X2), quaternary inputs, L1 = L2 = 1:
  // gamma/16 + gamma/4 + 1/4 with gamma = ln 4 + 1.
  Matrix ch(16, std::vector<double>(16, 0.0));
  for (std::size_t i = 0; i < 16; ++i) ch[i][i] = 1.0;
  const std::vector<double> u(4, 0.25);
  const double g = std::log(4.0) + 1.0;
  const double expect = g / 16.0 + g / 4.0 + 0.25;
  EXPECT_NEAR(mac_corollary_bound(u, u, ch, 1, 1), expect, 1e-12);
  EXPECT_NEAR(bound_total(build_mac(u, u, ch, 1, 1)).value, expect, 1e-12);
}

TEST(AdnBound, MonteCarloAgreesWithExact) {
  for (const char* name : {"p2p", "relay", "broadcast"}) {
    AdnScheme s(adn_preset(name, 0.05, 1).problem);
    const auto exact = s.bound_total(0);
    const auto mc = s.bound_total(50000, 5);
    EXPECT_EQ(exact.stderr_, 0.0);
    EXPECT_GT(mc.stderr_, 0.0);
    EXPECT_NEAR(mc.value, exact.value, 4.0 * mc.stderr_ + 1e-12) << name;
  }
}

TEST(AdnBound, DominanceOnPresets) {
  for (const auto& n : adn_preset_names())
    for (std::size_t L : {1, 2}) {
      AdnScheme s(adn_preset(n, 0.05, L).problem);
      const auto r = s.run(5000, 6);
      EXPECT_LE(r.failure.mean, s.bound_total().value + 3.0 * r.failure.stderr_) << n << " " << L;
    }
}

TEST(AdnBound, BTermsNonNegative) {
  AdnScheme s(adn_preset("cascade", 0.05, 2).problem);
  const auto& spec = s.problem().spec;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i)
    for (std::size_t j = 0; j < spec.nodes[i].unique; ++j)
      for (std::size_t a = 0; a < s.joint().size(); a += 7) EXPECT_GE(s.bound_B(i, j, a), 0.0);
}
