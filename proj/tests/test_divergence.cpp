#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "relukit/divergence.hpp"
#include "relukit/numeric.hpp"
#include "relukit/svb.hpp"

using namespace relukit;

namespace {

CondProbFn constant_fn(std::vector<double> p) {
  CondProbFn f;
  f.K = static_cast<int>(p.size());
  f.eval = [p](std::span<const double>) { return p; };
  return f;
}

std::vector<double> random_simplex(std::mt19937_64& rng, int K) {
  std::exponential_distribution<double> E(1.0);
  std::vector<double> p(K);
  double s = 0.0;
  for (double& v : p) s += (v = E(rng));
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

TEST(KlTruncated, CapIsActive) {
  const std::vector<double> p{1.0, 0.0}, q{std::exp(-3.0), 1.0 - std::exp(-3.0)};
  int hits = 0;
  EXPECT_DOUBLE_EQ(kl_truncated_point(p, q, 2.0, &hits), 2.0);
  EXPECT_EQ(hits, 1);
  EXPECT_NEAR(kl_point(p, q), 3.0, 1e-12);
}

TEST(KlTruncated, UniformQ) {
  const std::vector<double> p{1.0, 0.0}, q{0.5, 0.5};
  EXPECT_NEAR(kl_truncated_point(p, q, 2.0), std::log(2.0), 1e-15);
}

TEST(KlTruncated, InfiniteCapIsKl) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_simplex(rng, 4), q = random_simplex(rng, 4);
    EXPECT_DOUBLE_EQ(kl_truncated_point(p, q, kInf), kl_point(p, q));
  }
}

TEST(KlTruncated, MonotoneInB) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_simplex(rng, 3), q = random_simplex(rng, 3);
    double prev = -kInf;
    for (double B : {2.0, 3.0, 5.0, 10.0, kInf}) {
      const double v = kl_truncated_point(p, q, B);
      EXPECT_GE(v, prev - 1e-15);
      prev = v;
    }
  }
}

TEST(Kl, ZeroQWithPositivePIsInfinite) {
  const std::vector<double> p{0.5, 0.5}, q{1.0, 0.0};
  EXPECT_EQ(kl_point(p, q), kInf);
  EXPECT_EQ(chi2(p, q), kInf);
  EXPECT_TRUE(std::isfinite(kl_truncated_point(p, q, 3.0)));
}

TEST(Chi2, HandValue) {
  const std::vector<double> p{1.0, 0.0}, q{0.5, 0.5};
  EXPECT_DOUBLE_EQ(chi2(p, q), 1.0);
}

TEST(Hellinger, DisjointSupportsGiveOne) {
  const std::vector<double> p{1.0, 0.0}, q{0.0, 1.0};
  EXPECT_DOUBLE_EQ(hellinger_sq(p, q), 1.0);
  EXPECT_EQ(hellinger_sq(p, p), 0.0);
}

TEST(Sandwich, RandomPairs) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 2000; ++t) {
    const auto p = random_simplex(rng, 2 + t % 4), q = random_simplex(rng, 2 + t % 4);
    EXPECT_TRUE(check_sandwich(p, q, 2.0 + t % 7).all());
  }
}

TEST(CrossEntropy, UniformAndZeroProbability) {
  LabeledSample data{1, 4, {0.1, 0.5, 0.9}, {0, 2, 3}};
  EXPECT_NEAR(ce_loss(constant_fn({0.25, 0.25, 0.25, 0.25}), data), std::log(4.0), 1e-15);
  EXPECT_EQ(ce_loss(constant_fn({0.5, 0.5, 0.0, 0.0}), data), kInf);
}

TEST(DeltaN, TwoCandidates) {
  LabeledSample data{1, 2, {0.2, 0.8}, {0, 0}};
  const CondProbFn a = constant_fn({0.5, 0.5}), b = constant_fn({0.8, 0.2});
  const std::vector<CondProbFn> cands{a, b};
  EXPECT_NEAR(delta_n(a, cands, data), std::log(0.8) - std::log(0.5), 1e-15);
  EXPECT_EQ(delta_n(b, cands, data), 0.0);
}

TEST(DTau, ClipsBelowTau) {
  const std::vector<double> f{0.01, 0.5}, g{0.02, 0.6};
  EXPECT_NEAR(d_tau(f, g, 2, 0.05), 0.1, 1e-15);
  EXPECT_NEAR(d_tau(f, g, 2, 0.0), 0.1, 1e-15);
  EXPECT_NEAR(d_tau(f, g, 1, 0.55), 0.05, 1e-15);
}

TEST(MomentLemma, RandomPairs) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 2000; ++t) {
    const auto p = random_simplex(rng, 3), q = random_simplex(rng, 3);
    EXPECT_TRUE(check_moment_lemma(p, q, 2.0 + t % 5, 2 + t % 4).holds);
  }
  const std::vector<double> p{0.5, 0.5};
  EXPECT_THROW(check_moment_lemma(p, p, 1.0, 2), PreconditionError);
}

TEST(EpsilonAid, HypothesisImpliesBounds) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.0, 2.0), E(0.01, 0.99);
  int active = 0;
  for (int t = 0; t < 5000; ++t) {
    const auto v = check_epsilon_aid(U(rng), U(rng), U(rng), U(rng), E(rng));
    active += v.hypothesis;
    EXPECT_TRUE(v.holds());
  }
  EXPECT_GT(active, 100);
}

TEST(FM, LimitsAndMidpoint) {
  EXPECT_EQ(f_m(1.0, 2), 2.0);
  EXPECT_EQ(f_m(1.0, 3), 0.0);
  EXPECT_NEAR(f_m(1.0 + 1e-6, 2), 2.0, 1e-5);
  const double u = 2.0;
  EXPECT_NEAR(f_m(u, 3), std::pow(std::log(u), 3) / (u - std::log(u) - 1.0), 1e-14);
  EXPECT_GT(f_m(1e-12, 2), 20.0);
  EXPECT_LT(f_m(1e12, 2), 1e-9);
  EXPECT_THROW(f_m(0.0, 2), PreconditionError);
}

TEST(RatePhi, HandValue) { EXPECT_NEAR(rate_phi(2, 100.0, 0.0, 1.0, 1), 0.4, 1e-15); }

TEST(InverseMoment, ConstantGivesK) {
  const auto r = inverse_moment_bound_check([](std::span<const double>) { return 1.0 / 3.0; }, 1, 0.01, 1.0, 1.0, 1000, 1);
  EXPECT_NEAR(r.estimate, 3.0, 1e-12);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_DOUBLE_EQ(r.bound, 1.0 - std::log(0.01));
}

TEST(InverseMoment, LinearP) {
  // E[1{X >= H}/X] = -log H for X uniform.
  const double H = 0.01;
  const auto r = inverse_moment_bound_check([](std::span<const double> x) { return x[0]; }, 1, H, 1.0, 1.0, 200000, 3);
  EXPECT_NEAR(r.estimate, -std::log(H), 4 * r.std_error);
  EXPECT_TRUE(r.holds);
}

TEST(Risk, MonteCarloMatchesQuadrature) {
  const CondProbFn p0 = p_alpha_family(1.0);
  const CondProbFn q = constant_fn({0.2, 0.3, 0.5});
  const auto quad = risk_quadrature(p0, q, kInf, 100000);
  const auto mc = risk_monte_carlo(p0, q, kInf, 200000, 11);
  EXPECT_GT(mc.std_error, 0.0);
  EXPECT_NEAR(mc.value, quad.value, 3 * mc.std_error);
  EXPECT_EQ(quad.std_error, 0.0);
}

TEST(Risk, LargeCapMatchesUncapped) {
  const CondProbFn p0 = p_alpha_family(0.5);
  const CondProbFn q = constant_fn({0.2, 0.3, 0.5});
  const auto a = risk_quadrature(p0, q, kInf, 20000), b = risk_quadrature(p0, q, 50.0, 20000);
  EXPECT_NEAR(a.value, b.value, 1e-14);
  EXPECT_EQ(b.truncation_hits, 0);
}

TEST(Risk, OnGridMatchesQuadratureForConstantQ) {
  const CondProbFn p0 = p_alpha_family(1.0);
  const int n = 1000;
  std::vector<double> xs(n), qv;
  for (int i = 0; i < n; ++i) {
    xs[i] = (i + 0.5) / n;
    for (double v : {0.2, 0.3, 0.5}) qv.push_back(v);
  }
  EXPECT_NEAR(risk_on_grid(p0, qv, xs, 4.0).value, risk_quadrature(p0, constant_fn({0.2, 0.3, 0.5}), 4.0, n).value,
              1e-13);
}

TEST(CheckLe, SlackIsRelative) {
  EXPECT_TRUE(check_le(1.0, 1.0).holds);
  EXPECT_TRUE(check_le(1.0 + 1e-14, 1.0).holds);
  EXPECT_FALSE(check_le(1.0 + 1e-9, 1.0).holds);
}
