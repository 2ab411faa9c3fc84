#include <gtest/gtest.h>

#include <cmath>

#include "relukit/cond_prob.hpp"
#include "relukit/errors.hpp"
#include "relukit/svb.hpp"

using namespace relukit;

namespace {

CondProbFn constant_third() {
  CondProbFn f;
  f.K = 3;
  f.eval = [](std::span<const double>) { return std::vector<double>(3, 1.0 / 3.0); };
  return f;
}

}  // namespace

TEST(PAlpha, HandValues) {
  const CondProbFn p = p_alpha_family(1.0);
  const auto a = p(0.2);
  EXPECT_DOUBLE_EQ(a[0], 0.2);
  EXPECT_DOUBLE_EQ(a[1], 1.0 / 3.0);
  EXPECT_NEAR(a[2], 7.0 / 15.0, 1e-15);
  for (double v : p(1.0)) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p_alpha_family(0.5)(0.25)[0], 1.0 / 16.0, 1e-15);
  EXPECT_THROW(p_alpha_family(0.0), PreconditionError);
}

TEST(PAlpha, OnSimplex) {
  for (double alpha : {0.25, 0.5, 1.0, 2.0}) {
    const CondProbFn p = p_alpha_family(alpha);
    for (double x : uniform_grid(100000)) ASSERT_LT(simplex_defect(p(x)), 1e-15);
  }
}

TEST(PAlpha, LimitZeroIsPointwiseLimit) {
  const auto lim = p_alpha_limit_zero()(0.5);
  const auto near = p_alpha_family(1e-3)(0.5);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(near[k], lim[k], 1e-12);
}

TEST(PAlpha, HolderRadius) {
  EXPECT_NEAR(p_alpha_holder_radius(1.0), 5.0 / 3.0, 1e-15);
  EXPECT_NEAR(p_alpha_holder_radius(0.0), 2.0 / 3.0, 1e-15);
  // Finite-difference slope of x^{1/alpha} near where it reaches 1/3.
  const double alpha = 0.5, x = std::pow(1.0 / 3.0, alpha), h = 1e-7;
  const double slope = (std::pow(x, 1.0 / alpha) - std::pow(x - h, 1.0 / alpha)) / h;
  EXPECT_NEAR(p_alpha_holder_radius(alpha), 2.0 / 3.0 + slope, 1e-5);
  EXPECT_THROW(p_alpha_holder_radius(1.5), PreconditionError);
}

TEST(SvbFit, RecoversExponent) {
  const auto grid = default_t_grid();
  for (double alpha : {0.5, 1.0}) {
    const SvbEstimate e = svb_fit(p_alpha_family(alpha), uniform_sampler(), 0, grid, 1000000, 9);
    ASSERT_EQ(e.status, SvbFitStatus::ok);
    EXPECT_NEAR(e.alpha_hat, alpha, 0.05);
    EXPECT_NEAR(e.C_hat, 1.0, 0.1);
  }
}

TEST(SvbFit, ConstantIsUnbounded) {
  const auto grid = default_t_grid();
  const SvbEstimate e = svb_fit(constant_third(), uniform_sampler(), 0, grid, 10000, 1);
  EXPECT_EQ(e.status, SvbFitStatus::unbounded);
  EXPECT_TRUE(std::isinf(e.alpha_hat));
}

TEST(SvbFit, MassAtZero) {
  const auto grid = default_t_grid();
  const SvbEstimate e = svb_fit(p_alpha_limit_zero(), uniform_sampler(), 0, grid, 10000, 1);
  EXPECT_EQ(e.status, SvbFitStatus::zero_exponent);
  EXPECT_EQ(e.alpha_hat, 0.0);
}

TEST(SvbFit, TailIsMonotone) {
  const auto grid = default_t_grid();
  const SvbEstimate e = svb_fit(p_alpha_family(1.0), uniform_sampler(), 0, grid, 100000, 4);
  for (std::size_t i = 1; i < e.tail.size(); ++i) EXPECT_GE(e.tail[i], e.tail[i - 1]);
  EXPECT_DOUBLE_EQ(e.tail.back(), 1.0);
}

// The constant class p_2 = 1/3 forces C t^alpha >= 1 at t = 1/3, hence C = 3.
TEST(SvbVerify, PassAndFail) {
  const auto grid = default_t_grid();
  const SvbVerdict ok = svb_verify(p_alpha_family(1.0), uniform_sampler(), 1.0, 3.0, grid, 200000, 2);
  EXPECT_TRUE(ok.pass) << ok.worst_excess;
  const SvbVerdict bad = svb_verify(p_alpha_family(1.0), uniform_sampler(), 2.0, 3.0, grid, 200000, 2);
  EXPECT_FALSE(bad.pass);
  EXPECT_EQ(bad.worst_k, 0);
  EXPECT_GT(bad.worst_excess, 0.0);
}

TEST(SvbVerify, SmallerExponentIsWeaker) {
  const auto grid = default_t_grid();
  const CondProbFn p = p_alpha_family(1.0);
  double prev = -1.0;
  for (double alpha : {1.0, 0.75, 0.5, 0.25, 0.0}) {
    const SvbVerdict v = svb_verify(p, uniform_sampler(), alpha, 3.0, grid, 100000, 5);
    EXPECT_TRUE(v.pass) << alpha;
    if (prev > -1.0) EXPECT_LE(v.worst_excess, prev + 1e-15);
    prev = v.worst_excess;
  }
}

TEST(SvbVerify, RejectsBadGrid) {
  const std::vector<double> grid{0.0, 0.5};
  EXPECT_THROW(svb_verify(p_alpha_family(1.0), uniform_sampler(), 1.0, 1.0, grid, 100, 1), PreconditionError);
  EXPECT_THROW(svb_verify(p_alpha_family(1.0), uniform_sampler(2), 1.0, 1.0, default_t_grid(), 100, 1), ShapeError);
}
