#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "relukit/algebra.hpp"
#include "relukit/network.hpp"

using namespace relukit;

namespace {

Network relu_identity() {
  return Network({{SparseMatrix::identity(1), {0.0}}, {SparseMatrix::identity(1), {0.0}}}, OutputActivation::identity);
}

Network random_net(std::mt19937_64& rng, std::vector<int> widths) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<Layer> layers;
  for (std::size_t j = 0; j + 1 < widths.size(); ++j) {
    std::vector<double> w(static_cast<std::size_t>(widths[j + 1]) * widths[j]);
    for (double& x : w) x = U(rng);
    std::vector<double> v(widths[j], 0.0);
    if (j > 0)
      for (double& x : v) x = 0.5 * U(rng);
    layers.push_back({SparseMatrix::from_dense(widths[j + 1], widths[j], w), v});
  }
  return Network(layers, OutputActivation::identity);
}

double relu(double x) { return std::max(x, 0.0); }

}  // namespace

TEST(Compose, IdentityWithIdentityIsRelu) {
  const Network h = compose(relu_identity(), relu_identity());
  for (double x : {-1.0, -0.2, 0.0, 0.3, 0.9}) EXPECT_DOUBLE_EQ(evaluate_scalar(h, x), relu(x));
}

TEST(Compose, DepthAdds) {
  std::mt19937_64 rng(1);
  EXPECT_EQ(compose(random_net(rng, {1, 3, 1}), random_net(rng, {1, 2, 1})).depth(), 3);
}

TEST(Compose, MatchesTwoStepEvaluation) {
  std::mt19937_64 rng(2);
  const Network f = random_net(rng, {2, 4, 3}), g = random_net(rng, {3, 5, 1});
  const Network h = compose(f, g);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x{U(rng), U(rng)};
    auto mid = evaluate(f, x);
    for (double& m : mid) m = relu(m);
    EXPECT_NEAR(evaluate(h, x)[0], evaluate(g, mid)[0], 1e-14);
  }
}

TEST(Compose, ShiftIsApplied) {
  const std::vector<double> v{0.25};
  const Network h = compose(relu_identity(), relu_identity(), v);
  EXPECT_DOUBLE_EQ(evaluate_scalar(h, 0.75), 0.5);
  EXPECT_EQ(evaluate_scalar(h, 0.1), 0.0);
}

TEST(Parallelize, Duplicates) {
  std::mt19937_64 rng(3);
  const Network f = random_net(rng, {1, 4, 2});
  const Network h = parallelize(f, f);
  for (double x : {0.0, 0.3, 0.8}) {
    const auto out = evaluate(h, std::vector<double>{x});
    const auto fo = evaluate(f, std::vector<double>{x});
    ASSERT_EQ(out.size(), 4u);
    EXPECT_DOUBLE_EQ(out[0], fo[0]);
    EXPECT_DOUBLE_EQ(out[2], fo[0]);
    EXPECT_DOUBLE_EQ(out[1], fo[1]);
    EXPECT_DOUBLE_EQ(out[3], fo[1]);
  }
}

TEST(Parallelize, WidthsAndSparsityAdd) {
  std::mt19937_64 rng(4);
  const Network f = random_net(rng, {2, 3, 4, 1}), g = random_net(rng, {2, 5, 2, 3});
  const Network h = parallelize(f, g);
  EXPECT_EQ(h.widths(), (std::vector<int>{2, 8, 6, 4}));
  EXPECT_EQ(sparsity(h), sparsity(f) + sparsity(g));
}

TEST(Parallelize, DepthMismatchThrows) {
  std::mt19937_64 rng(5);
  EXPECT_THROW(parallelize(random_net(rng, {1, 2, 1}), random_net(rng, {1, 2, 2, 1})), ShapeError);
}

TEST(DepthSynchronize, AddsLayersAndSparsity) {
  std::mt19937_64 rng(6);
  const Network f = random_net(rng, {1, 3, 1});
  const Network g = depth_synchronize(f, 2);
  EXPECT_EQ(g.depth(), f.depth() + 2);
  EXPECT_EQ(sparsity(g), sparsity(f) + 2);
  for (int i = 0; i < 1000; ++i) {
    const double x = i / 999.0;
    EXPECT_EQ(evaluate_scalar(g, x), evaluate_scalar(f, x));
  }
  EXPECT_EQ(evaluate_scalar(g, -0.4), evaluate_scalar(f, 0.0));
  EXPECT_THROW(depth_synchronize(f, 0), PreconditionError);
}

TEST(Embed, PaddingPreservesFunction) {
  std::mt19937_64 rng(7);
  const Network f = random_net(rng, {1, 2, 1});
  const Network g = embed(f, ArchitectureSpec{1, {1, 6, 1}, sparsity(f), OutputActivation::identity});
  EXPECT_EQ(g.widths(), (std::vector<int>{1, 6, 1}));
  EXPECT_EQ(sparsity(g), sparsity(f));
  EXPECT_TRUE(validate(g).ok());
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int t = 0; t < 1000; ++t) {
    const double x = U(rng);
    EXPECT_EQ(evaluate_scalar(g, x), evaluate_scalar(f, x));
  }
}

TEST(Embed, NarrowerTargetThrows) {
  std::mt19937_64 rng(8);
  const Network f = random_net(rng, {1, 4, 1});
  EXPECT_THROW(embed(f, ArchitectureSpec{1, {1, 3, 1}, 100, OutputActivation::identity}), PreconditionError);
}

TEST(RemoveInactive, DropsDeadUnit) {
  const std::vector<double> w0{1.0, 0.0, 0.5}, w1{1.0, 1.0, -1.0};
  const Network f({{SparseMatrix::from_dense(3, 1, w0), {0.0}}, {SparseMatrix::from_dense(1, 3, w1), {0.0, 0.0, 0.1}}},
                  OutputActivation::identity);
  const Network g = remove_inactive(f);
  EXPECT_EQ(g.widths()[1], 2);
  for (int i = 0; i < 1000; ++i) {
    const double x = -1.0 + 2.0 * i / 999.0;
    EXPECT_DOUBLE_EQ(evaluate_scalar(g, x), evaluate_scalar(f, x));
  }
  EXPECT_EQ(remove_inactive(g).widths(), g.widths());
}

TEST(RemoveInactive, DenseUnchangedAndWidthsBoundedBySparsity) {
  std::mt19937_64 rng(9);
  const Network f = random_net(rng, {2, 4, 3, 1});
  const Network g = remove_inactive(f);
  EXPECT_EQ(g.widths(), f.widths());
  for (std::size_t l = 1; l + 1 < g.widths().size(); ++l) EXPECT_LE(g.widths()[l], sparsity(g));
}

TEST(FullParamCount, HandValues) {
  EXPECT_EQ(full_param_count(ArchitectureSpec{1, {1, 2, 1}, 0, OutputActivation::identity}), 6);
  EXPECT_EQ(full_param_count(ArchitectureSpec{0, {4, 3}, 0, OutputActivation::identity}), 12);
}

TEST(ExtendNegative, EvenAndOdd) {
  const Network f = relu_identity();
  const Network even = extend_negative(f, +1, {0});
  const Network odd = extend_negative(f, -1, {0});
  EXPECT_EQ(sparsity(even), 2 * sparsity(f));
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    EXPECT_DOUBLE_EQ(evaluate_scalar(even, x), evaluate_scalar(f, x));
    EXPECT_DOUBLE_EQ(evaluate_scalar(even, -x), evaluate_scalar(even, x));
    EXPECT_DOUBLE_EQ(evaluate_scalar(odd, -x), -evaluate_scalar(odd, x));
  }
}

TEST(ScaleNet, Values) {
  EXPECT_DOUBLE_EQ(evaluate_scalar(scale_net(2.0), 0.3), 0.6);
  for (double C : {0.5, 2.0, 3.0, 1000.0}) EXPECT_EQ(evaluate_scalar(scale_net(C), -1.0), 0.0);
  const Network s3 = scale_net(3.0);
  EXPECT_DOUBLE_EQ(evaluate_scalar(s3, 1.0), 3.0);
  EXPECT_LE(validate(s3).max_abs_parameter, 1.0);
  EXPECT_THROW(scale_net(0.0), PreconditionError);
}

TEST(ScaleNet, Budgets) {
  for (double C : {2.0, 3.0, 10.0, 1000.0}) {
    const Network s = scale_net(C);
    const int lg = static_cast<int>(std::ceil(std::log2(C)));
    EXPECT_LE(s.depth(), 2 * lg - 1) << C;
    EXPECT_LE(sparsity(s), 4 * lg) << C;
    EXPECT_TRUE(validate(s).ok());
    for (double x : {0.0, 0.1, 0.5, 1.0}) EXPECT_NEAR(evaluate_scalar(s, x), C * x, 1e-12 * C);
  }
}

TEST(MultNet, TwoByTwoGrid) {
  const Network m = mult_net(10, 2);
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) {
      const double x = i / 100.0, y = j / 100.0;
      const double out = evaluate(m, std::vector<double>{x, y})[0];
      EXPECT_GE(out, 0.0);
      EXPECT_LE(out, 1.0);
      worst = std::max(worst, std::abs(out - x * y));
    }
  EXPECT_LE(worst, 9.0 * std::ldexp(1.0, -10));
}

TEST(MultNet, ZeroAbsorption) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int D : {2, 3, 5}) {
    const Network m = mult_net(8, D);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> x(D);
      for (double& v : x) v = U(rng);
      x[t % D] = 0.0;
      EXPECT_EQ(evaluate(m, x)[0], 0.0);
    }
  }
}

TEST(MultNet, OneFactorIsIdentity) {
  const Network m = mult_net(4, 1);
  for (int i = 0; i <= 100; ++i) EXPECT_DOUBLE_EQ(evaluate_scalar(m, i / 100.0), i / 100.0);
}

TEST(MultNet, ArchitectureBudgets) {
  for (int D : {2, 3, 4, 7})
    for (int eta : {4, 8, 12}) {
      const Network m = mult_net(eta, D);
      const double lg = std::ceil(std::log2(D));
      EXPECT_LE(m.depth(), (eta + 5) * lg);
      EXPECT_LE(m.max_hidden_width(), 6 * D);
      EXPECT_LE(sparsity(m), (eta + 5) * 126.0 * D * D * std::log2(D));
      EXPECT_TRUE(validate(m).ok());
    }
  EXPECT_THROW(mult_net(0, 2), PreconditionError);
  EXPECT_THROW(mult_net(4, 0), PreconditionError);
}

TEST(IdentityChain, ForwardsAndClamps) {
  const Network c = identity_chain(3, 2);
  EXPECT_EQ(c.depth(), 3);
  EXPECT_EQ(sparsity(c), 4 * 2);
  const auto out = evaluate(c, std::vector<double>{0.4, -0.3});
  EXPECT_DOUBLE_EQ(out[0], 0.4);
  EXPECT_EQ(out[1], 0.0);
}

TEST(Constructors, AllValidate) {
  for (const Network& n : {scale_net(7.0), mult_net(6, 3), identity_chain(2, 3), relu_identity()})
    EXPECT_TRUE(validate(n).ok());
}
