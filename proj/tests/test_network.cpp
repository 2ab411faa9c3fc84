#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "relukit/algebra.hpp"
#include "relukit/network.hpp"

using namespace relukit;

namespace {

Network identity_net() {
  return Network({{SparseMatrix::identity(1), {0.0}}, {SparseMatrix::identity(1), {0.0}}}, OutputActivation::identity);
}

Network doubling_block() {
  const std::vector<double> w0{1.0, 1.0}, w1{1.0, 1.0};
  return Network({{SparseMatrix::from_dense(2, 1, w0), {0.0}}, {SparseMatrix::from_dense(1, 2, w1), {0.0, 0.0}}},
                 OutputActivation::identity);
}

Network random_dense(std::mt19937_64& rng, std::vector<int> widths, double zero_prob) {
  std::uniform_real_distribution<double> U(-1.0, 1.0), P(0.0, 1.0);
  std::vector<Layer> layers;
  for (std::size_t j = 0; j + 1 < widths.size(); ++j) {
    std::vector<double> w(static_cast<std::size_t>(widths[j + 1]) * widths[j]);
    for (double& x : w) x = P(rng) < zero_prob ? 0.0 : U(rng);
    std::vector<double> v(widths[j], 0.0);
    if (j > 0)
      for (double& x : v) x = P(rng) < zero_prob ? 0.0 : U(rng);
    layers.push_back({SparseMatrix::from_dense(widths[j + 1], widths[j], w), v});
  }
  return Network(layers, OutputActivation::identity);
}

}  // namespace

TEST(Evaluate, IdentityPassesNonnegative) { EXPECT_DOUBLE_EQ(evaluate_scalar(identity_net(), 0.7), 0.7); }

TEST(Evaluate, IdentityKillsNegative) { EXPECT_EQ(evaluate_scalar(identity_net(), -0.3), 0.0); }

TEST(Evaluate, SoftmaxOfEqualLogits) {
  const std::vector<double> w{0.0, 0.0};
  const Network net({{SparseMatrix::from_dense(2, 1, w), {0.0}}}, OutputActivation::softmax);
  const auto out = evaluate(net, std::vector<double>{0.4});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0], 0.5);
  EXPECT_DOUBLE_EQ(out[1], 0.5);
}

TEST(Evaluate, BatchMatchesSingle) {
  std::mt19937_64 rng(3);
  const Network net = random_dense(rng, {2, 7, 5, 3}, 0.3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> xs(2 * 37);
  for (double& x : xs) x = U(rng);
  const auto batch = evaluate_batch(net, xs);
  for (int i = 0; i < 37; ++i) {
    const auto one = evaluate(net, std::span<const double>(xs.data() + 2 * i, 2));
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(batch[3 * i + k], one[k], 1e-14);
  }
}

TEST(Sparsity, AllZeroNet) {
  const Network net({{SparseMatrix(3, 1), {0.0}}, {SparseMatrix(1, 3), {0.0, 0.0, 0.0}}}, OutputActivation::identity);
  EXPECT_EQ(sparsity(net), 0);
}

TEST(Sparsity, DoublingBlockUsesFour) { EXPECT_EQ(sparsity(doubling_block()), 4); }

TEST(Sparsity, MatchesElementwiseScan) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const Network net = random_dense(rng, {3, 6, 4, 2}, 0.4);
    long long count = 0;
    for (const auto& layer : net.layers()) {
      for (double w : layer.W.to_dense()) count += w != 0.0;
      for (double v : layer.v) count += v != 0.0;
    }
    EXPECT_EQ(sparsity(net), count);
    EXPECT_LE(sparsity(net), full_param_count(architecture_of(net)));
  }
}

TEST(Validate, FlagsLargeWeight) {
  const std::vector<double> w{1.5};
  const Network net({{SparseMatrix::from_dense(1, 1, w), {0.0}}}, OutputActivation::identity);
  EXPECT_FALSE(validate(net).ok());
  EXPECT_DOUBLE_EQ(validate(net).max_abs_parameter, 1.5);
}

TEST(Validate, ScaleTwoIsValid) { EXPECT_TRUE(validate(scale_net(2.0)).ok()); }

TEST(Validate, FlagsNonzeroInputShift) {
  const Network net({{SparseMatrix::identity(1), {0.25}}, {SparseMatrix::identity(1), {0.0}}},
                    OutputActivation::identity);
  EXPECT_FALSE(validate(net).ok());
}

TEST(Serialize, RoundTripIsBitExact) {
  for (const Network& net : {scale_net(2.0), mult_net(6, 2)}) {
    const Network back = deserialize(serialize(net));
    ASSERT_EQ(back.widths(), net.widths());
    for (int j = 0; j <= net.depth(); ++j) {
      EXPECT_EQ(back.layer(j).W.to_dense(), net.layer(j).W.to_dense());
      EXPECT_EQ(back.layer(j).v, net.layer(j).v);
    }
    EXPECT_EQ(serialize(back), serialize(net));
  }
}

TEST(Serialize, CoordinateEncodingRoundTrips) {
  std::mt19937_64 rng(5);
  const Network net = random_dense(rng, {2, 9, 3}, 0.7);
  const Network back = deserialize(serialize(net, {MatrixEncoding::coordinate}));
  for (int j = 0; j <= net.depth(); ++j) EXPECT_EQ(back.layer(j).W.to_dense(), net.layer(j).W.to_dense());
}

TEST(Serialize, TruncatedDocumentIsParseError) {
  const std::string text = serialize(scale_net(2.0));
  EXPECT_THROW(deserialize(text.substr(0, text.size() / 2)), ParseError);
}

TEST(Serialize, StrictRejectsUnboundedParameters) {
  const std::vector<double> w{1.5};
  const Network net({{SparseMatrix::from_dense(1, 1, w), {0.0}}}, OutputActivation::identity);
  const std::string text = serialize(net);
  EXPECT_NO_THROW(deserialize(text, false));
  EXPECT_THROW(deserialize(text, true), ValidationError);
}

TEST(Network, ShapeMismatchThrows) {
  EXPECT_THROW(Network({{SparseMatrix(2, 1), {0.0}}, {SparseMatrix(1, 3), {0.0, 0.0, 0.0}}}, OutputActivation::identity),
               ShapeError);
}

TEST(Network, SoftmaxOutputsOnSimplex) {
  std::mt19937_64 rng(9);
  Network net = with_output(random_dense(rng, {1, 8, 4}, 0.2), OutputActivation::softmax);
  for (int i = 0; i <= 100; ++i) {
    const auto out = evaluate(net, std::vector<double>{i / 100.0});
    double s = 0.0;
    for (double v : out) {
      EXPECT_GT(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}
