#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "relukit/entropy.hpp"
#include "relukit/errors.hpp"

using namespace relukit;

namespace {

// Smallest k such that some k functions of the class cover it, by enumerating subsets.
int brute_covering(const ToyClass& c, double radius, double tau) {
  const int n = static_cast<int>(c.values.size());
  auto dist = [&](int i, int j) {
    double d = 0.0;
    for (std::size_t t = 0; t < c.values[i].size(); ++t)
      d = std::max(d, std::abs(std::max(tau, c.values[i][t]) - std::max(tau, c.values[j][t])));
    return d;
  };
  int best = n;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    const int k = __builtin_popcount(mask);
    if (k >= best) continue;
    bool covers = true;
    for (int j = 0; j < n && covers; ++j) {
      bool hit = false;
      for (int i = 0; i < n && !hit; ++i) hit = ((mask >> i) & 1u) && dist(i, j) <= radius;
      covers = hit;
    }
    if (covers) best = k;
  }
  return best;
}

}  // namespace

TEST(CoveringBound, HandValues) {
  const EntropyBound b = covering_bound(ArchitectureSpec{1, {1, 2, 1}, 4, OutputActivation::identity}, 1, 1.0);
  EXPECT_DOUBLE_EQ(b.V, 12.0);
  EXPECT_NEAR(b.log_raw, 5.0 * std::log(1152.0), 1e-12);
  EXPECT_NEAR(b.raw, std::pow(1152.0, 5), 1e-12 * std::pow(1152.0, 5));
  EXPECT_TRUE(b.hidden_widths_le_s);
}

TEST(CoveringBound, VIsWidthProduct) {
  const std::vector<int> widths{3, 7, 5, 9, 2};
  const EntropyBound b = covering_bound(ArchitectureSpec{3, widths, 40, OutputActivation::softmax}, 2, 0.1);
  double V = 1.0;
  for (int m : widths) V *= m + 1;
  EXPECT_NEAR(b.V, V, 1e-9 * V);
  EXPECT_EQ(b.d, 3);
}

TEST(CoveringBound, MonotoneInDelta) {
  const ArchitectureSpec arch{2, {1, 4, 4, 3}, 20, OutputActivation::softmax};
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {1e-4, 1e-2, 0.5, 1.0}) {
    const double v = covering_bound(arch, 3, delta).log_raw;
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(CoveringBound, SubstitutionDominatesWhenWidthsBounded) {
  for (long long s : {6LL, 20LL, 200LL}) {
    const ArchitectureSpec arch{2, {1, 5, 6, 3}, s, OutputActivation::softmax};
    const EntropyBound b = covering_bound(arch, 3, 0.01);
    ASSERT_TRUE(b.hidden_widths_le_s);
    EXPECT_LE(b.log_raw, b.log_substituted);
  }
}

TEST(CoveringBound, OverflowKeepsLogFinite) {
  const EntropyBound b = covering_bound(ArchitectureSpec{10, std::vector<int>(12, 50), 5000, OutputActivation::identity}, 3, 1e-3);
  EXPECT_TRUE(std::isinf(b.raw));
  EXPECT_TRUE(std::isfinite(b.log_raw));
}

TEST(CoveringBound, BadArguments) {
  EXPECT_THROW(covering_bound(ArchitectureSpec{2, {1, 2, 1}, 4, OutputActivation::identity}, 1, 1.0), ShapeError);
  EXPECT_THROW(covering_bound(ArchitectureSpec{1, {1, 2, 1}, 4, OutputActivation::identity}, 1, 0.0), PreconditionError);
}

TEST(CoveringNumber, MatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ToyClass c = random_toy_class(10, 3, 2, seed);
    for (double radius : {0.3, 0.8, 1.5})
      for (double tau : {0.0, 0.5}) EXPECT_EQ(covering_number(c, radius, tau), brute_covering(c, radius, tau));
  }
}

TEST(CoveringNumber, SingletonAndZeroRadius) {
  const ToyClass toy = toy_step_class();
  const ToyClass single{4, 1, {toy.values[0]}};
  EXPECT_EQ(covering_number(single, 0.0, 0.1), 1);
  EXPECT_EQ(covering_number(toy, 0.0, 0.0), 8);
  EXPECT_EQ(covering_number(toy, 100.0, 0.0), 1);
}

TEST(Reduction, HoldsOnToyClasses) {
  const ToyClass toy = toy_step_class();
  for (double delta : {0.05, 0.5, 2.0})
    for (double tau : {0.05, 0.2, 1.0}) {
      const ReductionRecord r = covering_reduction_bound(delta, tau, &toy);
      EXPECT_TRUE(r.holds) << delta << ' ' << tau << ' ' << r.lhs_exact << ' ' << r.rhs_exact;
    }
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ToyClass c = random_toy_class(10, 8, 1, seed);
    for (double delta : {0.1, 0.5, 1.0}) EXPECT_TRUE(covering_reduction_bound(delta, 0.3, &c).holds);
  }
}

TEST(Reduction, SingletonCountsOne) {
  const ToyClass toy = toy_step_class();
  const ToyClass single{4, 1, {toy.values[3]}};
  const ReductionRecord r = covering_reduction_bound(0.1, 0.5, &single);
  EXPECT_EQ(r.lhs_exact, 1);
  EXPECT_EQ(r.rhs_exact, 1);
}

TEST(Reduction, DescriptionWithoutToy) {
  const ReductionRecord r = covering_reduction_bound(0.5, 0.2, nullptr);
  EXPECT_EQ(r.lhs_exact, -1);
  EXPECT_NE(r.lhs.find("log G"), std::string::npos);
  EXPECT_THROW(covering_reduction_bound(0.5, 0.0), PreconditionError);
}
