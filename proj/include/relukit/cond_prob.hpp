#pragma once

#include <functional>
#include <span>
#include <vector>

#include "relukit/network.hpp"

namespace relukit {

/// x in [0,1]^d -> probability vector of length K.
struct CondProbFn {
  int d = 1;
  int K = 1;
  std::function<std::vector<double>(std::span<const double>)> eval;

  std::vector<double> operator()(std::span<const double> x) const { return eval(x); }
  std::vector<double> operator()(double x) const { return eval(std::span<const double>(&x, 1)); }
};

/// Wraps a softmax-output network.
CondProbFn network_prob_fn(Network net);

/// Max of |sum - 1| and the most negative entry (0 when on the simplex).
double simplex_defect(std::span<const double> p);

/// n evenly spaced points i/(n-1), i = 0..n-1.
std::vector<double> uniform_grid(int n);

}  // namespace relukit
