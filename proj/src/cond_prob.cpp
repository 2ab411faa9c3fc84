#include "relukit/cond_prob.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "relukit/errors.hpp"

namespace relukit {

CondProbFn network_prob_fn(Network net) {
  if (net.output() != OutputActivation::softmax) throw PreconditionError("network_prob_fn: network needs softmax output");
  auto shared = std::make_shared<const Network>(std::move(net));
  CondProbFn fn;
  fn.d = shared->input_width();
  fn.K = shared->output_width();
  fn.eval = [shared](std::span<const double> x) { return evaluate(*shared, x); };
  return fn;
}

double simplex_defect(std::span<const double> p) {
  double sum = 0.0, worst = 0.0;
  for (double v : p) {
    sum += v;
    worst = std::max(worst, -v);
  }
  return std::max(worst, std::abs(sum - 1.0));
}

std::vector<double> uniform_grid(int n) {
  if (n < 2) throw PreconditionError("uniform_grid needs at least two points");
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = static_cast<double>(i) / (n - 1);
  return xs;
}

}  // namespace relukit
