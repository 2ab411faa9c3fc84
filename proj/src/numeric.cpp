#include "relukit/numeric.hpp"

#include "relukit/errors.hpp"

namespace relukit {

double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

std::vector<double> dirichlet(int K, double a, std::mt19937_64& rng) {
  if (K < 1 || !(a > 0.0)) throw PreconditionError("dirichlet needs K >= 1 and a > 0");
  std::gamma_distribution<double> gamma(a, 1.0);
  std::vector<double> p(K);
  double sum = 0.0;
  // Small concentrations can underflow every coordinate; redraw in that case.
  do {
    sum = 0.0;
    for (double& v : p) sum += (v = gamma(rng));
  } while (!(sum > 0.0));
  for (double& v : p) v /= sum;
  return p;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("least_squares needs at least two matching points");
  if (!w.empty() && w.size() != x.size()) throw ShapeError("weights do not match data");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - mx) * (x[i] - mx);
    sxy += wi * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("least_squares: x values are all equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace relukit
