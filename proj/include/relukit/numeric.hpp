#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace relukit {

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

/// Symmetric Dirichlet(a) draw of length K.
std::vector<double> dirichlet(int K, double a, std::mt19937_64& rng);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Weighted least squares y ~ intercept + slope x. Unit weights when `w` is empty.
LinearFit least_squares(std::span<const double> x, std::span<const double> y, std::span<const double> w = {});

}  // namespace relukit
