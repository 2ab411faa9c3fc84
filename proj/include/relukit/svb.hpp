#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "relukit/cond_prob.hpp"

namespace relukit {

/// Draws one input point of dimension d.
struct Sampler {
  int d = 1;
  std::function<void(std::mt19937_64&, std::span<double>)> draw;
};
Sampler uniform_sampler(int d = 1);

/// p_1 = min(x^{1/alpha}, 1/3), p_2 = 1/3, p_3 = 2/3 - p_1.
CondProbFn p_alpha_family(double alpha);
/// Pointwise alpha -> 0 limit (0, 1/3, 2/3).
CondProbFn p_alpha_limit_zero();
/// sup-norm plus Lipschitz constant of the family's coordinates, the beta = 1 Hölder radius; alpha in [0, 1].
double p_alpha_holder_radius(double alpha);

/// 30 log-spaced points in [1e-4, 1].
std::vector<double> default_t_grid();

enum class SvbFitStatus { ok, unbounded, zero_exponent, undefined };

struct SvbEstimate {
  double alpha_hat = 0.0;
  double C_hat = 0.0;
  SvbFitStatus status = SvbFitStatus::undefined;
  std::vector<double> t_grid;
  std::vector<double> tail;  // empirical P(p_k(X) <= t)
  long long samples = 0;
};

/// Weighted log-log fit of the empirical tail over grid points t <= fit_max_t.
SvbEstimate svb_fit(const CondProbFn& p, const Sampler& sampler, int k, std::span<const double> t_grid, long long n,
                    std::uint64_t seed, double fit_max_t = 0.1);

struct SvbVerdict {
  bool pass = true;
  int worst_k = 0;
  double worst_t = 0.0;
  double worst_excess = 0.0;  // max of tail - (C t^alpha + 3 SE); positive means failure
};

/// Checks P(p_k <= t) <= C t^alpha + 3 SE for all t in the grid and all k.
SvbVerdict svb_verify(const CondProbFn& p, const Sampler& sampler, double alpha, double C,
                      std::span<const double> t_grid, long long n, std::uint64_t seed);

}  // namespace relukit
