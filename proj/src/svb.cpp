#include "relukit/svb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relukit/errors.hpp"
#include "relukit/numeric.hpp"

namespace relukit {

Sampler uniform_sampler(int d) {
  if (d < 1) throw PreconditionError("sampler dimension must be positive");
  return {d, [](std::mt19937_64& rng, std::span<double> x) {
            std::uniform_real_distribution<double> U(0.0, 1.0);
            for (double& v : x) v = U(rng);
          }};
}

CondProbFn p_alpha_family(double alpha) {
  if (!(alpha > 0.0)) throw PreconditionError("p_alpha_family needs alpha > 0");
  CondProbFn fn;
  fn.d = 1;
  fn.K = 3;
  fn.eval = [alpha](std::span<const double> x) {
    const double p1 = std::min(std::pow(x[0], 1.0 / alpha), 1.0 / 3.0);
    return std::vector<double>{p1, 1.0 / 3.0, 2.0 / 3.0 - p1};
  };
  return fn;
}

CondProbFn p_alpha_limit_zero() {
  CondProbFn fn;
  fn.d = 1;
  fn.K = 3;
  fn.eval = [](std::span<const double>) { return std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0}; };
  return fn;
}

double p_alpha_holder_radius(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw PreconditionError("Lipschitz radius is finite for alpha in [0, 1] only");
  if (alpha == 0.0) return 2.0 / 3.0;
  // p_3 has the largest sup norm; the slope of x^{1/alpha} peaks where it reaches 1/3.
  return 2.0 / 3.0 + std::pow(3.0, alpha - 1.0) / alpha;
}

std::vector<double> default_t_grid() {
  std::vector<double> t(30);
  for (int i = 0; i < 30; ++i) t[i] = std::pow(10.0, -4.0 + 4.0 * i / 29.0);
  return t;
}

namespace {

struct TailCounts {
  std::vector<std::vector<long long>> at_most;  // [k][i]: #{p_k(X) <= t_i}
  std::vector<long long> zeros;                 // [k]: #{p_k(X) == 0}
};

// Streams n draws; t_grid order is preserved in the output.
TailCounts count_tails(const CondProbFn& p, const Sampler& sampler, std::span<const double> t_grid, long long n,
                       std::uint64_t seed) {
  if (sampler.d != p.d) throw ShapeError("sampler dimension does not match p");
  if (n < 2) throw PreconditionError("need at least two samples");
  const std::size_t T = t_grid.size();
  std::vector<std::size_t> order(T);
  for (std::size_t i = 0; i < T; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t_grid[a] < t_grid[b]; });
  std::vector<double> sorted_t(T);
  for (std::size_t i = 0; i < T; ++i) sorted_t[i] = t_grid[order[i]];

  std::vector<std::vector<long long>> bucket(p.K, std::vector<long long>(T + 1, 0));
  TailCounts out{std::vector<std::vector<long long>>(p.K, std::vector<long long>(T, 0)), std::vector<long long>(p.K, 0)};
  std::mt19937_64 rng(seed);
  std::vector<double> x(p.d);
  for (long long i = 0; i < n; ++i) {
    sampler.draw(rng, x);
    const auto pi = p(x);
    for (int k = 0; k < p.K; ++k) {
      // First grid index with t >= p_k(X); the value counts towards that t and every larger one.
      ++bucket[k][std::lower_bound(sorted_t.begin(), sorted_t.end(), pi[k]) - sorted_t.begin()];
      out.zeros[k] += pi[k] == 0.0;
    }
  }
  for (int k = 0; k < p.K; ++k) {
    long long run = 0;
    for (std::size_t i = 0; i < T; ++i) {
      run += bucket[k][i];
      out.at_most[k][order[i]] = run;
    }
  }
  return out;
}

void check_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw PreconditionError("empty t grid");
  for (double t : t_grid)
    if (!(t > 0.0 && t <= 1.0)) throw PreconditionError("t grid must lie in (0, 1]");
}

}  // namespace

SvbEstimate svb_fit(const CondProbFn& p, const Sampler& sampler, int k, std::span<const double> t_grid, long long n,
                    std::uint64_t seed, double fit_max_t) {
  check_grid(t_grid);
  if (k < 0 || k >= p.K) throw PreconditionError("class index out of range");
  const TailCounts counts = count_tails(p, sampler, t_grid, n, seed);
  SvbEstimate est;
  est.samples = n;
  est.t_grid.assign(t_grid.begin(), t_grid.end());
  for (long long c : counts.at_most[k]) est.tail.push_back(static_cast<double>(c) / static_cast<double>(n));

  if (counts.zeros[k] > 0) {
    // Positive mass at zero: the bound cannot hold for any alpha > 0.
    est.status = SvbFitStatus::zero_exponent;
    est.alpha_hat = 0.0;
    est.C_hat = 1.0;
    return est;
  }
  std::vector<double> lx, ly, w;
  bool any_in_range = false, all_one = true;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] > fit_max_t) continue;
    any_in_range = true;
    if (est.tail[i] < 1.0) all_one = false;
    const double count = est.tail[i] * static_cast<double>(n);
    // Counts below ten carry too little information for a log-scale fit.
    if (count < 10.0) continue;
    lx.push_back(std::log(t_grid[i]));
    ly.push_back(std::log(est.tail[i]));
    w.push_back(count);
  }
  if (!any_in_range || all_one) {
    est.status = SvbFitStatus::undefined;
    return est;
  }
  if (lx.size() < 2) {
    // No observations near zero: the class looks bounded away from zero.
    est.status = SvbFitStatus::unbounded;
    est.alpha_hat = std::numeric_limits<double>::infinity();
    return est;
  }
  const LinearFit fit = least_squares(lx, ly, w);
  est.alpha_hat = std::max(0.0, fit.slope);
  est.C_hat = std::exp(fit.intercept);
  est.status = SvbFitStatus::ok;
  return est;
}

SvbVerdict svb_verify(const CondProbFn& p, const Sampler& sampler, double alpha, double C,
                      std::span<const double> t_grid, long long n, std::uint64_t seed) {
  check_grid(t_grid);
  const TailCounts counts = count_tails(p, sampler, t_grid, n, seed);
  SvbVerdict verdict;
  verdict.worst_excess = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < p.K; ++k) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const double t = t_grid[i];
      const double tail = static_cast<double>(counts.at_most[k][i]) / static_cast<double>(n);
      const double se = std::sqrt(tail * (1.0 - tail) / static_cast<double>(n));
      const double excess = tail - (C * std::pow(t, alpha) + 3.0 * se);
      if (excess > verdict.worst_excess) {
        verdict.worst_excess = excess;
        verdict.worst_k = k;
        verdict.worst_t = t;
      }
    }
  }
  verdict.pass = verdict.worst_excess <= 0.0;
  return verdict;
}

}  // namespace relukit
