#include "relukit/divergence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <random>

#include "relukit/errors.hpp"
#include "relukit/numeric.hpp"

namespace relukit {

namespace {

void require_same(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) throw ShapeError("probability vectors differ in length");
}

// B ^ log(p/q) for p > 0.
double capped_log_ratio(double p, double q, double B, bool& capped) {
  double r = kInf;
  if (q > 0.0) {
    const double e = (p - q) / q;
    r = std::abs(e) < 0.5 ? std::log1p(e) : std::log(p) - std::log(q);
  }
  capped = r > B;
  return capped ? B : r;
}

// p (B ^ log(p/q)) - p + q. The added q - p terms sum to zero on the simplex and make every term nonnegative.
double kl_term(double p, double q, double B, bool& capped) {
  const double r = capped_log_ratio(p, q, B, capped);
  if (capped || std::isinf(r)) return p * r - p + q;
  const double e = (p - q) / q;
  if (std::abs(e) < 1e-3) {
    // (1+e) log(1+e) - e = sum_{j>=2} (-1)^j e^j / (j (j-1))
    double v = 0.0, ep = e * e;
    for (int j = 2; j <= 8; ++j, ep *= e) v += ((j % 2 == 0) ? 1.0 : -1.0) * ep / (j * (j - 1.0));
    return q * v;
  }
  return p * r - p + q;
}

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

}  // namespace

double ce_loss(const CondProbFn& p, const LabeledSample& data) {
  if (data.X.size() != data.size() * static_cast<std::size_t>(data.d)) throw ShapeError("X does not hold n x d values");
  if (p.d != data.d || p.K != data.K) throw ShapeError("probability function does not match the sample");
  if (data.size() == 0) throw PreconditionError("empty sample");
  CompensatedSum s;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.labels[i];
    if (y < 0 || y >= data.K) throw ShapeError("label out of range");
    const auto pi = p(data.x(i));
    if (!(pi[y] > 0.0)) return kInf;
    s.add(-std::log(pi[y]));
  }
  return s.value() / static_cast<double>(data.size());
}

double kl_point(std::span<const double> p, std::span<const double> q) {
  return kl_truncated_point(p, q, kInf);
}

double kl_truncated_point(std::span<const double> p, std::span<const double> q, double B, int* hits) {
  require_same(p, q);
  if (B < 2.0) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
      std::cerr << "warning: truncation level B = " << B << " < 2; KL_B may be negative\n";
  }
  CompensatedSum s;
  int h = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    bool capped = false;
    const double t = kl_term(p[k], q[k], B, capped);
    h += capped;
    if (std::isinf(t)) {
      if (hits) *hits = h;
      return kInf;
    }
    s.add(t);
  }
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] == 0.0) s.add(q[k]);
  if (hits) *hits = h;
  return s.value();
}

DivergenceReport risk_on_grid(const CondProbFn& p0, std::span<const double> q_values, std::span<const double> xs,
                              double B) {
  const int K = p0.K;
  if (q_values.size() != xs.size() * K) throw ShapeError("q_values must hold K entries per point");
  DivergenceReport rep;
  rep.B = B;
  rep.sample_size = static_cast<long long>(xs.size());
  CompensatedSum s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    int hits = 0;
    s.add(kl_truncated_point(p0(xs[i]), q_values.subspan(i * K, K), B, &hits));
    rep.truncation_hits += hits;
  }
  rep.value = s.value() / static_cast<double>(xs.size());
  return rep;
}

DivergenceReport risk_quadrature(const CondProbFn& p0, const CondProbFn& q, double B, int n) {
  if (p0.d != 1 || q.d != 1) throw PreconditionError("quadrature risk is for d = 1");
  if (p0.K != q.K) throw ShapeError("class counts differ");
  if (n < 1) throw PreconditionError("need at least one cell");
  std::vector<double> xs(n), qv;
  qv.reserve(static_cast<std::size_t>(n) * q.K);
  for (int i = 0; i < n; ++i) {
    xs[i] = (i + 0.5) / n;
    const auto qi = q(xs[i]);
    qv.insert(qv.end(), qi.begin(), qi.end());
  }
  return risk_on_grid(p0, qv, xs, B);
}

DivergenceReport risk_monte_carlo(const CondProbFn& p0, const CondProbFn& q, double B, long long n,
                                  std::uint64_t seed) {
  if (p0.d != q.d || p0.K != q.K) throw ShapeError("probability functions do not match");
  if (n < 2) throw PreconditionError("need at least two samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> x(p0.d);
  CompensatedSum s, s2;
  DivergenceReport rep;
  rep.B = B;
  rep.sample_size = n;
  for (long long i = 0; i < n; ++i) {
    for (double& v : x) v = U(rng);
    int hits = 0;
    const double v = kl_truncated_point(p0(x), q(x), B, &hits);
    rep.truncation_hits += hits;
    s.add(v);
    s2.add(v * v);
  }
  const double mean = s.value() / n;
  const double var = std::max(0.0, (s2.value() / n - mean * mean) * n / (n - 1));
  rep.value = mean;
  rep.std_error = std::sqrt(var / n);
  return rep;
}

double hellinger_sq(std::span<const double> p, std::span<const double> q) {
  require_same(p, q);
  CompensatedSum s;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = std::sqrt(p[k]) - std::sqrt(q[k]);
    s.add(d * d);
  }
  return 0.5 * s.value();
}

double chi2(std::span<const double> p, std::span<const double> q) {
  require_same(p, q);
  CompensatedSum s;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (q[k] == 0.0) {
      if (p[k] > 0.0) return kInf;
      continue;
    }
    const double d = p[k] - q[k];
    s.add(d * d / q[k]);
  }
  return s.value();
}

InequalityCheck check_le(double lhs, double rhs) {
  InequalityCheck c{lhs, rhs, false};
  const double slack = 1e-12 * (std::abs(lhs) + std::abs(rhs)) + 1e-300;
  c.holds = lhs <= rhs || (std::isfinite(lhs) && lhs <= rhs + slack);
  return c;
}

SandwichVerdict check_sandwich(std::span<const double> p, std::span<const double> q, double B) {
  SandwichVerdict v;
  v.h2 = hellinger_sq(p, q);
  v.kl2 = kl_truncated_point(p, q, 2.0);
  v.klb = kl_truncated_point(p, q, B);
  v.hellinger_kl2 = check_le(v.h2, 0.5 * v.kl2);
  v.kl2_klb = check_le(0.5 * v.kl2, 0.5 * v.klb);
  v.klb_hellinger = check_le(0.5 * v.klb, 2.0 * std::exp(B / 2) * v.h2);
  return v;
}

double d_tau(std::span<const double> f, std::span<const double> g, int K, double tau) {
  if (f.size() != g.size() || K < 1 || f.size() % K != 0) throw ShapeError("function tables do not match");
  double sup = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sup = std::max(sup, std::abs(std::max(tau, f[i]) - std::max(tau, g[i])));
  return sup;
}

double delta_n(const CondProbFn& p_hat, std::span<const CondProbFn> candidates, const LabeledSample& data) {
  if (candidates.empty()) throw PreconditionError("delta_n needs at least one candidate");
  double best = kInf;
  for (const auto& c : candidates) best = std::min(best, ce_loss(c, data));
  const double own = ce_loss(p_hat, data);
  if (std::isinf(own) && std::isinf(best)) return 0.0;
  return own - best;
}

InequalityCheck check_moment_lemma(std::span<const double> p, std::span<const double> q, double B, int m) {
  require_same(p, q);
  if (!(B > 1.0)) throw PreconditionError("moment lemma needs B > 1");
  if (m < 2) throw PreconditionError("moment lemma needs m >= 2");
  CompensatedSum lhs, base;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    bool capped = false;
    const double r = capped_log_ratio(p[k], q[k], B, capped);
    lhs.add(p[k] * std::pow(std::abs(r), m));
    base.add(kl_term(p[k], q[k], B, capped));
  }
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] == 0.0) base.add(q[k]);
  return check_le(lhs.value(), std::max(factorial(m), std::pow(B, m) / (B - 1)) * base.value());
}

EpsilonAidVerdict check_epsilon_aid(double a, double b, double c, double d, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw PreconditionError("epsilon must lie in (0, 1]");
  EpsilonAidVerdict v;
  v.hypothesis = a >= 0.0 && std::abs(a - b) <= 2.0 * std::sqrt(std::max(a, 0.0)) * c + d;
  const double lo = (1 - eps) * (b - d) - (1 - eps) * (1 - eps) / eps * c * c;
  const double hi = (1 + eps) * (b + d) + (1 + eps) * (1 + eps) / eps * c * c;
  v.lower = check_le(lo, a);
  v.upper = check_le(a, hi);
  return v;
}

double f_m(double u, int m) {
  if (!(u > 0.0)) throw PreconditionError("F_m is defined for u > 0");
  if (m < 2) throw PreconditionError("F_m needs m >= 2");
  const double t = u - 1.0;
  if (t == 0.0) return m == 2 ? 2.0 : 0.0;
  double denom;
  if (std::abs(t) < 1e-2) {
    // u - log u - 1 = t^2/2 - t^3/3 + t^4/4 - ...
    denom = 0.0;
    double tp = t * t;
    for (int j = 2; j <= 14; ++j, tp *= t) denom += ((j % 2 == 0) ? 1.0 : -1.0) * tp / j;
  } else {
    denom = t - std::log1p(t);
  }
  return std::pow(std::abs(std::log1p(t)), m) / denom;
}

double rate_phi(int K, double n, double alpha, double beta, int d) {
  if (!(n > 1.0)) throw PreconditionError("rate_phi needs n > 1");
  const double a = (1 + alpha) * beta;
  return std::pow(static_cast<double>(K), (a + (3 + alpha) * d) / (a + d)) * std::pow(n, -a / (a + d));
}

InverseMomentCheck inverse_moment_bound_check(const std::function<double(std::span<const double>)>& p, int d, double H,
                                              double alpha, double C, long long n, std::uint64_t seed) {
  if (!(H >= 0.0 && H <= 1.0)) throw PreconditionError("H must lie in [0, 1]");
  if (n < 2) throw PreconditionError("need at least two samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> x(d);
  CompensatedSum s, s2;
  for (long long i = 0; i < n; ++i) {
    for (double& v : x) v = U(rng);
    const double pv = p(x);
    const double z = (pv >= H && pv > 0.0) ? 1.0 / pv : 0.0;
    s.add(z);
    s2.add(z * z);
  }
  InverseMomentCheck r;
  r.estimate = s.value() / n;
  r.std_error = std::sqrt(std::max(0.0, s2.value() / n - r.estimate * r.estimate) / (n - 1));
  r.bound = alpha < 1.0 ? C * std::pow(H, alpha - 1.0) / (1.0 - alpha) : C * (1.0 - std::log(H));
  r.holds = r.estimate - 3.0 * r.std_error <= r.bound;
  return r;
}

}  // namespace relukit
