#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "relukit/cond_prob.hpp"

namespace relukit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// n labelled points; X is n x d row-major, labels are class indices (the one-hot position).
struct LabeledSample {
  int d = 1;
  int K = 2;
  std::vector<double> X;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> x(std::size_t i) const { return {X.data() + i * d, static_cast<std::size_t>(d)}; }
};

/// -(1/n) sum_i log p_{Y_i}(X_i); +inf when an observed class gets probability zero.
double ce_loss(const CondProbFn& p, const LabeledSample& data);

/// sum_k p_k log(p_k/q_k) with 0 log 0 = 0; +inf if q_k = 0 < p_k.
/// Summed as p_k log(p_k/q_k) - p_k + q_k, which agrees on the simplex and keeps every term nonnegative.
double kl_point(std::span<const double> p, std::span<const double> q);
/// sum_k p_k min(B, log(p_k/q_k)). B = +inf gives kl_point. B < 2 prints a one-time warning.
/// `hits` (optional) receives the number of coordinates where the cap was active.
double kl_truncated_point(std::span<const double> p, std::span<const double> q, double B, int* hits = nullptr);

struct DivergenceReport {
  double value = 0.0;
  double B = kInf;
  long long truncation_hits = 0;
  long long sample_size = 0;
  double std_error = 0.0;  // zero for quadrature
};

/// Midpoint rule on [0,1] with n cells; p0 and q must have d = 1.
DivergenceReport risk_quadrature(const CondProbFn& p0, const CondProbFn& q, double B, int n);
/// Average over caller-supplied q values (n x K) at scalar inputs xs, each of weight 1/n.
DivergenceReport risk_on_grid(const CondProbFn& p0, std::span<const double> q_values, std::span<const double> xs,
                              double B);
/// X uniform on [0,1]^d.
DivergenceReport risk_monte_carlo(const CondProbFn& p0, const CondProbFn& q, double B, long long n, std::uint64_t seed);

double hellinger_sq(std::span<const double> p, std::span<const double> q);
/// sum (p_k - q_k)^2 / q_k; +inf if q_k = 0 < p_k.
double chi2(std::span<const double> p, std::span<const double> q);

/// lhs <= rhs up to a relative floating-point slack.
struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
  double margin() const { return rhs - lhs; }
};
InequalityCheck check_le(double lhs, double rhs);

struct SandwichVerdict {
  double h2 = 0.0, kl2 = 0.0, klb = 0.0;
  InequalityCheck hellinger_kl2;  // H^2 <= KL_2/2
  InequalityCheck kl2_klb;        // KL_2/2 <= KL_B/2
  InequalityCheck klb_hellinger;  // KL_B/2 <= 2 e^{B/2} H^2
  bool all() const { return hellinger_kl2.holds && kl2_klb.holds && klb_hellinger.holds; }
};
SandwichVerdict check_sandwich(std::span<const double> p, std::span<const double> q, double B);

/// sup over rows, max over k of |max(tau, f) - max(tau, g)|. f, g are n x K row-major tables.
double d_tau(std::span<const double> f, std::span<const double> g, int K, double tau);

/// CE(p_hat) minus the smallest CE over `candidates`.
double delta_n(const CondProbFn& p_hat, std::span<const CondProbFn> candidates, const LabeledSample& data);

/// sum p_k |B ^ log(p_k/q_k)|^m <= max(m!, B^m/(B-1)) sum p_k (B ^ log(p_k/q_k)).
InequalityCheck check_moment_lemma(std::span<const double> p, std::span<const double> q, double B, int m);

struct EpsilonAidVerdict {
  bool hypothesis = false;  // |a - b| <= 2 sqrt(a) c + d and a >= 0
  InequalityCheck lower;    // (1-e)(b-d) - (1-e)^2 c^2 / e <= a
  InequalityCheck upper;    // a <= (1+e)(b+d) + (1+e)^2 c^2 / e
  bool holds() const { return !hypothesis || (lower.holds && upper.holds); }
};
EpsilonAidVerdict check_epsilon_aid(double a, double b, double c, double d, double eps);

/// |log u|^m / (u - log u - 1), with the limit value at u = 1.
double f_m(double u, int m);

/// K^{((1+a)b+(3+a)d)/((1+a)b+d)} n^{-(1+a)b/((1+a)b+d)}
double rate_phi(int K, double n, double alpha, double beta, int d);

struct InverseMomentCheck {
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  bool holds = false;
};
/// Monte Carlo over X uniform on [0,1]^d of 1{p(X) >= H}/p(X) against the small-value-bound estimate.
InverseMomentCheck inverse_moment_bound_check(const std::function<double(std::span<const double>)>& p, int d, double H,
                                              double alpha, double C, long long n, std::uint64_t seed);

}  // namespace relukit
