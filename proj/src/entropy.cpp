#include "relukit/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "relukit/errors.hpp"

namespace relukit {

EntropyBound covering_bound(const ArchitectureSpec& arch, int K, double delta) {
  if (!(delta > 0.0)) throw PreconditionError("covering_bound needs delta > 0");
  if (K < 1) throw PreconditionError("covering_bound needs K >= 1");
  if (static_cast<int>(arch.widths.size()) != arch.depth + 2) throw ShapeError("widths must list m_0 .. m_{L+1}");
  EntropyBound b;
  b.delta = delta;
  b.L = arch.depth;
  b.K = K;
  b.d = arch.widths.front();
  b.s = arch.sparsity;
  double logV = 0.0;
  b.hidden_widths_le_s = true;
  for (std::size_t l = 0; l < arch.widths.size(); ++l) {
    logV += std::log(arch.widths[l] + 1.0);
    if (l > 0 && l + 1 < arch.widths.size() && arch.widths[l] > arch.sparsity) b.hidden_widths_le_s = false;
  }
  b.V = std::exp(logV);
  const double s1 = static_cast<double>(b.s) + 1.0;
  const double L = b.L, Kd = K, d = b.d, s = static_cast<double>(b.s);
  b.log_raw = s1 * (std::log(4.0 * Kd * (L + 1) / delta) + 2.0 * logV);
  b.raw = std::exp(b.log_raw);
  b.log_displayed = s1 * ((2 * L + 6) * std::log(2.0) - std::log(delta) + std::log(L + 1) + 3 * std::log(Kd) +
                          2 * std::log(d) + L * std::log(s));
  const double logV_sub = std::log(d) + std::log(Kd) + L * std::log(s) + (L + 2) * std::log(2.0);
  b.log_substituted = s1 * (std::log(4.0 * Kd * (L + 1) / delta) + 2.0 * logV_sub);
  return b;
}

ToyClass toy_step_class() {
  ToyClass c;
  c.points = 4;
  c.K = 1;
  for (double high : {1.0, 3.0})
    for (int step = 0; step < 4; ++step) {
      std::vector<double> f(4);
      for (int i = 0; i < 4; ++i) f[i] = i >= step ? high : 0.05 * high;
      c.values.push_back(f);
    }
  return c;
}

ToyClass random_toy_class(int size, int points, int K, std::uint64_t seed) {
  if (size < 1 || size > 64 || points < 1 || points > 8) throw PreconditionError("toy classes hold <= 64 functions on <= 8 points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  ToyClass c;
  c.points = points;
  c.K = K;
  for (int j = 0; j < size; ++j) {
    std::vector<double> f(static_cast<std::size_t>(points) * K);
    for (double& v : f) v = U(rng);
    c.values.push_back(f);
  }
  return c;
}

ToyClass log_class(const ToyClass& c) {
  ToyClass out = c;
  for (auto& f : out.values)
    for (double& v : f) v = std::log(v);
  return out;
}

namespace {

double toy_distance(const std::vector<double>& f, const std::vector<double>& g, double tau) {
  double d = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) d = std::max(d, std::abs(std::max(tau, f[i]) - std::max(tau, g[i])));
  return d;
}

// Exact minimum set cover over a 64-element universe by branch and bound.
void search(std::uint64_t uncovered, const std::vector<std::uint64_t>& balls, int used, int& best) {
  if (uncovered == 0) {
    best = std::min(best, used);
    return;
  }
  if (used + 1 >= best) return;
  // Branch on the uncovered element with the fewest balls containing it.
  int pick = -1, fewest = 1 << 30;
  for (std::uint64_t rest = uncovered; rest; rest &= rest - 1) {
    const int e = std::countr_zero(rest);
    int cnt = 0;
    for (auto b : balls) cnt += (b >> e) & 1U;
    if (cnt < fewest) {
      fewest = cnt;
      pick = e;
    }
  }
  int largest = 0;
  for (auto b : balls) largest = std::max(largest, std::popcount(b & uncovered));
  const int need = (std::popcount(uncovered) + largest - 1) / largest;
  if (used + need >= best) return;
  for (auto b : balls)
    if ((b >> pick) & 1U) search(uncovered & ~b, balls, used + 1, best);
}

}  // namespace

int covering_number(const ToyClass& c, double radius, double tau) {
  const int n = static_cast<int>(c.values.size());
  if (n < 1 || n > 64) throw PreconditionError("exact covering needs 1..64 functions");
  std::vector<std::uint64_t> balls(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (toy_distance(c.values[i], c.values[j], tau) <= radius) balls[i] |= std::uint64_t{1} << j;
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  int best = n;
  search(all, balls, 0, best);
  return best;
}

ReductionRecord covering_reduction_bound(double delta, double tau, const ToyClass* toy) {
  if (!(delta > 0.0 && tau > 0.0)) throw PreconditionError("reduction needs delta > 0 and tau > 0");
  ReductionRecord r;
  r.delta = delta;
  r.tau = tau;
  r.lhs = "N(" + std::to_string(delta) + ", log G, d_{log " + std::to_string(tau) + "})";
  r.rhs = "N(" + std::to_string(delta * tau) + ", G, d_{" + std::to_string(tau) + "})";
  if (toy) {
    r.lhs_exact = covering_number(log_class(*toy), delta, std::log(tau));
    r.rhs_exact = covering_number(*toy, delta * tau, tau);
    r.holds = r.lhs_exact <= r.rhs_exact;
  }
  return r;
}

}  // namespace relukit
