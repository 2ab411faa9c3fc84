#include "relukit/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "relukit/algebra.hpp"
#include "relukit/divergence.hpp"
#include "relukit/entropy.hpp"
#include "relukit/errors.hpp"
#include "relukit/log_approx.hpp"
#include "relukit/numeric.hpp"
#include "relukit/prob_net.hpp"
#include "relukit/svb.hpp"

namespace relukit {

int grid_points(int fallback) {
  if (const char* env = std::getenv("RELUKIT_GRID_POINTS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 2 && v <= 100000000) return static_cast<int>(v);
  }
  return fallback;
}

long long SuiteResult::violations() const {
  return std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.pass; });
}

void write_csv(std::ostream& os, const std::vector<CheckRow>& rows, bool header) {
  if (header) os << "name,params,lhs,rhs,margin,verdict\n";
  os << std::setprecision(17);
  for (const auto& r : rows)
    os << r.name << ',' << r.params << ',' << r.lhs << ',' << r.rhs << ',' << r.margin() << ','
       << (r.pass ? "PASS" : "FAIL") << '\n';
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Aggregates many trials of one inequality into a single row; keeps the tightest trial.
class Tally {
 public:
  Tally(std::string name, std::string params) : name_(std::move(name)), params_(std::move(params)) {}

  void add(double lhs, double rhs, bool pass) {
    ++trials_;
    if (!pass) ++violations_;
    const double m = rhs - lhs;
    const bool tighter = std::isnan(worst_margin_) || (!pass && worst_pass_) || (pass == worst_pass_ && m < worst_margin_);
    if (tighter) {
      worst_margin_ = m;
      worst_pass_ = pass;
      lhs_ = lhs;
      rhs_ = rhs;
    }
  }
  void add(const InequalityCheck& c) { add(c.lhs, c.rhs, c.holds); }

  CheckRow row() const {
    return {name_, params_ + " trials=" + std::to_string(trials_) + " violations=" + std::to_string(violations_), lhs_,
            rhs_, violations_ == 0};
  }

 private:
  std::string name_, params_;
  long long trials_ = 0, violations_ = 0;
  double worst_margin_ = std::numeric_limits<double>::quiet_NaN();
  bool worst_pass_ = true;
  double lhs_ = 0.0, rhs_ = 0.0;
};

CheckRow le_row(std::string name, std::string params, double lhs, double rhs) {
  return {std::move(name), std::move(params), lhs, rhs, lhs <= rhs};
}

const std::vector<double> kConcentrations = {1.0, 0.05};

int random_classes(std::mt19937_64& rng) { return std::uniform_int_distribution<int>(2, 6)(rng); }

// ---------------------------------------------------------------------------

std::vector<CheckRow> log_net_rows(double beta, double M) {
  const LogNetCheck c = check_log_net(beta, M, grid_points(10000));
  const std::string p = "beta=" + fmt(beta) + " M=" + fmt(M) + " points=" + std::to_string(c.points);
  return {
      le_row("log-net/exp_error", p, c.max_error, c.error_bound),
      le_row("log-net/floor", p, c.floor - 1e-12, c.min_G),
      le_row("log-net/depth", p, c.depth, static_cast<double>(c.depth_budget)),
      le_row("log-net/width", p, c.width, static_cast<double>(c.width_budget)),
      le_row("log-net/sparsity", p, static_cast<double>(c.sparsity), c.sparsity_budget),
      {"log-net/validate", p, c.valid ? 0.0 : 1.0, 0.0, c.valid},
  };
}

std::vector<CheckRow> partition_rows(double beta, double M) {
  std::vector<CheckRow> rows;
  const std::string p = "beta=" + fmt(beta) + " M=" + fmt(M);
  const PartitionScheme s = build_partition(beta, M);
  rows.push_back({"partition/b1_exact", p, s.b[1], 1.0 / M, s.b[1] == 1.0 / M});
  const int cf = partition_count_closed_form(beta, M);
  rows.push_back({"partition/R_closed_form", p, static_cast<double>(s.R), static_cast<double>(cf), s.R == cf});
  rows.push_back({"partition/R_at_least_2", p, 2.0, static_cast<double>(s.R), s.R >= 2});
  rows.push_back({"partition/a1_positive", p, 0.0, s.a[1], s.a[1] > 0.0});
  rows.push_back(le_row("partition/aR_upper", p, s.a[s.R], 1.0 + 1.0 / M));
  rows.push_back(le_row("partition/aR_lower", p, 1.0 - 1.0 / M, s.a[s.R]));

  // Grid on [a_1, a_R] plus every breakpoint.
  const int n = grid_points(10000);
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(std::min(s.a[s.R], s.a[1] + (s.a[s.R] - s.a[1]) * i / (n - 1.0)));
  for (int r = 1; r <= s.R; ++r) xs.push_back(s.a[r]);
  for (int r = 0; r <= s.R; ++r) xs.push_back(s.b[r]);
  std::sort(xs.begin(), xs.end());
  double unity = 0.0;
  {
    std::size_t fa = 2, hb = 1;
    for (double x : xs) {
      while (fa <= static_cast<std::size_t>(s.R) && s.a[fa] < x) ++fa;
      while (hb <= static_cast<std::size_t>(s.R) && s.b[hb] < x) ++hb;
      double sum = 0.0;
      for (std::size_t r = std::max<std::size_t>(2, fa - 1); r <= std::min<std::size_t>(s.R, fa + 1); ++r)
        sum += hat_function(s, static_cast<int>(r), HatKind::F, x);
      for (std::size_t r = std::max<std::size_t>(1, hb - 1); r <= std::min<std::size_t>(s.R, hb + 1); ++r)
        sum += hat_function(s, static_cast<int>(r), HatKind::H, x);
      unity = std::max(unity, std::abs(sum - 1.0));
    }
  }
  rows.push_back(le_row("partition/unity", p + " points=" + std::to_string(xs.size()), unity, 1e-12));

  // |e^{T(pi(x))} - x| on [0,1].
  std::vector<double> ys = uniform_grid(n);
  for (double b : breakpoints(s)) ys.push_back(b);
  double texp = 0.0;
  for (double x : ys) texp = std::max(texp, std::abs(std::exp(t_beta(s, project(s, x))) - x));
  {
    // Equality is attained at x = 1 when a_R = 1 - 1/M.
    const auto c = check_le(texp, 1.0 / M);
    rows.push_back({"partition/exp_T_error", p + " points=" + std::to_string(ys.size()), c.lhs, c.rhs, c.holds});
  }

  // Local bound e^omega |T_center - log| <= 1/M on intervals inside D_lambda.
  {
    const int c = s.ceil_beta;
    const double denom = std::pow(2.0, c * c) * std::pow(static_cast<double>(c), s.floor_beta) * M;
    double worst = 0.0;
    long long intervals = 0;
    auto check_interval = [&](double lo, double hi, double center, double lambda_center) {
      const double lambda = lambda_center - 1.0;
      if (lambda < 1.0) return;
      const double dlo = std::pow(lambda, c) / denom, dhi = std::pow(lambda + 1.0, c) / denom;
      if (lo < dlo * (1 - 1e-12) || hi > dhi * (1 + 1e-12)) return;
      ++intervals;
      const double omega = std::log(dhi);
      const TaylorPiece tp = make_taylor_piece(center, s.floor_beta);
      for (int i = 0; i <= 16; ++i) {
        const double x = lo + (hi - lo) * i / 16.0;
        worst = std::max(worst, std::exp(omega) * std::abs(taylor_eval_centered(tp, x) - std::log(x)));
      }
    };
    for (int r = 2; r <= s.R; ++r) check_interval(s.a[r - 1], s.a[r], s.a[r], s.base + r / 2.0 - 0.75);
    for (int r = 2; r < s.R; ++r) check_interval(s.b[r - 1], s.b[r], s.b[r], s.base + r / 2.0 - 0.5);
    rows.push_back(le_row("partition/exp_times_logerror", p + " intervals=" + std::to_string(intervals), worst, 1.0 / M));
  }

  // Coefficient sums of every generated piece with center <= e.
  {
    Tally t("partition/coefficient_sum", p);
    auto add = [&](double center) {
      if (center > std::exp(1.0)) return;
      const TaylorPiece tp = make_taylor_piece(center, s.floor_beta);
      double sum = 0.0;
      for (double v : tp.coefficients) sum += std::abs(v);
      t.add(check_le(sum, coefficient_sum_bound(center, s.floor_beta)));
    };
    for (int r = 2; r <= s.R; ++r) add(s.a[r]);
    for (int r = 1; r <= s.R; ++r) add(s.b[r]);
    rows.push_back(t.row());
  }

  // Hat network budgets and exactness on a few points.
  {
    Tally depth("partition/hat_depth", p), sparse("partition/hat_sparsity", p), exact("partition/hat_exact", p);
    const long long db = hat_depth_budget(s);
    const double sb = hat_sparsity_budget(s);
    // Kink terms of size slope * normalizer cancel outside the support, so rounding scales with both.
    double min_gap = kInf;
    const auto bp = breakpoints(s);
    for (std::size_t i = 1; i < bp.size(); ++i) min_gap = std::min(min_gap, bp[i] - bp[i - 1]);
    const double tol = 64 * std::numeric_limits<double>::epsilon() * hat_normalizer(s) / min_gap;
    const int stride = std::max(1, s.R / 40);
    auto probe = [&](int r, HatKind kind) {
      const Network h = hat_network(s, r, kind);
      depth.add(h.depth(), static_cast<double>(db), h.depth() <= db);
      sparse.add(static_cast<double>(sparsity(h)), sb, static_cast<double>(sparsity(h)) <= sb);
      double e = 0.0;
      for (int i = 0; i <= 64; ++i) {
        const double x = s.a[1] + (s.a[s.R] - s.a[1]) * i / 64.0;
        e = std::max(e, std::abs(evaluate_scalar(h, x) - hat_function(s, r, kind, x)));
      }
      exact.add(e, tol, e <= tol);
    };
    for (int r = 2; r <= s.R; r += stride) probe(r, HatKind::F);
    for (int r = 1; r <= s.R; r += stride) probe(r, HatKind::H);
    probe(s.R, HatKind::F);
    probe(s.R, HatKind::H);
    rows.push_back(depth.row());
    rows.push_back(sparse.row());
    rows.push_back(exact.row());
  }
  return rows;
}

std::vector<CheckRow> taylor_rows(std::uint64_t seed, int trials) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(std::log(0.05), 1.0);
  std::uniform_int_distribution<int> kap(0, 5);
  Tally err("taylor/error_bound", "x,c log-uniform in [0.05,e] kappa in 0..5");
  Tally below("taylor/below_log_c", "x <= c");
  const double eps = std::numeric_limits<double>::epsilon();
  for (int i = 0; i < trials; ++i) {
    const double x = std::exp(U(rng)), c = std::exp(U(rng));
    const int k = kap(rng);
    const TaylorPiece tp = make_taylor_piece(c, k);
    const double T = taylor_eval_centered(tp, x);
    const double lhs = std::abs(std::log(x) - T);
    const double rhs = taylor_error_bound(tp, x);
    // Both logs carry a few ulps of rounding; allow exactly that.
    const double slack = 16 * eps * (std::abs(std::log(x)) + std::abs(std::log(c)) + 1.0);
    err.add(lhs, rhs + slack, lhs <= rhs + slack);
    if (x <= c) below.add(T, std::log(c) + slack, T <= std::log(c) + slack);
  }
  return {err.row(), below.row()};
}

std::vector<CheckRow> mult_rows(std::uint64_t seed) {
  std::vector<CheckRow> rows;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int side = 101;
  for (int D : {1, 2, 3}) {
    for (int eta : {4, 8, 12}) {
      const Network m = mult_net(eta, D);
      const std::string p = "D=" + std::to_string(D) + " eta=" + std::to_string(eta);
      long long total = 1;
      for (int i = 0; i < D; ++i) total *= side;
      std::vector<double> xs(static_cast<std::size_t>(total) * D), prod(total);
      for (long long idx = 0; idx < total; ++idx) {
        long long rest = idx;
        double pr = 1.0;
        for (int j = 0; j < D; ++j) {
          const double v = static_cast<double>(rest % side) / (side - 1);
          rest /= side;
          xs[idx * D + j] = v;
          pr *= v;
        }
        prod[idx] = pr;
      }
      const auto out = evaluate_batch(m, xs);
      double worst = 0.0;
      for (long long idx = 0; idx < total; ++idx) worst = std::max(worst, std::abs(out[idx] - prod[idx]));
      rows.push_back(le_row("mult/error", p + " grid=101^D", worst, std::pow(3.0, D) * std::ldexp(1.0, -eta)));

      std::vector<double> zs(static_cast<std::size_t>(1000) * D);
      for (int t = 0; t < 1000; ++t) {
        for (int j = 0; j < D; ++j) zs[t * D + j] = U(rng);
        zs[t * D + std::uniform_int_distribution<int>(0, D - 1)(rng)] = 0.0;
      }
      const auto zo = evaluate_batch(m, zs);
      double worst_zero = 0.0;
      for (double v : zo) worst_zero = std::max(worst_zero, std::abs(v));
      rows.push_back({"mult/zero_absorption", p + " inputs=1000", worst_zero, 0.0, worst_zero == 0.0});
    }
  }
  return rows;
}

std::vector<CheckRow> sandwich_rows(std::uint64_t seed, int trials) {
  std::vector<CheckRow> rows;
  std::mt19937_64 rng(seed);
  for (double a : kConcentrations) {
    for (double B : {2.0, 5.0, 10.0}) {
      const std::string p = "dirichlet=" + fmt(a) + " B=" + fmt(B);
      Tally t1("sandwich/hellinger_le_half_kl2", p), t2("sandwich/kl2_le_klb", p), t3("sandwich/klb_le_hellinger", p);
      for (int i = 0; i < trials; ++i) {
        const int K = random_classes(rng);
        const auto pv = dirichlet(K, a, rng), qv = dirichlet(K, a, rng);
        const auto v = check_sandwich(pv, qv, B);
        t1.add(v.hellinger_kl2);
        t2.add(v.kl2_klb);
        t3.add(v.klb_hellinger);
      }
      rows.push_back(t1.row());
      rows.push_back(t2.row());
      rows.push_back(t3.row());
    }
  }
  // Near-singular q with truncation active.
  Tally ns("sandwich/near_singular", "q_1=1e-12 B in {2,5,10}");
  for (double B : {2.0, 5.0, 10.0}) {
    const std::vector<double> pv{0.5, 0.3, 0.2}, qv{1e-12, 0.6, 0.4 - 1e-12};
    const auto v = check_sandwich(pv, qv, B);
    ns.add(v.hellinger_kl2);
    ns.add(v.kl2_klb);
    ns.add(v.klb_hellinger);
  }
  rows.push_back(ns.row());
  return rows;
}

std::vector<CheckRow> moment_rows(std::uint64_t seed, int trials) {
  std::vector<CheckRow> rows;
  std::mt19937_64 rng(seed);
  for (double a : kConcentrations) {
    for (double B : {2.0, 5.0, 10.0}) {
      for (int m = 2; m <= 6; ++m) {
        Tally t("moment/lemma", "dirichlet=" + fmt(a) + " B=" + fmt(B) + " m=" + std::to_string(m));
        for (int i = 0; i < trials; ++i) {
          const int K = random_classes(rng);
          t.add(check_moment_lemma(dirichlet(K, a, rng), dirichlet(K, a, rng), B, m));
        }
        rows.push_back(t.row());
      }
    }
  }
  Tally adv("moment/adversarial", "q_1=e^-B B in {2,5,10} m in 2..6");
  for (double B : {2.0, 5.0, 10.0})
    for (int m = 2; m <= 6; ++m) {
      const double e = std::exp(-B);
      adv.add(check_moment_lemma(std::vector<double>{0.6, 0.4}, std::vector<double>{e, 1 - e}, B, m));
    }
  rows.push_back(adv.row());
  return rows;
}

std::vector<CheckRow> chi2_rows(std::uint64_t seed, int trials) {
  std::vector<CheckRow> rows;
  std::mt19937_64 rng(seed);
  for (double a : kConcentrations) {
    Tally t("chi2/kl_le_chi2", "dirichlet=" + fmt(a));
    for (int i = 0; i < trials; ++i) {
      const int K = random_classes(rng);
      const auto pv = dirichlet(K, a, rng), qv = dirichlet(K, a, rng);
      t.add(check_le(kl_point(pv, qv), chi2(pv, qv)));
    }
    rows.push_back(t.row());
  }
  return rows;
}

std::vector<CheckRow> pseudometric_rows(std::uint64_t seed, int trials) {
  std::vector<CheckRow> rows;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int points = 8;
  for (double a : kConcentrations) {
    const std::string p = "dirichlet=" + fmt(a);
    Tally nonneg("pseudometric/nonnegative", p), self("pseudometric/self_zero", p), sym("pseudometric/symmetric", p),
        tri("pseudometric/triangle", p), sup("pseudometric/tau_minus_inf_is_sup", p);
    for (int i = 0; i < trials; ++i) {
      const int K = random_classes(rng);
      auto table = [&] {
        std::vector<double> t;
        for (int j = 0; j < points; ++j)
          for (double v : dirichlet(K, a, rng)) t.push_back(std::max(std::log(v), -1000.0));
        return t;
      };
      const auto f = table(), g = table(), h = table();
      const double tau = U(rng) < 0.2 ? -kInf : -20.0 * U(rng);
      const double fg = d_tau(f, g, K, tau);
      nonneg.add(-fg, 0.0, fg >= 0.0);
      const double ff = d_tau(f, f, K, tau);
      self.add(ff, 0.0, ff == 0.0);
      const double gf = d_tau(g, f, K, tau);
      sym.add(std::abs(fg - gf), 0.0, fg == gf);
      tri.add(check_le(fg, d_tau(f, h, K, tau) + d_tau(h, g, K, tau)));
      if (std::isinf(tau)) {
        double s = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) s = std::max(s, std::abs(f[j] - g[j]));
        sup.add(std::abs(fg - s), 0.0, fg == s);
      }
    }
    for (const auto* t : {&nonneg, &self, &sym, &tri, &sup}) rows.push_back(t->row());
  }
  return rows;
}

std::vector<CheckRow> epsilon_rows(std::uint64_t seed, int trials) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Tally lo("epsilon/lower", "random tuples"), hi("epsilon/upper", "random tuples"), one("epsilon/eps_one_lower", "eps=1");
  for (int i = 0; i < trials; ++i) {
    const double a = 10.0 * U(rng) * U(rng);
    double c, d, s;
    do {
      c = 4.0 * U(rng) - 1.0;
      d = 4.0 * U(rng) - 1.0;
      s = 2.0 * std::sqrt(a) * c + d;
    } while (s < 0.0);
    const double b = a + s * (2.0 * U(rng) - 1.0);
    const double eps = i % 10 == 0 ? 1.0 : 1.0 - U(rng);
    const auto v = check_epsilon_aid(a, b, c, d, eps);
    if (!v.hypothesis) continue;
    lo.add(v.lower);
    hi.add(v.upper);
    if (eps == 1.0) one.add(v.lower.lhs, 0.0, v.lower.lhs == 0.0 && v.lower.holds);
  }
  return {lo.row(), hi.row(), one.row()};
}

std::vector<CheckRow> lipschitz_rows(std::uint64_t seed, int trials) {
  std::vector<CheckRow> rows;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  for (double a : kConcentrations) {
    Tally t("lipschitz/log_softmax", "log-dirichlet=" + fmt(a) + " plus gaussian noise");
    for (int i = 0; i < trials; ++i) {
      const int K = random_classes(rng);
      std::vector<double> x, y;
      for (double v : dirichlet(K, a, rng)) x.push_back(std::max(std::log(v), -50.0) + N(rng));
      for (double v : dirichlet(K, a, rng)) y.push_back(std::max(std::log(v), -50.0) + N(rng));
      const auto lx = log_softmax(x), ly = log_softmax(y);
      double lhs = 0.0, dist = 0.0;
      for (int k = 0; k < K; ++k) {
        lhs = std::max(lhs, std::abs(lx[k] - ly[k]));
        dist = std::max(dist, std::abs(x[k] - y[k]));
      }
      t.add(check_le(lhs, K * dist));
    }
    rows.push_back(t.row());
  }
  return rows;
}

std::vector<CheckRow> fm_rows() {
  std::vector<CheckRow> rows;
  const int n = 10000;
  const double lo = 1e-6, hi = 1.0 - 1e-6;
  for (int m : {2, 3, 4}) {
    Tally t("fm/strictly_decreasing", "m=" + std::to_string(m) + " grid=10000 on (1e-6,1-1e-6)");
    double prev = f_m(lo, m);
    for (int i = 1; i < n; ++i) {
      const double u = lo + (hi - lo) * i / (n - 1.0);
      const double v = f_m(u, m);
      t.add(v, prev, v < prev);
      prev = v;
    }
    rows.push_back(t.row());
    const double target = m == 2 ? 2.0 : 0.0;
    double dev = 0.0;
    for (double u : {1.0 - 1e-6, 1.0 + 1e-6}) dev = std::max(dev, std::abs(f_m(u, m) - target));
    rows.push_back(le_row("fm/limit_at_one", "m=" + std::to_string(m) + " target=" + fmt(target), dev, 1e-3));
  }
  return rows;
}

std::vector<CheckRow> svb_rows(std::uint64_t seed) {
  std::vector<CheckRow> rows;
  const auto grid = default_t_grid();
  const Sampler U = uniform_sampler(1);
  for (double alpha : {0.5, 1.0, 2.0}) {
    const auto p = p_alpha_family(alpha);
    const std::string pa = "alpha=" + fmt(alpha);
    const SvbEstimate est = svb_fit(p, U, 0, grid, 1000000, seed);
    rows.push_back(le_row("svb/fit_alpha", pa + " n=1e6", std::abs(est.alpha_hat - alpha), 0.05));
    const SvbVerdict ok = svb_verify(p, U, alpha, std::pow(3.0, alpha), grid, 1000000, seed + 1);
    rows.push_back({"svb/verify_true_exponent", pa + " C=3^alpha n=1e6", ok.worst_excess, 0.0, ok.pass});
    // The excess at small t grows like t^alpha, so detecting it needs a large sample.
    const double star = alpha + 0.5;
    const SvbVerdict bad = svb_verify(p, U, star, std::pow(3.0, star), grid, 50000000, seed + 2);
    rows.push_back({"svb/verify_larger_exponent_fails", pa + " alpha*=" + fmt(star) + " C=3^alpha* n=5e7 worst_t=" +
                                                            fmt(bad.worst_t),
                    0.0, bad.worst_excess, !bad.pass});
    for (double lower : {alpha / 2, alpha / 4}) {
      const SvbVerdict emb = svb_verify(p, U, lower, std::pow(3.0, alpha), grid, 1000000, seed + 1);
      rows.push_back({"svb/monotone_embedding", pa + " alpha*=" + fmt(lower) + " C=3^alpha", emb.worst_excess, 0.0,
                      emb.pass});
    }
  }
  {
    CondProbFn flat{1, 3, [](std::span<const double>) { return std::vector<double>(3, 1.0 / 3.0); }};
    const SvbEstimate est = svb_fit(flat, U, 0, grid, 100000, seed);
    rows.push_back({"svb/constant_unbounded", "p=1/K", 0.0, 0.0, est.status == SvbFitStatus::unbounded});
    const SvbVerdict v = svb_verify(flat, U, 1.0, 3.0, grid, 100000, seed);
    rows.push_back({"svb/constant_verify", "alpha=1 C=K", v.worst_excess, 0.0, v.pass});
    const SvbEstimate z = svb_fit(p_alpha_limit_zero(), U, 0, grid, 100000, seed);
    rows.push_back({"svb/zero_mass_exponent_zero", "p_1=0", z.alpha_hat, 0.0,
                    z.status == SvbFitStatus::zero_exponent && z.alpha_hat == 0.0});
  }
  return rows;
}

std::vector<CheckRow> entropy_rows(std::uint64_t seed) {
  std::vector<CheckRow> rows;
  {
    ArchitectureSpec arch{1, {1, 2, 1}, 4, OutputActivation::softmax};
    const EntropyBound b = covering_bound(arch, 1, 1.0);
    rows.push_back({"entropy/V", "L=1 m=(1,2,1)", b.V, 12.0, std::abs(b.V - 12.0) < 1e-9});
    const double expect = 5.0 * std::log(1152.0);
    rows.push_back({"entropy/raw_bound", "s=4 K=1 delta=1 log(1152^5)", b.log_raw, expect,
                    std::abs(b.log_raw - expect) <= 1e-12 * expect});
    Tally mono("entropy/raw_nonincreasing_in_delta", "L=1 m=(1,2,1) s=4");
    double prev = kInf;
    for (int i = 0; i < 20; ++i) {
      const double lr = covering_bound(arch, 1, std::pow(10.0, -3.0 + 0.3 * i)).log_raw;
      mono.add(lr, prev, lr <= prev);
      prev = lr;
    }
    rows.push_back(mono.row());
  }
  {
    // Substituted bound dominates the exact one when hidden widths are at most s.
    Tally t("entropy/substitution_dominates", "random architectures with m_l <= s");
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 200; ++i) {
      const int L = std::uniform_int_distribution<int>(1, 6)(rng);
      std::vector<int> w{std::uniform_int_distribution<int>(1, 4)(rng)};
      long long s = 0;
      for (int l = 0; l < L; ++l) w.push_back(std::uniform_int_distribution<int>(1, 20)(rng));
      const int K = std::uniform_int_distribution<int>(2, 5)(rng);
      w.push_back(K);
      for (int l = 1; l <= L; ++l) s = std::max<long long>(s, w[l]);
      s += std::uniform_int_distribution<int>(0, 50)(rng);
      const EntropyBound b = covering_bound(ArchitectureSpec{L, w, s, OutputActivation::softmax}, K, 0.1);
      double brute = 1.0;
      for (int m : w) brute *= m + 1.0;
      t.add(std::abs(b.V - brute) / brute, 1e-12, std::abs(b.V - brute) <= 1e-12 * brute);
      t.add(check_le(b.log_raw, b.log_substituted));
    }
    rows.push_back(t.row());
  }
  {
    const ToyClass toy = toy_step_class();
    Tally t("entropy/reduction_toy_steps", "8 step functions on 4 points, 10x10 (delta,tau) grid");
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const double delta = std::pow(10.0, -2.0 + 2.5 * i / 9.0), tau = std::pow(10.0, -2.0 + 2.0 * j / 9.0);
        const auto r = covering_reduction_bound(delta, tau, &toy);
        t.add(r.lhs_exact, r.rhs_exact, r.holds);
      }
    rows.push_back(t.row());
    Tally rnd("entropy/reduction_random", "64 functions on 8 points, 10x10 grid, 3 classes");
    for (int c = 0; c < 3; ++c) {
      const ToyClass cls = random_toy_class(64, 8, 1, seed + c);
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
          const double delta = std::pow(10.0, -1.5 + 2.0 * i / 9.0), tau = std::pow(10.0, -2.0 + 2.0 * j / 9.0);
          const auto r = covering_reduction_bound(delta, tau, &cls);
          rnd.add(r.lhs_exact, r.rhs_exact, r.holds);
        }
    }
    rows.push_back(rnd.row());
    ToyClass single{4, 1, {toy.values[0]}};
    const auto r = covering_reduction_bound(0.1, 0.5, &single);
    rows.push_back({"entropy/singleton", "one function", static_cast<double>(r.lhs_exact),
                    static_cast<double>(r.rhs_exact), r.lhs_exact == 1 && r.rhs_exact == 1});
  }
  return rows;
}

std::vector<CheckRow> prob_net_rows(std::uint64_t) {
  std::vector<CheckRow> rows;
  const int n = grid_points(10000);
  const auto grid = uniform_grid(n);
  for (double alpha : {0.5, 1.0}) {
    const CondProbFn p0 = p_alpha_family(alpha);
    const double Q = p_alpha_holder_radius(alpha);
    const HolderSpec spec{1.0, Q, 1};
    for (double M : {200.0, 400.0}) {
      std::vector<Network> H;
      for (int k = 0; k < 3; ++k)
        H.push_back(holder_interp_net([&](double x) { return p0(x)[k]; }, spec, M));
      const ProbNet pn = build_softmax_prob_net(H, 1.0, M, 3, {Q, 1, HypothesisPolicy::report});
      const auto rep = verify_prob_net(pn.net, p0, M, pn.info.C, grid);
      const std::string p = "alpha=" + fmt(alpha) + " M=" + fmt(M) + " Q=" + fmt(Q) +
                            " hypothesis=" + (pn.info.hypothesis_holds ? "holds" : "violated") +
                            " threshold=" + fmt(pn.info.threshold);
      rows.push_back(le_row("prob-net/sup_error", p, rep.sup_error, rep.sup_bound));
      rows.push_back(le_row("prob-net/min_q", p, rep.min_bound, rep.min_q));
      rows.push_back(le_row("prob-net/simplex", p, rep.simplex_defect, 1e-12));
      rows.push_back({"prob-net/budget", p + " depth=" + std::to_string(pn.net.depth()) +
                                             " width=" + std::to_string(pn.net.max_hidden_width()),
                      static_cast<double>(sparsity(pn.net)), pn.info.sparsity_budget, pn.info.within_budget});
      // The same network run as CondProbFn must agree with the batch path.
      const CondProbFn q = network_prob_fn(pn.net);
      Tally chi("prob-net/kl_le_chi2_pointwise", p);
      for (int i = 0; i < n; i += std::max(1, n / 500)) {
        const auto pv = p0(grid[i]);
        const auto qv = q(grid[i]);
        chi.add(check_le(kl_point(pv, qv), chi2(pv, qv)));
      }
      rows.push_back(chi.row());
    }
  }
  {
    // All channels identical gives the uniform distribution.
    const HolderSpec spec{1.0, 1.0, 1};
    const Network h = holder_interp_net([](double x) { return 0.3 + 0.4 * x; }, spec, 300.0);
    const std::vector<Network> H{h, h, h};
    const ProbNet pn = build_softmax_prob_net(H, 1.0, 300.0, 3, {1.0, 1, HypothesisPolicy::report});
    const auto out = evaluate_batch(pn.net, grid);
    double dev = 0.0;
    for (double v : out) dev = std::max(dev, std::abs(v - 1.0 / 3.0));
    rows.push_back(le_row("prob-net/identical_channels_uniform", "K=3", dev, 1e-15));
  }
  return rows;
}

std::vector<CheckRow> inverse_moment_rows(std::uint64_t seed) {
  std::vector<CheckRow> rows;
  const long long n = 1000000;
  {
    const int K = 3;
    const auto r = inverse_moment_bound_check([](std::span<const double>) { return 1.0 / 3.0; }, 1, 0.1, 1.0,
                                              std::pow(K, 1.0), n, seed);
    rows.push_back(le_row("inverse-moment/constant", "p=1/3 H=0.1 alpha=1 C=K", r.estimate - 3 * r.std_error, r.bound));
    rows.push_back({"inverse-moment/constant_value", "integral equals K", r.estimate, 3.0, std::abs(r.estimate - 3.0) < 1e-12});
  }
  {
    const auto p = p_alpha_family(0.5);
    const auto r = inverse_moment_bound_check([&](std::span<const double> x) { return p(x)[0]; }, 1, 0.1, 0.5,
                                              std::sqrt(3.0), n, seed);
    rows.push_back(le_row("inverse-moment/p_alpha", "alpha=0.5 H=0.1 C=3^alpha", r.estimate - 3 * r.std_error, r.bound));
  }
  {
    const auto p = p_alpha_family(1.0);
    const auto r = inverse_moment_bound_check([&](std::span<const double> x) { return p(x)[2]; }, 1, 1.0, 1.0, 3.0, n, seed);
    rows.push_back(le_row("inverse-moment/H_one", "H=1", r.estimate, 1.0));
  }
  return rows;
}

using SuiteFn = std::function<std::vector<CheckRow>(const SuiteOptions&)>;

const std::vector<std::pair<std::string, SuiteFn>>& suites() {
  static const std::vector<std::pair<std::string, SuiteFn>> table = {
      {"log-net", [](const SuiteOptions& o) { return log_net_rows(o.beta, o.M); }},
      {"partition",
       [](const SuiteOptions&) {
         std::vector<CheckRow> rows;
         for (double beta : acceptance_betas())
           for (double M : acceptance_ms()) {
             auto r = partition_rows(beta, M);
             rows.insert(rows.end(), r.begin(), r.end());
           }
         return rows;
       }},
      {"taylor", [](const SuiteOptions& o) { return taylor_rows(o.seed, 1000); }},
      {"mult", [](const SuiteOptions& o) { return mult_rows(o.seed); }},
      {"sandwich", [](const SuiteOptions& o) { return sandwich_rows(o.seed, o.trials); }},
      {"moment", [](const SuiteOptions& o) { return moment_rows(o.seed, o.trials); }},
      {"chi2", [](const SuiteOptions& o) { return chi2_rows(o.seed, o.trials); }},
      {"epsilon", [](const SuiteOptions& o) { return epsilon_rows(o.seed, 10 * o.trials); }},
      {"pseudometric", [](const SuiteOptions& o) { return pseudometric_rows(o.seed, o.trials); }},
      {"lipschitz", [](const SuiteOptions& o) { return lipschitz_rows(o.seed, o.trials); }},
      {"fm", [](const SuiteOptions&) { return fm_rows(); }},
      {"svb", [](const SuiteOptions& o) { return svb_rows(o.seed); }},
      {"entropy-toy", [](const SuiteOptions& o) { return entropy_rows(o.seed); }},
      {"prob-net", [](const SuiteOptions& o) { return prob_net_rows(o.seed); }},
      {"inverse-moment", [](const SuiteOptions& o) { return inverse_moment_rows(o.seed); }},
  };
  return table;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : suites()) names.push_back(name);
  return names;
}

bool is_suite(const std::string& name) {
  const auto names = suite_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& options) {
  for (const auto& [n, fn] : suites()) {
    if (n != name) continue;
    const auto t0 = Clock::now();
    SuiteResult r{name, fn(options), 0.0};
    r.seconds = seconds_since(t0);
    return r;
  }
  throw PreconditionError("unknown suite '" + name + "'");
}

// ---------------------------------------------------------------------------

const std::vector<double>& acceptance_betas() {
  static const std::vector<double> v{0.8, 1.0, 1.5, 2.5};
  return v;
}

const std::vector<double>& acceptance_ms() {
  static const std::vector<double> v{2.0, 10.0, 100.0, 1000.0};
  return v;
}

LogNetCheck check_log_net(double beta, double M, int points) {
  const auto t0 = Clock::now();
  LogNetCheck c;
  c.beta = beta;
  c.M = M;
  const LogNet ln = build_log_net(beta, M);
  std::vector<double> xs = uniform_grid(points);
  for (double b : breakpoints(ln.info.scheme)) xs.push_back(b);
  c.points = xs.size();
  const auto g = evaluate_batch(ln.net, xs);
  c.error_bound = 4.0 / M;
  c.floor = std::log(4.0 / M);
  c.min_G = kInf;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = std::abs(std::exp(g[i]) - xs[i]);
    if (e > c.max_error) {
      c.max_error = e;
      c.worst_x = xs[i];
    }
    c.min_G = std::min(c.min_G, g[i]);
  }
  c.depth = ln.net.depth();
  c.width = ln.net.max_hidden_width();
  c.sparsity = sparsity(ln.net);
  c.depth_budget = log_net_depth_budget(beta, M);
  c.width_budget = log_net_width_budget(beta, M);
  c.sparsity_budget = log_net_sparsity_budget(beta, M);
  c.valid = validate(ln.net).ok();
  c.seconds = seconds_since(t0);
  return c;
}

std::string to_json(const BuildSummary& s) {
  nlohmann::json j = {{"beta", s.beta},
                      {"M", s.M},
                      {"depth", s.depth},
                      {"max_hidden_width", s.width},
                      {"sparsity", s.sparsity},
                      {"depth_budget", s.depth_budget},
                      {"width_budget", s.width_budget},
                      {"sparsity_budget", s.sparsity_budget},
                      {"eta", s.eta},
                      {"R", s.R},
                      {"pieces", s.pieces},
                      {"valid", s.valid}};
  return j.dump(2);
}

BuildSummary build_and_save(double beta, double M, const std::string& path) {
  const LogNet ln = build_log_net(beta, M);
  BuildSummary s;
  s.beta = beta;
  s.M = M;
  s.depth = ln.net.depth();
  s.width = ln.net.max_hidden_width();
  s.sparsity = sparsity(ln.net);
  s.depth_budget = log_net_depth_budget(beta, M);
  s.width_budget = log_net_width_budget(beta, M);
  s.sparsity_budget = log_net_sparsity_budget(beta, M);
  s.eta = ln.info.eta;
  s.R = ln.info.scheme.R;
  s.pieces = ln.info.pieces;
  s.valid = validate(ln.net).ok();
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot open '" + path + "' for writing");
  out << serialize(ln.net);
  std::ofstream meta(path + ".meta.json");
  if (!meta) throw PreconditionError("cannot open '" + path + ".meta.json' for writing");
  meta << to_json(s) << '\n';
  return s;
}

// ---------------------------------------------------------------------------

double theorem_rhs(double C, int K, double C1, double M, double alpha) {
  const double a = std::min(alpha, 1.0);
  return C * K * std::pow(C1 + 1, 2 + a) / std::pow(M, 1 + a) * (1 + (alpha < 1 ? 1 / (1 - alpha) : 0.0) + std::log(M));
}

bool RateStudyResult::below_rhs() const {
  return std::all_of(points.begin(), points.end(), [](const RatePoint& p) { return p.risk <= p.theorem_rhs; });
}

bool RateStudyResult::nonnegative() const {
  return std::all_of(points.begin(), points.end(), [](const RatePoint& p) { return p.risk >= 0.0; });
}

bool RateStudyResult::crosscheck_ok() const {
  return std::all_of(points.begin(), points.end(), [](const RatePoint& p) { return p.crosscheck_diff <= 1e-12; });
}

RateStudyResult rate_study(const RateStudyConfig& cfg) {
  if (cfg.K != 3) throw PreconditionError("the built-in rate study uses the three-class p_alpha family");
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw PreconditionError("rate study needs alpha in [0, 1]");
  if (cfg.m_grid.size() < 2) throw PreconditionError("rate study needs at least two M values");
  for (double M : cfg.m_grid)
    if (!(M >= 2.0)) throw PreconditionError("M grid values must be at least 2");
  const auto t0 = Clock::now();
  RateStudyResult res;
  res.config = cfg;
  const CondProbFn p0 = cfg.alpha == 0.0 ? p_alpha_limit_zero() : p_alpha_family(cfg.alpha);
  res.Q = p_alpha_holder_radius(cfg.alpha);
  res.C = c_constant(res.Q, cfg.beta, 1);
  res.C1 = 2.0 * cfg.K * (4 + res.C);
  res.svb_C = std::pow(3.0, cfg.alpha);
  const HolderSpec spec{cfg.beta, res.Q, 1};

  std::vector<double> xs(cfg.quadrature_points);
  for (int i = 0; i < cfg.quadrature_points; ++i) xs[i] = (i + 0.5) / cfg.quadrature_points;
  const std::vector<double> cross = uniform_grid(cfg.crosscheck_points);

  for (double M : cfg.m_grid) {
    RatePoint pt;
    pt.M = M;
    pt.interp_intervals = holder_grid_size(spec, M);
    std::vector<Network> H;
    for (int k = 0; k < cfg.K; ++k) H.push_back(holder_interp_net([&](double x) { return p0(x)[k]; }, spec, M));
    const ProbNet pn = build_softmax_prob_net(H, cfg.beta, M, cfg.K, {res.Q, 1, HypothesisPolicy::report});
    pt.hypothesis_holds = pn.info.hypothesis_holds;
    pt.threshold = pn.info.threshold;
    pt.sparsity = sparsity(pn.net);

    const auto q = evaluate_by_channel(pn, xs);
    pt.risk = risk_on_grid(p0, q, xs, kInf).value;
    const auto rep = verify_prob_net(q, p0, M, res.C, xs);
    pt.sup_error = rep.sup_error;
    pt.min_q = rep.min_q;

    const auto full = evaluate_batch(pn.net, cross);
    const auto by_channel = evaluate_by_channel(pn, cross);
    for (std::size_t i = 0; i < full.size(); ++i)
      pt.crosscheck_diff = std::max(pt.crosscheck_diff, std::abs(full[i] - by_channel[i]));

    pt.theorem_rhs = theorem_rhs(res.svb_C, cfg.K, res.C1, M, cfg.alpha);
    res.points.push_back(pt);
  }
  std::vector<double> lx, ly;
  for (const auto& p : res.points) {
    lx.push_back(std::log(p.M));
    ly.push_back(std::log(p.risk));
  }
  res.slope = least_squares(lx, ly).slope;
  res.slope_bound = -(1.0 + std::min(cfg.alpha, 1.0)) + 0.3;
  res.seconds = seconds_since(t0);
  return res;
}

void write_csv(std::ostream& os, const RateStudyResult& r) {
  os << "alpha,beta,K,M,risk,theorem_rhs,hypothesis_holds,threshold,sup_error,min_q,interp_intervals,sparsity,"
        "crosscheck_diff\n";
  os << std::setprecision(12);
  for (const auto& p : r.points)
    os << r.config.alpha << ',' << r.config.beta << ',' << r.config.K << ',' << p.M << ',' << p.risk << ','
       << p.theorem_rhs << ',' << (p.hypothesis_holds ? 1 : 0) << ',' << p.threshold << ',' << p.sup_error << ','
       << p.min_q << ',' << p.interp_intervals << ',' << p.sparsity << ',' << p.crosscheck_diff << '\n';
}

// ---------------------------------------------------------------------------

namespace {

bool in_cube(std::span<const double> x, double lo, double hi) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v >= lo && v <= hi; });
}

// p_1 = 0 on [0,1/3]^d and 1 on [2/3,1]^d; linear in between for d = 1, one half otherwise.
CondProbFn interpolating_estimator(int d) {
  CondProbFn fn;
  fn.d = d;
  fn.K = 2;
  fn.eval = [d](std::span<const double> x) {
    double p1;
    if (in_cube(x, 0.0, 1.0 / 3.0))
      p1 = 0.0;
    else if (in_cube(x, 2.0 / 3.0, 1.0))
      p1 = 1.0;
    else
      p1 = d == 1 ? std::clamp(3.0 * x[0] - 1.0, 0.0, 1.0) : 0.5;
    return std::vector<double>{p1, 1.0 - p1};
  };
  return fn;
}

CondProbFn half_half(int d) {
  return {d, 2, [](std::span<const double>) { return std::vector<double>{0.5, 0.5}; }};
}

double infinite_risk_closed_form(double B, int d) {
  const double zero_regions = std::pow(1.0 / 3.0, d) * (B - std::log(2.0));
  if (d != 1) return zero_regions;
  return zero_regions + (1.0 - std::log(2.0) - std::exp(-B) / 2.0) / 3.0;
}

}  // namespace

bool InfiniteRiskResult::slope_ok() const { return std::abs(slope - closed_form_slope) <= 0.2 * closed_form_slope; }

bool InfiniteRiskResult::control_zero() const {
  return std::all_of(rows.begin(), rows.end(), [](const InfiniteRiskRow& r) { return r.control == 0.0; });
}

InfiniteRiskResult infinite_risk(const InfiniteRiskConfig& cfg) {
  if (cfg.b_grid.size() < 2) throw PreconditionError("infinite-risk needs at least two B values");
  if (cfg.n < 1 || cfg.d < 1) throw PreconditionError("infinite-risk needs n >= 1 and d >= 1");
  InfiniteRiskResult res;
  res.config = cfg;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);

  // Draw D_n conditioned on every point lying where the estimator already interpolates it.
  LabeledSample data{cfg.d, 2, {}, {}};
  std::vector<double> x(cfg.d);
  bool accepted = false;
  while (!accepted) {
    if (++res.attempts > cfg.max_attempts)
      throw PreconditionError("conditioning event too rare after " + std::to_string(cfg.max_attempts) +
                              " attempts; reduce n");
    data.X.clear();
    data.labels.clear();
    accepted = true;
    for (int i = 0; i < cfg.n && accepted; ++i) {
      for (double& v : x) v = U(rng);
      const int y = U(rng) < 0.5 ? 0 : 1;
      accepted = (y == 1 && in_cube(x, 0.0, 1.0 / 3.0)) || (y == 0 && in_cube(x, 2.0 / 3.0, 1.0));
      data.X.insert(data.X.end(), x.begin(), x.end());
      data.labels.push_back(y);
    }
  }
  const CondProbFn p0 = half_half(cfg.d);
  const CondProbFn p_hat = interpolating_estimator(cfg.d);
  res.train_loss = ce_loss(p_hat, data);

  std::vector<double> bs, risks;
  for (double B : cfg.b_grid) {
    InfiniteRiskRow row;
    row.B = B;
    const auto rep = risk_monte_carlo(p0, p_hat, B, cfg.mc_samples, cfg.seed + 1);
    row.risk = rep.value;
    row.std_error = rep.std_error;
    row.closed_form = infinite_risk_closed_form(B, cfg.d);
    row.control = risk_monte_carlo(p0, p0, B, std::min<long long>(cfg.mc_samples, 10000), cfg.seed + 2).value;
    res.rows.push_back(row);
    bs.push_back(B);
    risks.push_back(row.risk);
  }
  res.slope = least_squares(bs, risks).slope;
  res.closed_form_slope = std::pow(1.0 / 3.0, cfg.d);
  if (cfg.d == 1) res.quadrature_b2 = risk_quadrature(p0, p_hat, 2.0, cfg.quadrature_points).value;
  return res;
}

void write_csv(std::ostream& os, const InfiniteRiskResult& r) {
  os << "B,risk,std_error,closed_form,control\n";
  os << std::setprecision(12);
  for (const auto& row : r.rows)
    os << row.B << ',' << row.risk << ',' << row.std_error << ',' << row.closed_form << ',' << row.control << '\n';
}

}  // namespace relukit
