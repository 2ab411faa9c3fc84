#include "relukit/log_approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relukit/algebra.hpp"

namespace relukit {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<double> zeros(int n) { return std::vector<double>(static_cast<std::size_t>(n), 0.0); }

}  // namespace

TaylorPiece make_taylor_piece(double center, int degree) {
  if (!(center > 0.0)) throw PreconditionError("Taylor center must be positive");
  if (degree < 0) throw PreconditionError("Taylor degree must be nonnegative");
  TaylorPiece p{center, degree, std::vector<double>(degree + 1, 0.0)};
  p.coefficients[0] = std::log(center);
  for (int a = 1; a <= degree; ++a) p.coefficients[0] -= 1.0 / a;
  for (int g = 1; g <= degree; ++g) {
    const double sign = (g % 2 == 1) ? 1.0 : -1.0;  // (-1)^(1 - g)
    double s = 0.0;
    for (int a = g; a <= degree; ++a) s += binomial(a, g) / a;
    p.coefficients[g] = sign * s * std::pow(center, -g);
  }
  return p;
}

double taylor_eval(const TaylorPiece& piece, double x) {
  double v = 0.0;
  for (int g = piece.degree; g >= 0; --g) v = v * x + piece.coefficients[g];
  return v;
}

double taylor_eval_centered(const TaylorPiece& piece, double x) {
  const double t = (x - piece.center) / piece.center;
  double v = 0.0;
  for (int j = piece.degree; j >= 1; --j) v = v * t + ((j % 2 == 1) ? 1.0 : -1.0) / j;
  return std::log(piece.center) + v * t;
}

double taylor_error_bound(const TaylorPiece& piece, double x) {
  const double k1 = piece.degree + 1.0;
  return std::pow(std::abs((x - piece.center) / std::min(x, piece.center)), k1) / k1;
}

double coefficient_sum_bound(double center, int degree) {
  return (degree + 1.0) * std::ldexp(1.0, degree + 1) * std::pow(std::min(1.0, center), -degree - 1.0);
}

int floor_beta(double beta) {
  if (!(beta > 0.0)) throw PreconditionError("beta must be positive");
  return static_cast<int>(std::ceil(beta)) - 1;
}

int ceil_beta(double beta) { return floor_beta(beta) + 1; }

PartitionScheme build_partition(double beta, double M) {
  if (!(beta > 0.0)) throw PreconditionError("build_partition: beta must be positive");
  if (!(M >= 2.0)) throw PreconditionError("build_partition: M must be at least 2");
  PartitionScheme s;
  s.beta = beta;
  s.M = M;
  s.floor_beta = floor_beta(beta);
  s.ceil_beta = s.floor_beta + 1;
  const int c = s.ceil_beta;
  s.base = std::ldexp(1.0, c) * std::pow(static_cast<double>(c), static_cast<double>(s.floor_beta) / c);
  // base^c = 2^(c^2) c^f, so dividing by base^c instead keeps b_1 = 1/M exact.
  auto point = [&](double offset) { return std::pow((s.base + offset) / s.base, c) / M; };
  const double target = 1.0 - 1.0 / M;
  s.a.push_back(std::numeric_limits<double>::quiet_NaN());
  for (int r = 1;; ++r) {
    s.a.push_back(point(r / 2.0 - 0.75));
    if (s.a.back() >= target) {
      s.R = r;
      break;
    }
  }
  s.b.assign(s.R + 1, 0.0);
  s.b[0] = s.a[1];
  for (int r = 1; r < s.R; ++r) s.b[r] = point(r / 2.0 - 0.5);
  s.b[s.R] = s.a[s.R];
  return s;
}

int partition_count_closed_form(double beta, double M) {
  const int f = floor_beta(beta), c = f + 1;
  const double base = std::ldexp(1.0, c) * std::pow(static_cast<double>(c), static_cast<double>(f) / c);
  return static_cast<int>(std::ceil(2.0 * base * std::pow(M - 1.0, 1.0 / c) - 2.0 * (base - 0.75)));
}

namespace {

void check_range(const PartitionScheme& s, int r, HatKind kind) {
  const bool ok = kind == HatKind::F ? (r >= 2 && r <= s.R) : (r >= 1 && r <= s.R);
  if (!ok) throw PreconditionError("hat index out of range");
}

// Rising from lo to 1 at peak then falling to 0 at hi.
double tent(double lo, double peak, double hi, double x) {
  if (x <= lo || x >= hi) return 0.0;
  return x <= peak ? (x - lo) / (peak - lo) : (hi - x) / (hi - peak);
}

struct Kink {
  double t;
  double coef;
};

}  // namespace

double hat_function(const PartitionScheme& s, int r, HatKind kind, double x) {
  check_range(s, r, kind);
  if (kind == HatKind::F) return tent(s.a[r - 1], s.b[r - 1], s.a[r], x);
  if (r == 1) return (x >= s.a[1] && x <= s.b[1]) ? (s.b[1] - x) / (s.b[1] - s.a[1]) : 0.0;
  if (r == s.R) return (x >= s.b[s.R - 1] && x <= s.a[s.R]) ? (x - s.b[s.R - 1]) / (s.a[s.R] - s.b[s.R - 1]) : 0.0;
  return tent(s.b[r - 1], s.a[r], s.b[r], x);
}

double hat_normalizer(const PartitionScheme& s) {
  const int c = s.ceil_beta;
  return std::ldexp(1.0, 1 + 2 * c + c * c) * std::pow(static_cast<double>(c), s.floor_beta) * s.M;
}

Network hat_network(const PartitionScheme& s, int r, HatKind kind) {
  check_range(s, r, kind);
  std::vector<Kink> kinks;
  bool falling_h1 = false;
  auto three = [&](double lo, double peak, double hi) {
    const double up = 1.0 / (peak - lo), down = 1.0 / (hi - peak);
    kinks = {{lo, up}, {peak, -(up + down)}, {hi, down}};
  };
  if (kind == HatKind::F) {
    three(s.a[r - 1], s.b[r - 1], s.a[r]);
  } else if (r == 1) {
    falling_h1 = true;
  } else if (r == s.R) {
    kinks = {{s.b[s.R - 1], 1.0 / (s.a[s.R] - s.b[s.R - 1])}};
  } else {
    three(s.b[r - 1], s.a[r], s.b[r]);
  }
  const double C = hat_normalizer(s);
  // The peak coefficient can meet the normaliser exactly; rounding may then overshoot one by an ulp.
  auto bounded = [](double w) { return std::abs(w) > 1.0 && std::abs(w) < 1.0 + 1e-12 ? std::copysign(1.0, w) : w; };
  std::vector<Triplet> w0, w1;
  std::vector<double> v1;
  if (falling_h1) {
    w0.push_back({0, 0, -1.0});
    v1.push_back(-s.b[1]);
    w1.push_back({0, 0, bounded(1.0 / (s.b[1] - s.a[1]) / C)});
  } else {
    for (std::size_t i = 0; i < kinks.size(); ++i) {
      const int row = static_cast<int>(i);
      // Breakpoints above one are realised as 2 s(x/2 - t/2) to keep the shift bounded.
      const double half = kinks[i].t > 1.0 ? 0.5 : 1.0;
      w0.push_back({row, 0, half});
      v1.push_back(kinks[i].t * half);
      w1.push_back({0, row, bounded(kinks[i].coef / half / C)});
    }
  }
  const int width = static_cast<int>(v1.size());
  Network core({{SparseMatrix::from_triplets(width, 1, w0), zeros(1)},
                {SparseMatrix::from_triplets(1, width, w1), v1}},
               OutputActivation::identity);
  return compose(core, scale_net(C));
}

long long hat_depth_budget(const PartitionScheme& s) {
  const int c = s.ceil_beta;
  return 3LL * ((1 + c) * (1 + c) +
                static_cast<long long>(std::floor(std::log2(s.M * std::pow(static_cast<double>(c), s.floor_beta)))));
}

double hat_sparsity_budget(const PartitionScheme& s) {
  const int c = s.ceil_beta;
  return 8.0 * ((1 + c) * (1 + c) + std::log2(s.M * std::pow(static_cast<double>(c), s.floor_beta)));
}

Network projection_net(double a1, double aR) {
  if (!(a1 > 0.0)) throw PreconditionError("projection_net: a_1 must be positive");
  if (!(aR > a1)) throw PreconditionError("projection_net: a_R must exceed a_1");
  const double upper = std::min(aR, 1.0);
  std::vector<Triplet> w0 = {{1, 0, 1.0}, {2, 0, 1.0}};
  std::vector<Triplet> w1 = {{0, 0, 1.0}, {0, 1, 1.0}, {0, 2, -1.0}};
  return Network({{SparseMatrix::from_triplets(3, 1, w0), zeros(1)},
                  {SparseMatrix::from_triplets(1, 3, w1), {-a1, a1, upper}}},
                 OutputActivation::identity);
}

double project(const PartitionScheme& s, double x) { return std::max(s.a[1], std::min(x, s.a[s.R])); }

double t_beta(const PartitionScheme& s, double x) {
  if (!(x >= s.a[1] && x <= s.a[s.R])) throw PreconditionError("t_beta: x outside [a_1, a_R]");
  const int k = s.floor_beta;
  // F_r is supported on [a_{r-1}, a_r], H_r on [b_{r-1}, b_r]; only neighbours of x contribute.
  const auto ia = std::upper_bound(s.a.begin() + 1, s.a.end(), x) - s.a.begin();
  const auto ib = std::upper_bound(s.b.begin(), s.b.end(), x) - s.b.begin();
  double v = 0.0;
  for (long r = std::max<long>(2, ia - 1); r <= std::min<long>(s.R, ia + 1); ++r) {
    const double h = hat_function(s, static_cast<int>(r), HatKind::F, x);
    if (h != 0.0) v += h * taylor_eval(make_taylor_piece(s.a[r], k), x);
  }
  for (long r = std::max<long>(1, ib - 1); r <= std::min<long>(s.R, ib + 1); ++r) {
    const double h = hat_function(s, static_cast<int>(r), HatKind::H, x);
    if (h != 0.0) v += h * taylor_eval(make_taylor_piece(s.b[r], k), x);
  }
  return v;
}

int log_net_eta(double beta, double M) {
  const int f = floor_beta(beta), c = f + 1;
  return static_cast<int>(std::ceil(std::log2(static_cast<double>(c)) + f + 2 + (c + 1) * std::log2(M) + c * std::log2(3.0)));
}

long long log_net_depth_budget(double beta, double M) {
  return static_cast<long long>(std::floor(40.0 * (beta + 2) * (beta + 2) * std::log2(M)));
}

long long log_net_width_budget(double beta, double M) {
  const double c = ceil_beta(beta);
  return static_cast<long long>(std::floor(48.0 * c * c * c * std::pow(2.0, beta) * std::pow(M, 1.0 / beta)));
}

double log_net_sparsity_budget(double beta, double M) {
  return 4284.0 * std::pow(beta + 2, 5) * std::pow(2.0, beta) * std::pow(M, 1.0 / beta) * std::log2(M);
}

std::vector<double> breakpoints(const PartitionScheme& s) {
  std::vector<double> pts;
  for (int r = 1; r <= s.R; ++r) pts.push_back(s.a[r]);
  for (int r = 0; r <= s.R; ++r) pts.push_back(s.b[r]);
  pts.erase(std::remove_if(pts.begin(), pts.end(), [](double t) { return t < 0.0 || t > 1.0; }), pts.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

namespace {

// Maps (F, pi) to sum_gamma n_gamma F pi^gamma, or F to n_0 F when degree is zero.
Network piece_polynomial(const std::vector<double>& normalized, const std::vector<Network>& mults) {
  const int degree = static_cast<int>(normalized.size()) - 1;
  const int inputs = degree == 0 ? 1 : 2;
  std::vector<Network> terms;
  terms.push_back(precompose_linear(identity_chain(1, 1), SparseMatrix::from_triplets(1, inputs, {{0, 0, 1.0}})));
  for (int g = 1; g <= degree; ++g) {
    std::vector<Triplet> sel = {{0, 0, 1.0}};
    for (int i = 1; i <= g; ++i) sel.push_back({i, 1, 1.0});
    terms.push_back(precompose_linear(mults[g], SparseMatrix::from_triplets(g + 1, 2, std::move(sel))));
  }
  int depth = 0;
  for (const auto& t : terms) depth = std::max(depth, t.depth());
  for (auto& t : terms) t = synchronize_to(t, depth);
  std::vector<Triplet> row;
  for (int g = 0; g <= degree; ++g) row.push_back({0, g, normalized[g]});
  return postcompose_linear(parallelize(terms), SparseMatrix::from_triplets(1, degree + 1, std::move(row)));
}

}  // namespace

LogNet build_log_net(double beta, double M) {
  if (!(M >= 2.0)) throw PreconditionError("build_log_net: M must be at least 2");
  LogNet out;
  LogNetInfo& info = out.info;
  info.scheme = build_partition(beta, M);
  const PartitionScheme& s = info.scheme;
  const int k = s.floor_beta, c = s.ceil_beta;
  info.eta = log_net_eta(beta, M);
  info.norm = c * std::ldexp(1.0, k + 1) * std::pow(M, c);
  info.lower_bound = std::log(4.0 / M);

  std::vector<Network> mults(k + 1);
  for (int g = 1; g <= k; ++g) mults[g] = mult_net(info.eta, g + 1);

  std::vector<Network> pieces;
  auto add_piece = [&](int r, HatKind kind, double center) {
    const Network U = hat_network(s, r, kind);
    const TaylorPiece tp = make_taylor_piece(center, k);
    std::vector<double> normalized(tp.coefficients);
    for (double& v : normalized) v /= info.norm;
    const Network front = k == 0 ? U : parallelize(U, identity_chain(U.depth(), 1));
    pieces.push_back(compose(front, piece_polynomial(normalized, mults)));
  };
  for (int r = 2; r <= s.R; ++r) add_piece(r, HatKind::F, s.a[r]);
  for (int r = 1; r <= s.R; ++r) add_piece(r, HatKind::H, s.b[r]);
  info.pieces = static_cast<int>(pieces.size());

  std::vector<Triplet> ones;
  for (int i = 0; i < info.pieces; ++i) ones.push_back({0, i, 1.0});
  Network sum = postcompose_linear(parallelize(pieces), SparseMatrix::from_triplets(1, info.pieces, std::move(ones)));
  pieces.clear();
  pieces.shrink_to_fit();
  const Network core = compose(projection_net(s.a[1], s.a[s.R]), sum);

  // max(S, l) = s(S - l) + l s(1). The shift is moved a few ulps down so that the
  // rescaled floor never lands above log(4/M) after rounding.
  const double l = info.lower_bound / info.norm;
  info.lower_shift = l - 16.0 * std::numeric_limits<double>::epsilon() * std::abs(l);
  Network floor_layer({{SparseMatrix::from_triplets(2, 1, {{0, 0, 1.0}}), zeros(1)},
                       {SparseMatrix::from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, info.lower_shift}}),
                        {info.lower_shift, -1.0}}},
                      OutputActivation::identity);
  const Network tail = extend_negative(scale_net(info.norm), -1, {0});
  out.net = compose_linear(compose_linear(core, floor_layer), tail);
  return out;
}

}  // namespace relukit
