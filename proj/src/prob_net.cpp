#include "relukit/prob_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "relukit/algebra.hpp"
#include "relukit/errors.hpp"
#include "relukit/log_approx.hpp"

namespace relukit {

double c_constant(double Q, double beta, int d) {
  return (2 * Q + 1) * (1 + d * d + beta * beta) * std::pow(6.0, d) + Q * std::pow(3.0, beta);
}

namespace {

void require_builtin(const HolderSpec& spec) {
  if (spec.d != 1 || !(spec.beta > 0.0) || spec.beta > 1.0)
    throw UnsupportedError("built-in Hölder approximator covers d = 1 and 0 < beta <= 1 only; supply H_k networks directly");
  if (!(spec.Q > 0.0)) throw PreconditionError("Hölder radius must be positive");
}

Network clamp_unit() {
  return Network({{SparseMatrix::from_triplets(2, 1, {{0, 0, 1.0}, {1, 0, 1.0}}), {0.0}},
                  {SparseMatrix::from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, -1.0}}), {0.0, 1.0}}},
                 OutputActivation::identity);
}

}  // namespace

int holder_grid_size(const HolderSpec& spec, double M) {
  require_builtin(spec);
  const double ratio = spec.Q * M / c_constant(spec.Q, spec.beta, spec.d);
  return std::max(1, static_cast<int>(std::ceil(std::pow(ratio, 1.0 / spec.beta) - 1e-9)));
}

Network holder_interp_net(std::span<const double> samples, const HolderSpec& spec, double M) {
  require_builtin(spec);
  if (samples.size() < 2) throw PreconditionError("holder_interp_net needs at least two samples");
  const int n = static_cast<int>(samples.size()) - 1;
  const double C = c_constant(spec.Q, spec.beta, spec.d);
  if (spec.Q * std::pow(1.0 / n, spec.beta) > C / M * (1 + 1e-12))
    throw PreconditionError("sample grid too coarse: Q h^beta exceeds C/M (need at least " +
                            std::to_string(holder_grid_size(spec, M)) + " intervals)");
  for (double s : samples)
    if (!(s >= 0.0 && s <= 1.0)) throw PreconditionError("samples must lie in [0, 1]");

  // Unit 0 is the constant 1; unit i >= 1 is s(x - (i-1)/n).
  std::vector<double> coef(n + 1);
  coef[0] = samples[0];
  double prev_slope = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double slope = (samples[i] - samples[i - 1]) * n;
    coef[i] = slope - prev_slope;
    prev_slope = slope;
  }
  double S = 1.0;
  for (double c : coef) S = std::max(S, std::abs(c));
  std::vector<Triplet> w0, w1;
  std::vector<double> v1(n + 1);
  v1[0] = -1.0;
  for (int i = 1; i <= n; ++i) {
    w0.push_back({i, 0, 1.0});
    v1[i] = static_cast<double>(i - 1) / n;
  }
  for (int i = 0; i <= n; ++i) w1.push_back({0, i, coef[i] / S});
  Network core({{SparseMatrix::from_triplets(n + 1, 1, std::move(w0)), {0.0}},
                {SparseMatrix::from_triplets(1, n + 1, std::move(w1)), std::move(v1)}},
               OutputActivation::identity);
  return compose(compose(core, scale_net(S)), clamp_unit());
}

Network holder_interp_net(const std::function<double(double)>& f, const HolderSpec& spec, double M, int n) {
  if (n <= 0) n = holder_grid_size(spec, M);
  std::vector<double> samples(n + 1);
  for (int i = 0; i <= n; ++i) samples[i] = f(static_cast<double>(i) / n);
  return holder_interp_net(samples, spec, M);
}

double prob_net_threshold(int K, double Q, double beta, int d) {
  const double C = c_constant(Q, beta, d);
  return std::max({K * (4 + C), std::pow(beta + 1, beta), std::pow(Q + 1, beta / d) * std::exp(beta)});
}

ProbNet build_softmax_prob_net(std::span<const Network> H, double beta, double M, int K,
                               const ProbNetOptions& options) {
  if (K < 2 || static_cast<int>(H.size()) != K) throw ShapeError("expected one H network per class");
  const int m0 = H[0].input_width();
  for (const auto& h : H) {
    if (h.input_width() != m0) throw ShapeError("H networks have different input widths");
    if (h.output_width() != 1) throw ShapeError("each H network must be scalar-valued");
    if (h.output() != OutputActivation::identity) throw ShapeError("H networks need identity output");
  }
  ProbNet pn;
  ProbNetInfo& info = pn.info;
  const int d = options.d;
  info.C = c_constant(options.Q, beta, d);
  info.threshold = prob_net_threshold(K, options.Q, beta, d);
  info.hypothesis_holds = M > info.threshold;
  if (!info.hypothesis_holds && options.policy == HypothesisPolicy::enforce)
    throw PreconditionError("M = " + std::to_string(M) + " does not exceed K(4+C) v (beta+1)^beta v (Q+1)^(beta/d) e^beta = " +
                            std::to_string(info.threshold));

  pn.log_net = build_log_net(beta, M).net;
  pn.channels.assign(H.begin(), H.end());
  std::vector<Network> composed;
  int depth = 0;
  for (const auto& h : H) {
    composed.push_back(compose(h, pn.log_net));
    depth = std::max(depth, composed.back().depth());
  }
  for (auto& c : composed) c = synchronize_to(c, depth);
  pn.net = with_output(parallelize(composed), OutputActivation::softmax);

  const double lm = std::log2(M);
  info.depth_budget = 3LL * static_cast<long long>(std::ceil(lm * (d / beta + 1))) *
                          (1 + static_cast<long long>(std::ceil(std::log2(d + beta)))) +
                      static_cast<long long>(std::floor(40 * (beta + 2) * (beta + 2) * lm)) + 2;
  const double cb = std::ceil(beta);
  info.width_budget =
      static_cast<long long>(std::floor(48.0 * K * (d + cb * cb * cb) * std::pow(2.0, beta) * std::pow(M, d / beta)));
  info.sparsity_budget = 4707.0 * K * std::pow(d + beta + 1, 4 + d) * std::pow(2.0, beta) * std::pow(M, d / beta) * lm *
                         (d / beta + 1);
  info.within_budget = pn.net.depth() <= info.depth_budget && pn.net.max_hidden_width() <= info.width_budget &&
                       static_cast<double>(sparsity(pn.net)) <= info.sparsity_budget;
  return pn;
}

std::vector<double> evaluate_by_channel(const ProbNet& pn, std::span<const double> xs) {
  const int K = static_cast<int>(pn.channels.size());
  const int m0 = pn.net.input_width();
  const std::size_t n = xs.size() / m0;
  std::vector<double> all;
  std::vector<std::vector<double>> h(K);
  for (int k = 0; k < K; ++k) {
    h[k] = evaluate_batch(pn.channels[k], xs);
    all.insert(all.end(), h[k].begin(), h[k].end());
  }
  // The composed network feeds each H value through s(.) before G.
  for (double& v : all) v = std::max(v, 0.0);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  const std::vector<double> g = evaluate_batch(pn.log_net, all);
  std::vector<double> out(n * K);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) {
      const double v = std::max(h[k][i], 0.0);
      out[i * K + k] = g[std::lower_bound(all.begin(), all.end(), v) - all.begin()];
    }
    softmax_inplace({&out[i * K], static_cast<std::size_t>(K)});
  }
  return out;
}

std::vector<double> log_softmax(std::span<const double> z) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : z) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(z.begin(), z.end());
  for (double& v : out) v -= lse;
  return out;
}

ProbNetReport verify_prob_net(std::span<const double> q_values, const CondProbFn& p0, double M, double C,
                              std::span<const double> grid) {
  const int K = p0.K;
  if (q_values.size() != grid.size() * K) throw ShapeError("q_values must hold K entries per grid point");
  ProbNetReport rep;
  rep.sup_bound = 2.0 * K * (4 + C) / M;
  rep.min_bound = 1.0 / M;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = p0(grid[i]);
    std::span<const double> q = q_values.subspan(i * K, K);
    for (int k = 0; k < K; ++k) {
      const double e = std::abs(q[k] - p[k]);
      if (e > rep.sup_error) {
        rep.sup_error = e;
        rep.worst_x = grid[i];
      }
      if (q[k] < rep.min_q) {
        rep.min_q = q[k];
        rep.min_x = grid[i];
      }
    }
    rep.simplex_defect = std::max(rep.simplex_defect, simplex_defect(q));
  }
  rep.sup_ok = rep.sup_error <= rep.sup_bound;
  rep.min_ok = rep.min_q >= rep.min_bound;
  rep.simplex_ok = rep.simplex_defect <= 1e-12 && rep.min_q > 0.0;
  return rep;
}

ProbNetReport verify_prob_net(const Network& q, const CondProbFn& p0, double M, double C,
                              std::span<const double> grid) {
  if (q.input_width() != 1 || q.output_width() != p0.K) throw ShapeError("network does not match p0");
  const auto values = evaluate_batch(q, grid);
  return verify_prob_net(values, p0, M, C, grid);
}

}  // namespace relukit
