#pragma once

#include <functional>
#include <span>
#include <vector>

#include "relukit/cond_prob.hpp"
#include "relukit/network.hpp"

namespace relukit {

/// Hölder ball C^beta([0,1]^d, Q). Only d = 1, beta <= 1 has a built-in approximator.
struct HolderSpec {
  double beta = 1.0;
  double Q = 1.0;
  int d = 1;
};

/// (2Q+1)(1+d^2+beta^2)6^d + Q 3^beta
double c_constant(double Q, double beta, int d);

/// Smallest n with Q n^-beta <= C/M.
int holder_grid_size(const HolderSpec& spec, double M);

/// Exact network for the piecewise-linear interpolant of samples f(i/n), i = 0..n, clamped to [0,1].
Network holder_interp_net(std::span<const double> samples, const HolderSpec& spec, double M);
/// Samples f on the grid from holder_grid_size, or on n + 1 points when n > 0.
Network holder_interp_net(const std::function<double(double)>& f, const HolderSpec& spec, double M, int n = 0);

enum class HypothesisPolicy { enforce, report };

struct ProbNetOptions {
  double Q = 1.0;
  int d = 1;
  HypothesisPolicy policy = HypothesisPolicy::enforce;
};

struct ProbNetInfo {
  double C = 0.0;          // C_{Q,beta,d}
  double threshold = 0.0;  // M must exceed this
  bool hypothesis_holds = false;
  long long depth_budget = 0;
  long long width_budget = 0;
  double sparsity_budget = 0.0;
  bool within_budget = false;
};

struct ProbNet {
  Network net;                  // softmax output, K channels
  Network log_net;              // shared G
  std::vector<Network> channels;  // H_k
  ProbNetInfo info;
};

double prob_net_threshold(int K, double Q, double beta, int d);

ProbNet build_softmax_prob_net(std::span<const Network> H, double beta, double M, int K,
                               const ProbNetOptions& options = {});

/// Same values as evaluating `pn.net`, computed channel by channel with G applied once per distinct H value.
/// Returns n x K row-major.
std::vector<double> evaluate_by_channel(const ProbNet& pn, std::span<const double> xs);

std::vector<double> log_softmax(std::span<const double> z);

struct ProbNetReport {
  double sup_error = 0.0;
  double sup_bound = 0.0;
  double worst_x = 0.0;
  double min_q = 1.0;
  double min_bound = 0.0;
  double min_x = 0.0;
  double simplex_defect = 0.0;
  bool sup_ok = false;
  bool min_ok = false;
  bool simplex_ok = false;
  bool ok() const { return sup_ok && min_ok && simplex_ok; }
};

/// Checks ||q - p0||_inf <= 2K(4+C)/M, q >= 1/M and simplex membership on a grid of scalar inputs.
/// `q_values` is the n x K output of the network at `grid`.
ProbNetReport verify_prob_net(std::span<const double> q_values, const CondProbFn& p0, double M, double C,
                              std::span<const double> grid);
ProbNetReport verify_prob_net(const Network& q, const CondProbFn& p0, double M, double C,
                              std::span<const double> grid);

}  // namespace relukit
