#pragma once

#include <vector>

#include "relukit/network.hpp"

namespace relukit {

/// T_c^kappa(x) = sum_gamma c_gamma x^gamma, the degree-kappa Taylor polynomial of log around c.
struct TaylorPiece {
  double center = 1.0;
  int degree = 0;
  std::vector<double> coefficients;
};

TaylorPiece make_taylor_piece(double center, int degree);
double taylor_eval(const TaylorPiece& piece, double x);
/// Same polynomial in powers of (x - c); stable near the center.
double taylor_eval_centered(const TaylorPiece& piece, double x);
/// (1/(kappa+1)) |(x - c)/(x min c)|^(kappa+1)
double taylor_error_bound(const TaylorPiece& piece, double x);
/// (kappa+1) 2^(kappa+1) (1 min c)^(-kappa-1), valid for 0 < c <= e.
double coefficient_sum_bound(double center, int degree);

/// Largest integer strictly below beta, and that plus one.
int floor_beta(double beta);
int ceil_beta(double beta);

struct PartitionScheme {
  double beta = 1.0;
  double M = 2.0;
  int ceil_beta = 1;
  int floor_beta = 0;
  int R = 0;
  double base = 0.0;  // 2^ceil * ceil^(floor/ceil)
  std::vector<double> a;  // a[1..R]; a[0] unused
  std::vector<double> b;  // b[0..R] with b[0] = a[1], b[R] = a[R]
};

PartitionScheme build_partition(double beta, double M);
/// Closed-form ceiling expression for R.
int partition_count_closed_form(double beta, double M);

enum class HatKind { F, H };

double hat_function(const PartitionScheme& scheme, int r, HatKind kind, double x);
/// Largest coefficient bound 2^(1 + 2c + c^2) c^f M used to normalise hat networks.
double hat_normalizer(const PartitionScheme& scheme);
Network hat_network(const PartitionScheme& scheme, int r, HatKind kind);
long long hat_depth_budget(const PartitionScheme& scheme);
double hat_sparsity_budget(const PartitionScheme& scheme);

/// pi(x) = max(a_1, min(x, a_R)) on [0, 1].
Network projection_net(double a1, double aR);

/// Partition-of-unity blend of Taylor pieces; x must lie in [a_1, a_R].
double t_beta(const PartitionScheme& scheme, double x);
double project(const PartitionScheme& scheme, double x);

struct LogNetInfo {
  PartitionScheme scheme;
  int eta = 0;
  double norm = 0.0;         // ceil * 2^(floor + 1) * M^ceil
  double lower_bound = 0.0;  // log(4/M)
  double lower_shift = 0.0;  // shift actually stored in the lower-bound layer
  int pieces = 0;
};

struct LogNet {
  Network net;
  LogNetInfo info;
};

int log_net_eta(double beta, double M);
long long log_net_depth_budget(double beta, double M);
long long log_net_width_budget(double beta, double M);
double log_net_sparsity_budget(double beta, double M);

/// G with |e^G(x) - x| <= 4/M and G(x) >= log(4/M) on [0, 1].
LogNet build_log_net(double beta, double M);

/// Breakpoints a_r, b_r that fall in [0, 1].
std::vector<double> breakpoints(const PartitionScheme& scheme);

}  // namespace relukit
