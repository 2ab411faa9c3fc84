#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "relukit/network.hpp"

namespace relukit {

/// RELUKIT_GRID_POINTS when set to a positive integer, otherwise `fallback`.
int grid_points(int fallback);

// ---------------------------------------------------------------------------
// Check rows shared by every suite.

struct CheckRow {
  std::string name;
  std::string params;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
  double margin() const { return rhs - lhs; }
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckRow> rows;
  double seconds = 0.0;
  long long violations() const;
  bool ok() const { return violations() == 0; }
};

/// name,params,lhs,rhs,margin,verdict
void write_csv(std::ostream& os, const std::vector<CheckRow>& rows, bool header = true);

struct SuiteOptions {
  std::uint64_t seed = 7;
  double beta = 1.0;  // log-net suite
  double M = 10.0;    // log-net suite
  int trials = 10000;
};

std::vector<std::string> suite_names();
bool is_suite(const std::string& name);
SuiteResult run_suite(const std::string& name, const SuiteOptions& options = {});

// ---------------------------------------------------------------------------
// Log network.

struct LogNetCheck {
  double beta = 1.0, M = 2.0;
  double max_error = 0.0, error_bound = 0.0, worst_x = 0.0;
  double min_G = 0.0, floor = 0.0;
  int depth = 0, width = 0;
  long long sparsity = 0;
  long long depth_budget = 0, width_budget = 0;
  double sparsity_budget = 0.0;
  bool valid = false;
  std::size_t points = 0;
  double seconds = 0.0;
  bool error_ok() const { return max_error <= error_bound; }
  bool floor_ok() const { return min_G >= floor - 1e-12; }
  bool budgets_ok() const {
    return depth <= depth_budget && width <= width_budget && static_cast<double>(sparsity) <= sparsity_budget && valid;
  }
};

/// Builds G and evaluates it on `points` uniform points of [0,1] plus the partition breakpoints.
LogNetCheck check_log_net(double beta, double M, int points);

/// Acceptance grid for the log network: {0.8, 1, 1.5, 2.5} x {2, 10, 100, 1000}.
const std::vector<double>& acceptance_betas();
const std::vector<double>& acceptance_ms();

struct BuildSummary {
  double beta = 1.0, M = 2.0;
  int depth = 0, width = 0;
  long long sparsity = 0;
  long long depth_budget = 0, width_budget = 0;
  double sparsity_budget = 0.0;
  int eta = 0, R = 0, pieces = 0;
  bool valid = false;
};

/// Builds G, writes it to `path` and a metadata sidecar to `path` + ".meta.json".
BuildSummary build_and_save(double beta, double M, const std::string& path);
std::string to_json(const BuildSummary& s);

// ---------------------------------------------------------------------------
// Approximation-rate study.

struct RateStudyConfig {
  double alpha = 1.0;
  double beta = 1.0;
  int K = 3;
  std::vector<double> m_grid{50, 100, 200, 400, 800};
  int quadrature_points = 100000;
  int crosscheck_points = 257;
  std::uint64_t seed = 7;
};

struct RatePoint {
  double M = 0.0;
  double risk = 0.0;
  double theorem_rhs = 0.0;
  bool hypothesis_holds = false;
  double threshold = 0.0;
  double sup_error = 0.0;
  double min_q = 0.0;
  double crosscheck_diff = 0.0;  // max |channelwise - full network| on the cross-check points
  int interp_intervals = 0;
  long long sparsity = 0;
};

struct RateStudyResult {
  RateStudyConfig config;
  double Q = 0.0, C = 0.0, C1 = 0.0, svb_C = 0.0;
  std::vector<RatePoint> points;
  double slope = 0.0;
  double slope_bound = 0.0;
  double seconds = 0.0;
  bool slope_ok() const { return slope <= slope_bound; }
  bool below_rhs() const;
  bool nonnegative() const;
  bool crosscheck_ok() const;
};

RateStudyResult rate_study(const RateStudyConfig& cfg);
void write_csv(std::ostream& os, const RateStudyResult& r);

/// C K (C1+1)^{2+(a^1)} / M^{1+(a^1)} (1 + 1{a<1}/(1-a) + log M)
double theorem_rhs(double C, int K, double C1, double M, double alpha);

// ---------------------------------------------------------------------------
// Infinite-risk demonstration.

struct InfiniteRiskConfig {
  std::vector<double> b_grid{2, 4, 8, 16, 32};
  int n = 10;
  int d = 1;
  std::uint64_t seed = 7;
  long long mc_samples = 100000;
  int quadrature_points = 100000;
  long long max_attempts = 100000000;
};

struct InfiniteRiskRow {
  double B = 0.0;
  double risk = 0.0;
  double std_error = 0.0;
  double closed_form = 0.0;
  double control = 0.0;
};

struct InfiniteRiskResult {
  InfiniteRiskConfig config;
  long long attempts = 0;
  double train_loss = 0.0;  // CE of the interpolating estimator on the conditioned sample
  std::vector<InfiniteRiskRow> rows;
  double slope = 0.0;
  double closed_form_slope = 0.0;
  double quadrature_b2 = -1.0;  // d = 1 only
  bool slope_ok() const;
  bool control_zero() const;
};

InfiniteRiskResult infinite_risk(const InfiniteRiskConfig& cfg);
void write_csv(std::ostream& os, const InfiniteRiskResult& r);

}  // namespace relukit
