#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relukit/network.hpp"

namespace relukit {

struct EntropyBound {
  double delta = 1.0;
  int L = 0;
  int K = 1;
  int d = 1;
  long long s = 0;
  double V = 0.0;             // prod_{l=0}^{L+1} (m_l + 1)
  double raw = 0.0;           // (4 K (L+1) V^2 / delta)^{s+1}; may overflow to inf
  double log_raw = 0.0;       // log of the above, always finite for delta > 0
  double log_displayed = 0.0; // (s+1) log(2^{2L+6} (L+1) K^3 d^2 s^L / delta)
  double log_substituted = 0.0;  // log_raw with V replaced by d K s^L 2^{L+2}
  bool hidden_widths_le_s = false;  // condition under which V <= d K s^L 2^{L+2}
};

EntropyBound covering_bound(const ArchitectureSpec& arch, int K, double delta);

/// A finite class of functions D -> [0, inf)^K tabulated on n points; values[j] has n*K entries.
struct ToyClass {
  int points = 1;
  int K = 1;
  std::vector<std::vector<double>> values;
};

/// Eight step functions on a four-point domain.
ToyClass toy_step_class();
/// Random class of `size` functions on `points` points with entries in [0, 2].
ToyClass random_toy_class(int size, int points, int K, std::uint64_t seed);
/// Elementwise log of every function.
ToyClass log_class(const ToyClass& c);

/// Exact interior covering number under d_tau by exhaustive minimum set cover (class size <= 64).
int covering_number(const ToyClass& c, double radius, double tau);

struct ReductionRecord {
  double delta = 0.0;
  double tau = 0.0;
  std::string lhs;  // description of N(delta, log G, d_{log tau})
  std::string rhs;  // description of N(delta tau, G, d_tau)
  int lhs_exact = -1;
  int rhs_exact = -1;
  bool holds = true;
};

/// Parameter map of the reduction; when `toy` is given, both sides are also counted exactly.
ReductionRecord covering_reduction_bound(double delta, double tau, const ToyClass* toy = nullptr);

}  // namespace relukit
