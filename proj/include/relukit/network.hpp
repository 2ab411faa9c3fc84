#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relukit/errors.hpp"

namespace relukit {

enum class OutputActivation { identity, softmax };

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Only nonzero entries are stored.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols);

  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries);
  static SparseMatrix from_dense(int rows, int cols, std::span<const double> row_major);
  static SparseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t stored() const { return values_.size(); }

  double at(int i, int j) const;
  std::vector<double> to_dense() const;
  std::vector<Triplet> triplets() const;

  const std::vector<std::int32_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::int32_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  SparseMatrix scaled_rows(std::span<const double> factors) const;
  SparseMatrix transposed() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::int32_t> row_ptr_{0};
  std::vector<std::int32_t> col_idx_;
  std::vector<double> values_;
};

/// Product a * b of compatible sparse matrices.
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// One affine stage: shift v_j of the incoming units followed by W_j.
struct Layer {
  SparseMatrix W;
  std::vector<double> v;
};

/// f(x) = psi W_L s_{v_L} W_{L-1} ... s_{v_1} W_0 x with s_v(y) = max(y - v, 0).
/// The shift of layer 0 is stored for bookkeeping and never applied.
class Network {
 public:
  Network() = default;
  Network(std::vector<Layer> layers, OutputActivation output);

  int depth() const { return static_cast<int>(layers_.size()) - 1; }
  int input_width() const { return widths_.front(); }
  int output_width() const { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  const std::vector<Layer>& layers() const { return layers_; }
  const Layer& layer(int j) const { return layers_.at(j); }
  OutputActivation output() const { return output_; }
  int max_hidden_width() const;

 private:
  std::vector<Layer> layers_;
  std::vector<int> widths_;
  OutputActivation output_ = OutputActivation::identity;
};

struct ArchitectureSpec {
  int depth = 0;
  std::vector<int> widths;
  long long sparsity = 0;
  OutputActivation output = OutputActivation::identity;
};

ArchitectureSpec architecture_of(const Network& net);

std::vector<double> evaluate(const Network& net, std::span<const double> x);
double evaluate_scalar(const Network& net, double x);

/// Row-major inputs (n x m_0) to row-major outputs (n x m_{L+1}).
std::vector<double> evaluate_batch(const Network& net, std::span<const double> xs);

long long sparsity(const Network& net);

struct ValidationReport {
  std::vector<std::string> issues;
  double max_abs_parameter = 0.0;
  bool ok() const { return issues.empty(); }
};

ValidationReport validate(const Network& net);

void softmax_inplace(std::span<double> z);

enum class MatrixEncoding { automatic, dense, coordinate };

struct SerializeOptions {
  MatrixEncoding encoding = MatrixEncoding::automatic;
  // Layers with more dense entries than this use the coordinate form in automatic mode.
  std::size_t dense_entry_limit = std::size_t{1} << 20;
};

std::string serialize(const Network& net, const SerializeOptions& options = {});
Network deserialize(const std::string& text, bool strict = false);

}  // namespace relukit
