#include "relukit/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace relukit {

SparseMatrix::SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {
  if (rows < 0 || cols < 0) throw ShapeError("negative matrix dimension");
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> entries) {
  SparseMatrix m(rows, cols);
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  m.col_idx_.reserve(entries.size());
  m.values_.reserve(entries.size());
  std::size_t k = 0;
  for (int i = 0; i < rows; ++i) {
    while (k < entries.size() && entries[k].row == i) {
      const int j = entries[k].col;
      if (j < 0 || j >= cols) throw ShapeError("triplet column out of range");
      double sum = 0.0;
      while (k < entries.size() && entries[k].row == i && entries[k].col == j) sum += entries[k++].value;
      if (sum != 0.0) {
        m.col_idx_.push_back(j);
        m.values_.push_back(sum);
      }
    }
    m.row_ptr_[i + 1] = static_cast<std::int32_t>(m.values_.size());
  }
  if (k != entries.size()) throw ShapeError("triplet row out of range");
  return m;
}

SparseMatrix SparseMatrix::from_dense(int rows, int cols, std::span<const double> row_major) {
  if (row_major.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw ShapeError("dense matrix size does not match its shape");
  SparseMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double w = row_major[static_cast<std::size_t>(i) * cols + j];
      if (w != 0.0) {
        m.col_idx_.push_back(j);
        m.values_.push_back(w);
      }
    }
    m.row_ptr_[i + 1] = static_cast<std::int32_t>(m.values_.size());
  }
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  SparseMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    m.col_idx_.push_back(i);
    m.values_.push_back(1.0);
    m.row_ptr_[i + 1] = i + 1;
  }
  return m;
}

double SparseMatrix::at(int i, int j) const {
  for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
    if (col_idx_[k] == j) return values_[k];
  return 0.0;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> d(static_cast<std::size_t>(rows_) * cols_, 0.0);
  for (int i = 0; i < rows_; ++i)
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      d[static_cast<std::size_t>(i) * cols_ + col_idx_[k]] = values_[k];
  return d;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int i = 0; i < rows_; ++i)
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.push_back({i, col_idx_[k], values_[k]});
  return t;
}

SparseMatrix SparseMatrix::scaled_rows(std::span<const double> factors) const {
  if (factors.size() != static_cast<std::size_t>(rows_)) throw ShapeError("row factor count mismatch");
  auto t = triplets();
  for (auto& e : t) e.value *= factors[e.row];
  return from_triplets(rows_, cols_, std::move(t));
}

SparseMatrix SparseMatrix::transposed() const {
  auto t = triplets();
  for (auto& e : t) std::swap(e.row, e.col);
  return from_triplets(cols_, rows_, std::move(t));
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matrix product dimension mismatch");
  std::vector<Triplet> out;
  std::vector<double> acc(b.cols(), 0.0);
  std::vector<int> touched;
  std::vector<char> mark(b.cols(), 0);
  const auto& ap = a.row_ptr();
  const auto& bp = b.row_ptr();
  for (int i = 0; i < a.rows(); ++i) {
    touched.clear();
    for (auto k = ap[i]; k < ap[i + 1]; ++k) {
      const int r = a.col_idx()[k];
      const double w = a.values()[k];
      for (auto q = bp[r]; q < bp[r + 1]; ++q) {
        const int c = b.col_idx()[q];
        if (!mark[c]) {
          mark[c] = 1;
          touched.push_back(c);
        }
        acc[c] += w * b.values()[q];
      }
    }
    for (int c : touched) {
      out.push_back({i, c, acc[c]});
      acc[c] = 0.0;
      mark[c] = 0;
    }
  }
  return SparseMatrix::from_triplets(a.rows(), b.cols(), std::move(out));
}

Network::Network(std::vector<Layer> layers, OutputActivation output)
    : layers_(std::move(layers)), output_(output) {
  if (layers_.empty()) throw ShapeError("a network needs at least one affine layer");
  widths_.push_back(layers_.front().W.cols());
  for (std::size_t j = 0; j < layers_.size(); ++j) {
    const auto& l = layers_[j];
    if (l.W.cols() != widths_.back())
      throw ShapeError("layer " + std::to_string(j) + " expects " + std::to_string(l.W.cols()) +
                       " inputs but receives " + std::to_string(widths_.back()));
    if (l.v.size() != static_cast<std::size_t>(l.W.cols()))
      throw ShapeError("layer " + std::to_string(j) + " shift length differs from its input width");
    widths_.push_back(l.W.rows());
  }
  for (int w : widths_)
    if (w <= 0) throw ShapeError("widths must be positive");
}

int Network::max_hidden_width() const {
  int w = 0;
  for (std::size_t j = 1; j + 1 < widths_.size(); ++j) w = std::max(w, widths_[j]);
  return w;
}

ArchitectureSpec architecture_of(const Network& net) {
  return {net.depth(), net.widths(), sparsity(net), net.output()};
}

void softmax_inplace(std::span<double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& e : z) {
    e = std::exp(e - mx);
    sum += e;
  }
  for (double& e : z) e /= sum;
}

namespace {

constexpr int kBatch = 16;

// out[i] = W in (+ relu with the next layer's shift when `next_shift` is given).
void forward_block(const SparseMatrix& W, const double* in, double* out, const double* next_shift) {
  const auto* rp = W.row_ptr().data();
  const auto* ci = W.col_idx().data();
  const auto* val = W.values().data();
  for (int i = 0; i < W.rows(); ++i) {
    double acc[kBatch] = {};
    for (auto k = rp[i]; k < rp[i + 1]; ++k) {
      const double w = val[k];
      const double* x = in + static_cast<std::size_t>(ci[k]) * kBatch;
      for (int b = 0; b < kBatch; ++b) acc[b] += w * x[b];
    }
    double* y = out + static_cast<std::size_t>(i) * kBatch;
    if (next_shift) {
      const double s = next_shift[i];
      for (int b = 0; b < kBatch; ++b) y[b] = std::max(acc[b] - s, 0.0);
    } else {
      for (int b = 0; b < kBatch; ++b) y[b] = acc[b];
    }
  }
}

}  // namespace

std::vector<double> evaluate_batch(const Network& net, std::span<const double> xs) {
  const int m0 = net.input_width();
  const int mout = net.output_width();
  if (xs.size() % static_cast<std::size_t>(m0) != 0) throw ShapeError("batch size is not a multiple of the input width");
  const std::size_t n = xs.size() / m0;
  std::vector<double> result(n * mout);
  int widest = 0;
  for (int w : net.widths()) widest = std::max(widest, w);
  std::vector<double> a(static_cast<std::size_t>(widest) * kBatch), b(a.size());
  const auto& layers = net.layers();
  for (std::size_t start = 0; start < n; start += kBatch) {
    const std::size_t cnt = std::min<std::size_t>(kBatch, n - start);
    std::fill(a.begin(), a.begin() + static_cast<std::size_t>(m0) * kBatch, 0.0);
    for (std::size_t p = 0; p < cnt; ++p)
      for (int c = 0; c < m0; ++c) a[static_cast<std::size_t>(c) * kBatch + p] = xs[(start + p) * m0 + c];
    for (std::size_t j = 0; j < layers.size(); ++j) {
      const double* shift = j + 1 < layers.size() ? layers[j + 1].v.data() : nullptr;
      forward_block(layers[j].W, a.data(), b.data(), shift);
      std::swap(a, b);
    }
    for (std::size_t p = 0; p < cnt; ++p) {
      double* row = &result[(start + p) * mout];
      for (int c = 0; c < mout; ++c) row[c] = a[static_cast<std::size_t>(c) * kBatch + p];
      if (net.output() == OutputActivation::softmax) softmax_inplace({row, static_cast<std::size_t>(mout)});
    }
  }
  return result;
}

std::vector<double> evaluate(const Network& net, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(net.input_width()))
    throw ShapeError("input has length " + std::to_string(x.size()) + ", network expects " +
                     std::to_string(net.input_width()));
  return evaluate_batch(net, x);
}

double evaluate_scalar(const Network& net, double x) {
  if (net.input_width() != 1 || net.output_width() != 1) throw ShapeError("network is not scalar to scalar");
  return evaluate_batch(net, std::span<const double>(&x, 1))[0];
}

long long sparsity(const Network& net) {
  long long s = 0;
  for (const auto& l : net.layers()) {
    for (double w : l.W.values()) s += (w != 0.0);
    for (double v : l.v) s += (v != 0.0);
  }
  return s;
}

ValidationReport validate(const Network& net) {
  ValidationReport r;
  const auto& layers = net.layers();
  for (std::size_t j = 0; j < layers.size(); ++j) {
    const auto& l = layers[j];
    for (double w : l.W.values()) {
      r.max_abs_parameter = std::max(r.max_abs_parameter, std::abs(w));
      if (!std::isfinite(w)) r.issues.push_back("layer " + std::to_string(j) + ": non-finite weight");
    }
    for (double v : l.v) {
      r.max_abs_parameter = std::max(r.max_abs_parameter, std::abs(v));
      if (!std::isfinite(v)) r.issues.push_back("layer " + std::to_string(j) + ": non-finite shift");
    }
    if (j == 0 && std::any_of(l.v.begin(), l.v.end(), [](double v) { return v != 0.0; }))
      r.issues.push_back("v_0 must be identically zero");
    if (j > 0 && l.v.size() != static_cast<std::size_t>(net.widths()[j]))
      r.issues.push_back("layer " + std::to_string(j) + ": shift length mismatch");
  }
  if (r.max_abs_parameter > 1.0) {
    std::ostringstream os;
    os.precision(17);
    os << "parameter bound violated: max |parameter| = " << r.max_abs_parameter;
    r.issues.push_back(os.str());
  }
  return r;
}

// Serialization -------------------------------------------------------------

std::string serialize(const Network& net, const SerializeOptions& options) {
  using nlohmann::json;
  json doc;
  doc["L"] = net.depth();
  doc["widths"] = net.widths();
  json layers = json::array();
  for (const auto& l : net.layers()) {
    json jl;
    const std::size_t entries = static_cast<std::size_t>(l.W.rows()) * l.W.cols();
    const bool dense = options.encoding == MatrixEncoding::dense ||
                       (options.encoding == MatrixEncoding::automatic && entries <= options.dense_entry_limit);
    if (dense) {
      const auto d = l.W.to_dense();
      json rows = json::array();
      for (int i = 0; i < l.W.rows(); ++i)
        rows.push_back(std::vector<double>(d.begin() + static_cast<std::ptrdiff_t>(i) * l.W.cols(),
                                           d.begin() + static_cast<std::ptrdiff_t>(i + 1) * l.W.cols()));
      jl["W"] = std::move(rows);
    } else {
      json coo = json::array();
      for (const auto& t : l.W.triplets()) coo.push_back(json::array({t.row, t.col, t.value}));
      jl["W_coo"] = {{"rows", l.W.rows()}, {"cols", l.W.cols()}, {"entries", std::move(coo)}};
    }
    jl["v"] = l.v;
    layers.push_back(std::move(jl));
  }
  doc["layers"] = std::move(layers);
  doc["output"] = net.output() == OutputActivation::softmax ? "softmax" : "identity";
  return doc.dump();
}

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError("expected an object", path);
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing key '") + key + "'", path);
  return *it;
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError("expected a number", path);
  return j.get<double>();
}

int int_at(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError("expected an integer", path);
  return j.get<int>();
}

}  // namespace

Network deserialize(const std::string& text, bool strict) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), "byte " + std::to_string(e.byte));
  }
  const int L = int_at(require(doc, "L", ""), "/L");
  const auto& jw = require(doc, "widths", "");
  if (!jw.is_array()) throw ParseError("expected an array", "/widths");
  std::vector<int> widths;
  for (std::size_t i = 0; i < jw.size(); ++i) widths.push_back(int_at(jw[i], "/widths/" + std::to_string(i)));
  if (L < 0 || widths.size() != static_cast<std::size_t>(L) + 2)
    throw ParseError("widths must have L+2 entries", "/widths");
  const auto& jl = require(doc, "layers", "");
  if (!jl.is_array() || jl.size() != static_cast<std::size_t>(L) + 1)
    throw ParseError("layers must have L+1 entries", "/layers");
  std::vector<Layer> layers;
  for (int j = 0; j <= L; ++j) {
    const std::string base = "/layers/" + std::to_string(j);
    const auto& lj = jl[j];
    const int rows = widths[j + 1], cols = widths[j];
    Layer layer;
    if (lj.is_object() && lj.contains("W_coo")) {
      const auto& coo = lj["W_coo"];
      if (int_at(require(coo, "rows", base + "/W_coo"), base + "/W_coo/rows") != rows ||
          int_at(require(coo, "cols", base + "/W_coo"), base + "/W_coo/cols") != cols)
        throw ParseError("matrix shape disagrees with widths", base + "/W_coo");
      const auto& ents = require(coo, "entries", base + "/W_coo");
      if (!ents.is_array()) throw ParseError("expected an array", base + "/W_coo/entries");
      std::vector<Triplet> t;
      t.reserve(ents.size());
      for (std::size_t k = 0; k < ents.size(); ++k) {
        const std::string p = base + "/W_coo/entries/" + std::to_string(k);
        if (!ents[k].is_array() || ents[k].size() != 3) throw ParseError("expected [row, col, value]", p);
        const int r = int_at(ents[k][0], p + "/0"), c = int_at(ents[k][1], p + "/1");
        if (r < 0 || r >= rows || c < 0 || c >= cols) throw ParseError("entry index out of range", p);
        t.push_back({r, c, number_at(ents[k][2], p + "/2")});
      }
      layer.W = SparseMatrix::from_triplets(rows, cols, std::move(t));
    } else {
      const auto& W = require(lj, "W", base);
      if (!W.is_array() || W.size() != static_cast<std::size_t>(rows))
        throw ParseError("W must have widths[j+1] rows", base + "/W");
      std::vector<double> dense;
      dense.reserve(static_cast<std::size_t>(rows) * cols);
      for (int i = 0; i < rows; ++i) {
        const std::string p = base + "/W/" + std::to_string(i);
        if (!W[i].is_array() || W[i].size() != static_cast<std::size_t>(cols))
          throw ParseError("row must have widths[j] entries", p);
        for (int c = 0; c < cols; ++c) dense.push_back(number_at(W[i][c], p + "/" + std::to_string(c)));
      }
      layer.W = SparseMatrix::from_dense(rows, cols, dense);
    }
    const auto& v = require(lj, "v", base);
    if (!v.is_array() || v.size() != static_cast<std::size_t>(cols))
      throw ParseError("v must have widths[j] entries", base + "/v");
    for (std::size_t i = 0; i < v.size(); ++i) layer.v.push_back(number_at(v[i], base + "/v/" + std::to_string(i)));
    layers.push_back(std::move(layer));
  }
  const auto& out = require(doc, "output", "");
  OutputActivation act;
  if (out == "identity") {
    act = OutputActivation::identity;
  } else if (out == "softmax") {
    act = OutputActivation::softmax;
  } else {
    throw ParseError("output must be \"identity\" or \"softmax\"", "/output");
  }
  Network net(std::move(layers), act);
  if (strict) {
    const auto report = validate(net);
    if (!report.ok()) throw ValidationError(report.issues.front());
  }
  return net;
}

}  // namespace relukit
