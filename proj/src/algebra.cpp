#include "relukit/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace relukit {

namespace {

std::vector<double> zeros(int n) { return std::vector<double>(static_cast<std::size_t>(n), 0.0); }

void require_identity_output(const Network& f, const char* op) {
  if (f.output() != OutputActivation::identity)
    throw PreconditionError(std::string(op) + ": inner network must have identity output");
}

SparseMatrix block_diagonal(const std::vector<const SparseMatrix*>& blocks) {
  int rows = 0, cols = 0;
  std::vector<Triplet> t;
  for (const auto* b : blocks) {
    for (auto e : b->triplets()) t.push_back({e.row + rows, e.col + cols, e.value});
    rows += b->rows();
    cols += b->cols();
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

SparseMatrix vertical(const std::vector<const SparseMatrix*>& blocks) {
  int rows = 0;
  const int cols = blocks.front()->cols();
  std::vector<Triplet> t;
  for (const auto* b : blocks) {
    if (b->cols() != cols) throw ShapeError("vertical stacking needs equal column counts");
    for (auto e : b->triplets()) t.push_back({e.row + rows, e.col, e.value});
    rows += b->rows();
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

SparseMatrix dense_matrix(int rows, int cols, std::initializer_list<double> values) {
  std::vector<double> v(values);
  return SparseMatrix::from_dense(rows, cols, v);
}

}  // namespace

Network compose(const Network& f, const Network& g, std::span<const double> v) {
  require_identity_output(f, "compose");
  if (f.output_width() != g.input_width()) throw ShapeError("compose: output width of f differs from input width of g");
  if (v.size() != static_cast<std::size_t>(f.output_width())) throw ShapeError("compose: shift length mismatch");
  std::vector<Layer> layers = f.layers();
  for (std::size_t j = 0; j < g.layers().size(); ++j) {
    Layer l = g.layers()[j];
    if (j == 0) l.v.assign(v.begin(), v.end());
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers), g.output());
}

Network compose(const Network& f, const Network& g) {
  const auto v = zeros(f.output_width());
  return compose(f, g, v);
}

Network compose_linear(const Network& f, const Network& g) {
  require_identity_output(f, "compose_linear");
  if (f.output_width() != g.input_width())
    throw ShapeError("compose_linear: output width of f differs from input width of g");
  std::vector<Layer> layers(f.layers().begin(), f.layers().end() - 1);
  const Layer& last = f.layers().back();
  layers.push_back({multiply(g.layers().front().W, last.W), last.v});
  for (std::size_t j = 1; j < g.layers().size(); ++j) layers.push_back(g.layers()[j]);
  return Network(std::move(layers), g.output());
}

Network parallelize(std::span<const Network> nets) {
  if (nets.empty()) throw ShapeError("parallelize: no networks");
  const int L = nets.front().depth();
  const int m0 = nets.front().input_width();
  for (const auto& n : nets) {
    require_identity_output(n, "parallelize");
    if (n.depth() != L) throw ShapeError("parallelize: depths differ, synchronize first");
    if (n.input_width() != m0) throw ShapeError("parallelize: input widths differ");
  }
  std::vector<Layer> layers;
  for (int j = 0; j <= L; ++j) {
    std::vector<const SparseMatrix*> blocks;
    std::vector<double> v;
    for (const auto& n : nets) {
      blocks.push_back(&n.layers()[j].W);
      if (j > 0) v.insert(v.end(), n.layers()[j].v.begin(), n.layers()[j].v.end());
    }
    if (j == 0) {
      layers.push_back({vertical(blocks), zeros(m0)});
    } else {
      layers.push_back({block_diagonal(blocks), std::move(v)});
    }
  }
  return Network(std::move(layers), OutputActivation::identity);
}

Network parallelize(const Network& f, const Network& g) {
  const Network both[] = {f, g};
  return parallelize(both);
}

Network stack(std::span<const Network> nets) {
  if (nets.empty()) throw ShapeError("stack: no networks");
  const int L = nets.front().depth();
  for (const auto& n : nets) {
    require_identity_output(n, "stack");
    if (n.depth() != L) throw ShapeError("stack: depths differ, synchronize first");
  }
  std::vector<Layer> layers;
  for (int j = 0; j <= L; ++j) {
    std::vector<const SparseMatrix*> blocks;
    std::vector<double> v;
    for (const auto& n : nets) {
      blocks.push_back(&n.layers()[j].W);
      v.insert(v.end(), n.layers()[j].v.begin(), n.layers()[j].v.end());
    }
    if (j == 0) std::fill(v.begin(), v.end(), 0.0);
    layers.push_back({block_diagonal(blocks), std::move(v)});
  }
  return Network(std::move(layers), OutputActivation::identity);
}

Network depth_synchronize(const Network& f, int a) {
  if (a <= 0) throw PreconditionError("depth_synchronize: a must be positive");
  const int m0 = f.input_width();
  std::vector<Layer> layers;
  for (int i = 0; i < a; ++i) layers.push_back({SparseMatrix::identity(m0), zeros(m0)});
  for (std::size_t j = 0; j < f.layers().size(); ++j) {
    Layer l = f.layers()[j];
    if (j == 0) l.v = zeros(m0);
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers), f.output());
}

Network synchronize_to(const Network& f, int depth) {
  if (depth < f.depth()) throw PreconditionError("synchronize_to: target depth below network depth");
  return depth == f.depth() ? f : depth_synchronize(f, depth - f.depth());
}

Network embed(const Network& net, const ArchitectureSpec& target) {
  const auto& w = net.widths();
  if (target.depth != net.depth() || target.widths.size() != w.size())
    throw PreconditionError("embed: depth differs from target");
  if (target.widths.front() != w.front() || target.widths.back() != w.back())
    throw PreconditionError("embed: input and output widths must match the target");
  for (std::size_t j = 0; j < w.size(); ++j)
    if (target.widths[j] < w[j]) throw PreconditionError("embed: target width smaller than network width");
  if (target.sparsity < sparsity(net)) throw PreconditionError("embed: target sparsity below network sparsity");
  if (target.output != net.output()) throw PreconditionError("embed: output activation differs");
  std::vector<Layer> layers;
  for (std::size_t j = 0; j < net.layers().size(); ++j) {
    const auto& l = net.layers()[j];
    std::vector<double> v = l.v;
    v.resize(target.widths[j], 0.0);
    layers.push_back({SparseMatrix::from_triplets(target.widths[j + 1], target.widths[j], l.W.triplets()), std::move(v)});
  }
  return Network(std::move(layers), net.output());
}

Network remove_inactive(const Network& net) {
  std::vector<Layer> layers = net.layers();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t j = 1; j < layers.size(); ++j) {
      const SparseMatrix& in = layers[j - 1].W;
      const SparseMatrix& out = layers[j].W;
      const int width = in.rows();
      std::vector<char> reads(width, 0);
      for (int c : out.col_idx()) reads[c] = 1;
      std::vector<int> keep;
      for (int i = 0; i < width; ++i) {
        const bool empty_row = in.row_ptr()[i] == in.row_ptr()[i + 1];
        const bool constant_zero = empty_row && layers[j].v[i] >= 0.0;
        if (reads[i] && !constant_zero) keep.push_back(i);
      }
      if (keep.empty()) keep.push_back(0);
      if (static_cast<int>(keep.size()) == width) continue;
      changed = true;
      std::vector<int> index(width, -1);
      for (std::size_t k = 0; k < keep.size(); ++k) index[keep[k]] = static_cast<int>(k);
      const int kept = static_cast<int>(keep.size());
      std::vector<Triplet> tin, tout;
      for (auto e : in.triplets())
        if (index[e.row] >= 0) tin.push_back({index[e.row], e.col, e.value});
      for (auto e : out.triplets())
        if (index[e.col] >= 0) tout.push_back({e.row, index[e.col], e.value});
      std::vector<double> v;
      for (int i : keep) v.push_back(layers[j].v[i]);
      layers[j - 1].W = SparseMatrix::from_triplets(kept, in.cols(), std::move(tin));
      layers[j].W = SparseMatrix::from_triplets(out.rows(), kept, std::move(tout));
      layers[j].v = std::move(v);
    }
  }
  return Network(std::move(layers), net.output());
}

long long full_param_count(const ArchitectureSpec& arch) {
  const auto& m = arch.widths;
  long long total = 0;
  for (std::size_t j = 0; j + 1 < m.size(); ++j) total += static_cast<long long>(m[j] + 1) * m[j + 1];
  return total - m.back();
}

Network extend_negative(const Network& net, int sign, const std::vector<int>& neg_indices) {
  require_identity_output(net, "extend_negative");
  if (sign != 1 && sign != -1) throw PreconditionError("extend_negative: sign must be +1 or -1");
  const int m0 = net.input_width();
  for (int j : neg_indices)
    if (j < 0 || j >= m0) throw ShapeError("extend_negative: flagged index out of range");
  if (neg_indices.size() > 16) throw PreconditionError("extend_negative: too many flagged coordinates");

  // Spot check: the network must vanish when a flagged coordinate is nonpositive.
  const double probes[] = {0.0, 0.5, 1.0};
  for (int j : neg_indices) {
    for (double xj : {0.0, -0.25, -1.0}) {
      for (double other : probes) {
        std::vector<double> x(m0, other);
        x[j] = xj;
        for (double y : evaluate(net, x))
          if (std::abs(y) > 1e-9)
            throw PreconditionError("extend_negative: network does not vanish on the flagged nonpositive region");
      }
    }
  }

  const std::size_t copies = std::size_t{1} << neg_indices.size();
  std::vector<Network> parts;
  std::vector<double> signs;
  for (std::size_t mask = 0; mask < copies; ++mask) {
    std::vector<double> col_sign(m0, 1.0);
    double out_sign = 1.0;
    for (std::size_t b = 0; b < neg_indices.size(); ++b) {
      if (mask >> b & 1U) {
        col_sign[neg_indices[b]] = -1.0;
        out_sign *= sign;
      }
    }
    std::vector<Layer> layers = net.layers();
    auto t = layers[0].W.triplets();
    for (auto& e : t) e.value *= col_sign[e.col];
    layers[0].W = SparseMatrix::from_triplets(layers[0].W.rows(), m0, std::move(t));
    const int last = static_cast<int>(layers.size()) - 1;
    std::vector<double> factor(layers[last].W.rows(), out_sign);
    layers[last].W = layers[last].W.scaled_rows(factor);
    parts.emplace_back(std::move(layers), OutputActivation::identity);
  }
  const Network par = parallelize(parts);
  const int k = net.output_width();
  std::vector<Triplet> sum;
  for (std::size_t c = 0; c < copies; ++c)
    for (int i = 0; i < k; ++i) sum.push_back({i, static_cast<int>(c) * k + i, 1.0});
  return postcompose_linear(par, SparseMatrix::from_triplets(k, static_cast<int>(copies) * k, std::move(sum)));
}

Network scale_net(double C) {
  if (C == 0.0 || !std::isfinite(C)) throw PreconditionError("scale_net: C must be finite and nonzero");
  if (std::abs(C) <= 1.0) {
    return Network({{dense_matrix(1, 1, {1.0}), zeros(1)}, {dense_matrix(1, 1, {C}), zeros(1)}},
                   OutputActivation::identity);
  }
  const int k = static_cast<int>(std::ceil(std::log2(std::abs(C))));
  std::vector<Layer> layers;
  for (int i = 0; i < k; ++i) {
    layers.push_back({dense_matrix(2, 1, {1.0, 1.0}), zeros(1)});
    const double w = i + 1 == k ? std::ldexp(C, -k) : 1.0;
    layers.push_back({dense_matrix(1, 2, {w, w}), zeros(2)});
  }
  return Network(std::move(layers), OutputActivation::identity);
}

Network identity_chain(int depth, int dim) {
  if (depth < 1 || dim < 1) throw PreconditionError("identity_chain: depth and dim must be positive");
  std::vector<Layer> layers;
  for (int i = 0; i <= depth; ++i) layers.push_back({SparseMatrix::identity(dim), zeros(dim)});
  return Network(std::move(layers), OutputActivation::identity);
}

namespace {

// Product of two inputs in [0,1]. Hidden units per chain layer:
// 0 s(t_u), 1 s(t_u - 2^{1-2k}), 2 partial sum for u, 3 s(t_w), 4 s(t_w - 2^{1-2k}),
// 5 w minus partial sum for w, 6 x, 7 y.  xy = g(u) - g(w) + w - 1/4 with g(t) = t(1 - t),
// u = (x - y + 1)/2, w = (x + y)/2, and g = sum of scaled tent iterates.
Network pair_mult(int m) {
  auto chain_shift = [](int k) {
    const double thr = std::ldexp(1.0, 1 - 2 * k);
    // Layer one sees u - 1/2 in the first two units.
    const double off = k == 1 ? -0.5 : 0.0;
    return std::vector<double>{off, thr + off, 0, 0, thr, 0, 0, 0};
  };
  std::vector<Layer> layers;
  layers.push_back({dense_matrix(8, 2, {0.5, -0.5, 0.5, -0.5, 0, 0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 1, 0, 0, 1}), zeros(2)});
  for (int k = 1; k < m; ++k) {
    layers.push_back({dense_matrix(8, 8, {0.5, -1, 0, 0, 0, 0, 0, 0,   //
                                          0.5, -1, 0, 0, 0, 0, 0, 0,   //
                                          0.5, -1, 1, 0, 0, 0, 0, 0,   //
                                          0, 0, 0, 0.5, -1, 0, 0, 0,   //
                                          0, 0, 0, 0.5, -1, 0, 0, 0,   //
                                          0, 0, 0, -0.5, 1, 1, 0, 0,   //
                                          0, 0, 0, 0, 0, 0, 1, 0,      //
                                          0, 0, 0, 0, 0, 0, 0, 1}),
                      chain_shift(k)});
  }
  // c = S_u + R_u + D_w - R_w, shifted by 1/4 in the next layer, forwarded with x and y.
  layers.push_back({dense_matrix(3, 8, {0.5, -1, 1, -0.5, 1, 1, 0, 0,  //
                                        0, 0, 0, 0, 0, 0, 1, 0,        //
                                        0, 0, 0, 0, 0, 0, 0, 1}),
                    chain_shift(m)});
  // units c, c - x, y
  layers.push_back({dense_matrix(3, 3, {1, 0, 0, 1, -1, 0, 0, 0, 1}), {0.25, 0, 0}});
  // m1 = c - s(c - x); units s(m1), s(m1 - y); output min(m1, y)
  layers.push_back({dense_matrix(2, 3, {1, -1, 0, 1, -1, -1}), zeros(3)});
  layers.push_back({dense_matrix(1, 2, {1, -1}), zeros(2)});
  return Network(std::move(layers), OutputActivation::identity);
}

}  // namespace

Network mult_net(int eta, int D) {
  if (eta < 1 || D < 1) throw PreconditionError("mult_net: eta and D must be positive");
  if (D == 1) return identity_chain(1, 1);
  const int m = (eta + 1) / 2 + 1;
  const Network pair = pair_mult(m);
  const Network pass = identity_chain(pair.depth(), 1);
  Network result;
  bool first = true;
  int signals = D;
  while (signals > 1) {
    std::vector<Network> blocks;
    for (int i = 0; i + 1 < signals; i += 2) blocks.push_back(pair);
    if (signals % 2 == 1) blocks.push_back(pass);
    Network level = stack(blocks);
    result = first ? level : compose(result, level);
    first = false;
    signals = (signals + 1) / 2;
  }
  return result;
}

Network linear_net(const SparseMatrix& A) {
  return Network({{A, zeros(A.cols())}}, OutputActivation::identity);
}

Network precompose_linear(const Network& net, const SparseMatrix& A) { return compose_linear(linear_net(A), net); }

Network postcompose_linear(const Network& net, const SparseMatrix& A) { return compose_linear(net, linear_net(A)); }

Network with_output(const Network& net, OutputActivation output) {
  return Network(net.layers(), output);
}

}  // namespace relukit
