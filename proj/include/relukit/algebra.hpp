#pragma once

#include <span>
#include <vector>

#include "relukit/network.hpp"

namespace relukit {

/// g(s_v(f(x))). Depth L_f + L_g + 1.
Network compose(const Network& f, const Network& g, std::span<const double> v);
Network compose(const Network& f, const Network& g);

/// g(f(x)) with the last affine map of f merged into the first of g.
/// Depth L_f + L_g. The merged weights must still satisfy |w| <= 1 for the result to validate.
Network compose_linear(const Network& f, const Network& g);

/// Shared input, concatenated outputs. All nets need equal depth and input width.
Network parallelize(const Network& f, const Network& g);
Network parallelize(std::span<const Network> nets);

/// Block-diagonal on concatenated inputs and outputs. All nets need equal depth.
Network stack(std::span<const Network> nets);

/// Prepends `a` identity layers of width m_0. Exact on nonnegative inputs.
Network depth_synchronize(const Network& f, int a);
/// depth_synchronize up to `depth`; returns f unchanged when it is already that deep.
Network synchronize_to(const Network& f, int depth);

/// Zero-pads into a wider architecture of the same depth.
Network embed(const Network& net, const ArchitectureSpec& target);

/// Deletes hidden units that are constantly zero or never read, until none remain.
Network remove_inactive(const Network& net);

long long full_param_count(const ArchitectureSpec& arch);

/// Even (sign = +1) or odd (sign = -1) extension in each flagged coordinate.
/// The caller asserts that `net` vanishes when a flagged coordinate is <= 0; this is spot-checked.
Network extend_negative(const Network& net, int sign, const std::vector<int>& neg_indices);

/// x -> C max(x, 0) with all parameters bounded by one.
Network scale_net(double C);

/// Approximates prod x_i on [0,1]^D within 3^D 2^-eta, exactly zero when a coordinate is zero.
Network mult_net(int eta, int D);

/// Forwards nonnegative inputs unchanged through `depth` hidden layers.
Network identity_chain(int depth, int dim);

/// The affine map x -> A x as a depth-zero network.
Network linear_net(const SparseMatrix& A);
Network precompose_linear(const Network& net, const SparseMatrix& A);
Network postcompose_linear(const Network& net, const SparseMatrix& A);

Network with_output(const Network& net, OutputActivation output);

}  // namespace relukit
