#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "glovenet/tensor.hpp"

// Differentiable tensor operations. All reductions run sequentially over
// the reduced axis so results are bit-reproducible for a given precision.
namespace glovenet {

// [m x k] . [k x n] -> [m x n]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// Batched matmul over identical leading dimensions:
// [..., m, k] . [..., k, n] -> [..., m, n], or with transpose_b
// [..., m, k] . [..., n, k]^T -> [..., m, n].
template <typename T>
Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b, bool transpose_b = false);

// Affine map over the last axis: x[..., in] . weight[in, out] + bias[out].
// bias may be undefined.
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

// Elementwise sum. b must have the same shape as a or match a trailing
// suffix of it, in which case it is broadcast over the leading axes.
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

template <typename T>
Tensor<T> mean(const Tensor<T>& x);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

// Numerically stable softmax along `axis` (max subtracted before exp).
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis);

// Normalizes over the last axis, then applies gamma * x_hat + beta.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps);

// Mean negative log-likelihood of `labels` under softmax(logits).
// logits is [B x C]; every label must lie in [0, C).
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

// Output axis i is input axis axes[i].
template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<std::size_t>& axes);

// Picks one index along `axis` and drops that axis.
template <typename T>
Tensor<T> select(const Tensor<T>& x, std::size_t axis, std::size_t index);

}  // namespace glovenet
