#pragma once

// Differentiable primitives. Every op validates shapes and throws
// asrk::Error(dimension) naming the offending shapes.

#include <cstdint>
#include <span>

#include "asrk/tensor/tensor.hpp"

namespace asrk::tensor {

// [m×k]·[k×n] -> [m×n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
// a[m×n] + bias[n] broadcast over rows; the only broadcasting op.
Tensor add_row(const Tensor& a, const Tensor& bias);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

Tensor tanh(const Tensor& x);
// Exact (erf) GELU.
Tensor gelu(const Tensor& x);

// Numerically stable softmax along `axis` (negative counts from the end).
Tensor softmax(const Tensor& x, int axis = -1);
// Mean over rows of -log softmax(logits[b])[labels[b]]. 1-D logits are one row.
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

// Columnwise max of x[k×d] -> [d]. Gradient goes to the first (lowest row)
// argmax of each column.
Tensor max_pool_rows(const Tensor& x);

// Row-wise normalisation of x[m×d] with affine gamma[d], beta[d].
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

// Rows of table[V×d] selected by ids -> [n×d]. Throws vocabulary error for
// ids outside [0, V).
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);

// Concatenation along `axis`: 1-D inputs (axis 0) or 2-D inputs (axis 0 or 1).
Tensor concat(std::span<const Tensor> parts, int axis);
// Stacks equal-length 1-D tensors into a [k×d] matrix.
Tensor stack_rows(std::span<const Tensor> rows);

// Inverted dropout; identity when !training or rate == 0. The mask depends
// only on (seed, element index).
Tensor dropout(const Tensor& x, double rate, std::uint64_t seed, bool training);

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
// Row `index` of a 2-D tensor as a 1-D tensor.
Tensor row(const Tensor& a, std::size_t index);
Tensor reshape(const Tensor& a, Shape shape);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

}  // namespace asrk::tensor
