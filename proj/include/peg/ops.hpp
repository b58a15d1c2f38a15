#pragma once

#include <vector>

#include "peg/tensor.hpp"

namespace peg::ad {

// Elementwise binary ops accept equal shapes or a size-1 scalar on either
// side; anything else is a shape error. No other implicit broadcasting.
TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr div(Tape& tape, const TensorPtr& a, const TensorPtr& b);

// Compile-time constants folded into the graph.
TensorPtr scale(Tape& tape, const TensorPtr& a, double c);
TensorPtr add_const(Tape& tape, const TensorPtr& a, double c);
TensorPtr neg(Tape& tape, const TensorPtr& a);

TensorPtr sigmoid(Tape& tape, const TensorPtr& a);
TensorPtr tanh_op(Tape& tape, const TensorPtr& a);
TensorPtr exp_op(Tape& tape, const TensorPtr& a);
TensorPtr log_op(Tape& tape, const TensorPtr& a);
TensorPtr softplus(Tape& tape, const TensorPtr& a);
TensorPtr leaky_relu(Tape& tape, const TensorPtr& a, double negative_slope);
TensorPtr reciprocal(Tape& tape, const TensorPtr& a);

// Max-subtracted softmax along `axis` of a 1-D or 2-D tensor.
TensorPtr softmax(Tape& tape, const TensorPtr& a, int axis = -1);

// a: [m x k], b: [k x n]. Backward: grad_a = up * b^T, grad_b = a^T * up.
TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
// w: [m x k], x: [k] -> [m]
TensorPtr matvec(Tape& tape, const TensorPtr& w, const TensorPtr& x);
TensorPtr dot(Tape& tape, const TensorPtr& a, const TensorPtr& b);

TensorPtr sum(Tape& tape, const TensorPtr& a);
TensorPtr mean(Tape& tape, const TensorPtr& a);

// 1-D concatenation; backward routes gradient slices by recorded offsets.
TensorPtr concat(Tape& tape, const std::vector<TensorPtr>& parts);
// Contiguous 1-D slice of the flattened tensor (rows of a row-major matrix).
TensorPtr slice(Tape& tape, const TensorPtr& a, int offset, int length);
// Row i of an [m x n] tensor as a length-n vector.
TensorPtr row(Tape& tape, const TensorPtr& a, int i);
// Same data, new shape (sizes must agree); gradient passes through unchanged.
TensorPtr reshape(Tape& tape, const TensorPtr& a, std::vector<int> shape);

}  // namespace peg::ad
