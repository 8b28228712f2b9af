#pragma once

#include <vector>

#include "tcl/tensor.hpp"

namespace tcl {

// Forward kernels. The graph calls these to materialize node values and the
// momentum (key) encoder calls them directly, so both paths produce
// bit-identical numbers for identical parameters.
namespace ops {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add_bias(const Tensor& x, const Tensor& bias);  // bias is 1 x n
Tensor relu(const Tensor& x);

// Rows are divided by max(l2-norm, 1e-12); zero rows stay zero.
Tensor row_l2norm(const Tensor& x);
inline constexpr double kNormFloor = 1e-12;

Tensor row_softmax(const Tensor& x);
Tensor row_log_softmax(const Tensor& x);

Tensor elem_log(const Tensor& x);
Tensor elem_exp(const Tensor& x);
Tensor scale(const Tensor& x, double s);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

double dot(const Tensor& a, const Tensor& b);  // full contraction
double sum(const Tensor& x);
double mean(const Tensor& x);
Tensor row_sum(const Tensor& x);  // m x n -> m x 1

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& idx);
Tensor transpose(const Tensor& x);

}  // namespace ops
}  // namespace tcl
