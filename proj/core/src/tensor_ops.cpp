#include "tcl/tensor_ops.hpp"

#include <algorithm>
#include <cmath>

#include "tcl/check.hpp"

namespace tcl {
namespace ops {

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_arg(a.rank() == 2 && b.rank() == 2,
            "matmul: rank-2 operands required, got " + shape_str(a) + " and " + shape_str(b));
  check_arg(a.cols() == b.rows(),
            "matmul: inner dimensions disagree, " + shape_str(a) + " vs " + shape_str(b));
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c = Tensor::zeros({m, n});
  // i-k-j order so the inner loop streams both b and c
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.values.data() + i * k;
    double* crow = c.values.data() + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = b.values.data() + kk * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  check_arg(x.rank() == 2 && bias.rank() == 2 && bias.rows() == 1 && bias.cols() == x.cols(),
            "add_bias: need (m x n) + (1 x n), got " + shape_str(x) + " and " + shape_str(bias));
  Tensor y = x;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) y.at(i, j) += bias.values[j];
  return y;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor row_l2norm(const Tensor& x) {
  check_arg(x.rank() == 2, "row_l2norm: rank-2 input required, got " + shape_str(x));
  Tensor y = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) sq += x.at(i, j) * x.at(i, j);
    const double n = std::max(std::sqrt(sq), kNormFloor);
    for (std::size_t j = 0; j < x.cols(); ++j) y.at(i, j) /= n;
  }
  return y;
}

Tensor row_softmax(const Tensor& x) {
  check_arg(x.rank() == 2, "row_softmax: rank-2 input required, got " + shape_str(x));
  Tensor y = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double mx = x.at(i, 0);
    for (std::size_t j = 1; j < x.cols(); ++j) mx = std::max(mx, x.at(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      y.at(i, j) = std::exp(x.at(i, j) - mx);
      z += y.at(i, j);
    }
    for (std::size_t j = 0; j < x.cols(); ++j) y.at(i, j) /= z;
  }
  return y;
}

Tensor row_log_softmax(const Tensor& x) {
  check_arg(x.rank() == 2, "row_log_softmax: rank-2 input required, got " + shape_str(x));
  Tensor y = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double mx = x.at(i, 0);
    for (std::size_t j = 1; j < x.cols(); ++j) mx = std::max(mx, x.at(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) z += std::exp(x.at(i, j) - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < x.cols(); ++j) y.at(i, j) = x.at(i, j) - lse;
  }
  return y;
}

Tensor elem_log(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values) v = std::log(v);
  return y;
}

Tensor elem_exp(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values) v = std::exp(v);
  return y;
}

Tensor scale(const Tensor& x, double s) {
  Tensor y = x;
  for (double& v : y.values) v *= s;
  return y;
}

static void check_same(const Tensor& a, const Tensor& b, const char* op) {
  check_arg(a.same_shape(b),
            std::string(op) + ": shape mismatch, " + shape_str(a) + " vs " + shape_str(b));
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same(a, b, "add");
  Tensor y = a;
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += b.values[i];
  return y;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same(a, b, "sub");
  Tensor y = a;
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] -= b.values[i];
  return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same(a, b, "mul");
  Tensor y = a;
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] *= b.values[i];
  return y;
}

double dot(const Tensor& a, const Tensor& b) {
  check_same(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

double sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values) s += v;
  return s;
}

double mean(const Tensor& x) {
  check_arg(x.numel() > 0, "mean: empty tensor");
  return sum(x) / static_cast<double>(x.numel());
}

Tensor row_sum(const Tensor& x) {
  check_arg(x.rank() == 2, "row_sum: rank-2 input required, got " + shape_str(x));
  Tensor y = Tensor::zeros({x.rows(), 1});
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) s += x.at(i, j);
    y.values[i] = s;
  }
  return y;
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& idx) {
  check_arg(x.rank() == 2, "gather_rows: rank-2 input required, got " + shape_str(x));
  check_arg(!idx.empty(), "gather_rows: empty index list");
  Tensor y = Tensor::zeros({idx.size(), x.cols()});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    check_arg(idx[r] < x.rows(), "gather_rows: index out of range");
    for (std::size_t j = 0; j < x.cols(); ++j) y.at(r, j) = x.at(idx[r], j);
  }
  return y;
}

Tensor transpose(const Tensor& x) {
  check_arg(x.rank() == 2, "transpose: rank-2 input required, got " + shape_str(x));
  Tensor y = Tensor::zeros({x.cols(), x.rows()});
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) y.at(j, i) = x.at(i, j);
  return y;
}

}  // namespace ops
}  // namespace tcl
