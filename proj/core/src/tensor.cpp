#include "tcl/tensor.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tcl/check.hpp"

namespace tcl {

static std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  Tensor t;
  t.values.assign(product(shape), 0.0);
  t.shape = std::move(shape);
  return t;
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  Tensor t;
  t.values.assign(product(shape), v);
  t.shape = std::move(shape);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.shape = {1, 1};
  t.values = {v};
  return t;
}

Tensor Tensor::row(std::vector<double> v) {
  Tensor t;
  t.shape = {1, v.size()};
  t.values = std::move(v);
  return t;
}

Tensor Tensor::matrix(std::size_t r, std::size_t c, std::vector<double> v) {
  check_arg(v.size() == r * c, "tensor: matrix payload size does not match r*c");
  Tensor t;
  t.shape = {r, c};
  t.values = std::move(v);
  return t;
}

std::size_t Tensor::numel() const { return values.size(); }

std::size_t Tensor::rows() const {
  check_arg(rank() == 2, "tensor: rows() requires rank 2, got " + shape_str(*this));
  return shape[0];
}

std::size_t Tensor::cols() const {
  check_arg(rank() == 2, "tensor: cols() requires rank 2, got " + shape_str(*this));
  return shape[1];
}

double& Tensor::at(std::size_t i, std::size_t j) { return values[i * shape[1] + j]; }

double Tensor::at(std::size_t i, std::size_t j) const { return values[i * shape[1] + j]; }

bool Tensor::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::ensure_grad() {
  if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() { grad.assign(values.size(), 0.0); }

std::string shape_str(const Tensor& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(t.shape[i]);
  }
  s += ")";
  return s;
}

}  // namespace tcl
