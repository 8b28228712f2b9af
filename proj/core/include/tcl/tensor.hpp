#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tcl {

// Dense row-major tensor of doubles. Rank is free-form but almost everything
// in this codebase is a matrix (rank 2); vectors are stored as 1 x n rows and
// scalars as 1 x 1. The grad buffer is empty until someone asks for it.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;

  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double v);
  static Tensor scalar(double v);
  static Tensor row(std::vector<double> v);
  static Tensor matrix(std::size_t r, std::size_t c, std::vector<double> v);

  std::size_t numel() const;
  std::size_t rank() const { return shape.size(); }

  // Rank-2 accessors; throw on anything else.
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;

  void ensure_grad();
  void zero_grad();
};

std::string shape_str(const Tensor& t);

}  // namespace tcl
