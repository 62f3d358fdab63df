#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bregfw/errors.hpp"

namespace bregfw {

// Flat iterate/vertex storage. shape has one entry for vectors, two
// (rows, cols) for row-major matrices; product of shape equals data.size().
struct DensePoint {
  std::vector<double> data;
  std::vector<std::size_t> shape;

  DensePoint() = default;

  static DensePoint vector(std::size_t n, double fill = 0.0);
  static DensePoint matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static DensePoint from(std::vector<double> values);  // 1-D

  std::size_t size() const { return data.size(); }
  bool is_matrix() const { return shape.size() == 2; }
  std::size_t rows() const { return is_matrix() ? shape[0] : data.size(); }
  std::size_t cols() const { return is_matrix() ? shape[1] : 1; }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

  bool finite() const;
  bool same_shape(const DensePoint& other) const;
  void require_same_shape(const DensePoint& other, const char* op) const;
};

double dot(const DensePoint& a, const DensePoint& b);
double nrm2_sq(const DensePoint& a);
// y += alpha * x
void axpy(double alpha, const DensePoint& x, DensePoint& y);
void scale(double alpha, DensePoint& x);
// returns (1 - gamma) * x + gamma * v
DensePoint mix(const DensePoint& x, const DensePoint& v, double gamma);
// returns a - b
DensePoint sub(const DensePoint& a, const DensePoint& b);
double max_abs_diff(const DensePoint& a, const DensePoint& b);
// Exact bit-pattern equality (the active set's vertex identity test).
bool bit_equal(const DensePoint& a, const DensePoint& b);

// "(n)" or "(rows x cols)" for error messages.
std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace bregfw
