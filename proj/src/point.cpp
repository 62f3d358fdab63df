#include "bregfw/point.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "bregfw/linalg.hpp"

namespace bregfw {

DensePoint DensePoint::vector(std::size_t n, double fill) {
  DensePoint p;
  p.data.assign(n, fill);
  p.shape = {n};
  return p;
}

DensePoint DensePoint::matrix(std::size_t rows, std::size_t cols, double fill) {
  DensePoint p;
  p.data.assign(rows * cols, fill);
  p.shape = {rows, cols};
  return p;
}

DensePoint DensePoint::from(std::vector<double> values) {
  DensePoint p;
  p.shape = {values.size()};
  p.data = std::move(values);
  return p;
}

bool DensePoint::finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool DensePoint::same_shape(const DensePoint& other) const {
  return shape == other.shape;
}

void DensePoint::require_same_shape(const DensePoint& other, const char* op) const {
  if (!same_shape(other)) {
    std::ostringstream os;
    os << op << ": shape mismatch (";
    for (auto s : shape) os << s << " ";
    os << "vs ";
    for (auto s : other.shape) os << s << " ";
    os << ")";
    throw ShapeMismatch(os.str());
  }
}

double dot(const DensePoint& a, const DensePoint& b) {
  a.require_same_shape(b, "dot");
  return linalg::dot(a.data, b.data);
}

double nrm2_sq(const DensePoint& a) { return linalg::nrm2_sq(a.data); }

void axpy(double alpha, const DensePoint& x, DensePoint& y) {
  x.require_same_shape(y, "axpy");
  linalg::axpy(alpha, x.data, y.data);
}

void scale(double alpha, DensePoint& x) { linalg::scale(alpha, x.data); }

DensePoint mix(const DensePoint& x, const DensePoint& v, double gamma) {
  x.require_same_shape(v, "mix");
  DensePoint out = x;
  linalg::mix(gamma, v.data, out.data);
  return out;
}

DensePoint sub(const DensePoint& a, const DensePoint& b) {
  a.require_same_shape(b, "sub");
  DensePoint out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

double max_abs_diff(const DensePoint& a, const DensePoint& b) {
  a.require_same_shape(b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = std::fabs(a.data[i] - b.data[i]);
    if (d > m) m = d;
  }
  return m;
}

bool bit_equal(const DensePoint& a, const DensePoint& b) {
  if (a.shape != b.shape) return false;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a.data[i]) != std::bit_cast<std::uint64_t>(b.data[i]))
      return false;
  }
  return true;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  if (shape.size() == 2)
    return "(" + std::to_string(shape[0]) + " x " + std::to_string(shape[1]) + ")";
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

}  // namespace bregfw
