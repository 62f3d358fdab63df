#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "bregfw/linalg.hpp"
#include "bregfw/rng.hpp"

using namespace bregfw;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("serial reductions on small hand vectors") {
  std::vector<double> a{1.0, -2.0, 3.0};
  std::vector<double> b{4.0, 5.0, -6.0};
  CHECK(linalg::serial::dot(a, b) == doctest::Approx(-24.0).epsilon(1e-15));
  CHECK(linalg::serial::nrm2_sq(a) == doctest::Approx(14.0).epsilon(1e-15));
  CHECK(linalg::serial::asum(b) == doctest::Approx(15.0).epsilon(1e-15));
}

TEST_CASE("serial vector updates") {
  std::vector<double> x{1.0, 2.0};
  std::vector<double> y{10.0, 20.0};
  linalg::serial::axpy(0.5, x, y);
  CHECK(y[0] == doctest::Approx(10.5));
  CHECK(y[1] == doctest::Approx(21.0));

  linalg::serial::scale(2.0, y);
  CHECK(y[0] == doctest::Approx(21.0));
  CHECK(y[1] == doctest::Approx(42.0));

  // x = (1-gamma) x + gamma v
  std::vector<double> v{0.0, 8.0};
  std::vector<double> z{4.0, 0.0};
  linalg::serial::mix(0.25, v, z);
  CHECK(z[0] == doctest::Approx(3.0));
  CHECK(z[1] == doctest::Approx(2.0));
}

TEST_CASE("serial gemv and gemv_t against hand results") {
  // A = [[1, 2, 3], [4, 5, 6]] row-major
  std::vector<double> a{1, 2, 3, 4, 5, 6};
  std::vector<double> x{1, 0, -1};
  std::vector<double> y(2, 0.0);
  linalg::serial::gemv(a, 2, 3, x, y);
  CHECK(y[0] == doctest::Approx(-2.0));
  CHECK(y[1] == doctest::Approx(-2.0));

  std::vector<double> w{1, -1};
  std::vector<double> z(3, 0.0);
  linalg::serial::gemv_t(a, 2, 3, w, z);
  CHECK(z[0] == doctest::Approx(-3.0));
  CHECK(z[1] == doctest::Approx(-3.0));
  CHECK(z[2] == doctest::Approx(-3.0));
}

TEST_CASE("serial gemm against hand result") {
  // A (2x2) * B (2x2)
  std::vector<double> a{1, 2, 3, 4};
  std::vector<double> b{5, 6, 7, 8};
  std::vector<double> c(4, 0.0);
  linalg::serial::gemm(a, 2, 2, b, 2, c);
  CHECK(c[0] == doctest::Approx(19.0));
  CHECK(c[1] == doctest::Approx(22.0));
  CHECK(c[2] == doctest::Approx(43.0));
  CHECK(c[3] == doctest::Approx(50.0));
}

TEST_CASE("parallel matrix kernels match serial bitwise") {
  Rng rng(42);
  // Large enough that the dispatchers would also pick the parallel path.
  const std::size_t m = 173, n = 211, k = 97;
  auto a = random_vec(rng, m * k);
  auto b = random_vec(rng, k * n);
  auto x = random_vec(rng, k);
  auto xt = random_vec(rng, m);

  std::vector<double> y_s(m, 0.0), y_p(m, 0.0);
  linalg::serial::gemv(a, m, k, x, y_s);
  linalg::par::gemv(a, m, k, x, y_p);
  CHECK(bits_equal(y_s, y_p));

  std::vector<double> z_s(k, 0.0), z_p(k, 0.0);
  linalg::serial::gemv_t(a, m, k, xt, z_s);
  linalg::par::gemv_t(a, m, k, xt, z_p);
  CHECK(bits_equal(z_s, z_p));

  std::vector<double> c_s(m * n, 0.0), c_p(m * n, 0.0);
  linalg::serial::gemm(a, m, k, b, n, c_s);
  linalg::par::gemm(a, m, k, b, n, c_p);
  CHECK(bits_equal(c_s, c_p));
}

TEST_CASE("parallel elementwise updates match serial bitwise") {
  Rng rng(7);
  const std::size_t n = 100003;
  auto x = random_vec(rng, n);
  auto v = random_vec(rng, n);

  auto y_s = random_vec(rng, n);
  auto y_p = y_s;
  linalg::serial::axpy(-0.3, x, y_s);
  linalg::par::axpy(-0.3, x, y_p);
  CHECK(bits_equal(y_s, y_p));

  linalg::serial::scale(1.7, y_s);
  linalg::par::scale(1.7, y_p);
  CHECK(bits_equal(y_s, y_p));

  linalg::serial::mix(0.125, v, y_s);
  linalg::par::mix(0.125, v, y_p);
  CHECK(bits_equal(y_s, y_p));
}

TEST_CASE("parallel reductions agree with serial to relative 1e-12") {
  Rng rng(99);
  const std::size_t n = 250007;
  auto a = random_vec(rng, n);
  auto b = random_vec(rng, n);

  const double ds = linalg::serial::dot(a, b);
  const double dp = linalg::par::dot(a, b);
  CHECK(std::abs(ds - dp) <= 1e-12 * (1.0 + std::abs(ds)));

  const double ns = linalg::serial::nrm2_sq(a);
  const double np = linalg::par::nrm2_sq(a);
  CHECK(std::abs(ns - np) <= 1e-12 * (1.0 + std::abs(ns)));

  const double ss = linalg::serial::asum(a);
  const double sp = linalg::par::asum(a);
  CHECK(std::abs(ss - sp) <= 1e-12 * (1.0 + std::abs(ss)));
}

TEST_CASE("parallel reductions are run-to-run deterministic") {
  Rng rng(3);
  const std::size_t n = 123457;
  auto a = random_vec(rng, n);
  auto b = random_vec(rng, n);
  const double first = linalg::par::dot(a, b);
  for (int rep = 0; rep < 5; ++rep) {
    CHECK(linalg::par::dot(a, b) == first);
  }
  const double nfirst = linalg::par::nrm2_sq(a);
  for (int rep = 0; rep < 5; ++rep) {
    CHECK(linalg::par::nrm2_sq(a) == nfirst);
  }
}

TEST_CASE("dispatching wrappers match serial on small inputs") {
  // Below the grain the wrappers must take the serial path exactly.
  std::vector<double> a{1.5, -2.5, 0.5};
  std::vector<double> b{2.0, 4.0, 8.0};
  CHECK(linalg::dot(a, b) == linalg::serial::dot(a, b));
  CHECK(linalg::nrm2_sq(a) == linalg::serial::nrm2_sq(a));
  CHECK(linalg::asum(a) == linalg::serial::asum(a));
}
