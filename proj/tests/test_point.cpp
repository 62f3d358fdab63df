#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "bregfw/errors.hpp"
#include "bregfw/point.hpp"

using namespace bregfw;

TEST_CASE("vector and matrix construction") {
  auto v = DensePoint::vector(3, 2.5);
  CHECK(v.size() == 3);
  CHECK_FALSE(v.is_matrix());
  CHECK(v.rows() == 3);
  CHECK(v.cols() == 1);
  CHECK(v[1] == 2.5);

  auto m = DensePoint::matrix(2, 3, -1.0);
  CHECK(m.size() == 6);
  CHECK(m.is_matrix());
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  m.at(1, 2) = 7.0;
  CHECK(m.data[5] == 7.0);

  auto f = DensePoint::from({1.0, 2.0});
  CHECK(f.shape.size() == 1);
  CHECK(f.shape[0] == 2);
}

TEST_CASE("finite flags NaN and infinity") {
  auto v = DensePoint::from({1.0, 2.0});
  CHECK(v.finite());
  v[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(v.finite());
  v[0] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(v.finite());
}

TEST_CASE("shape comparison distinguishes vector from matrix") {
  auto v = DensePoint::vector(6);
  auto m = DensePoint::matrix(2, 3);
  CHECK_FALSE(v.same_shape(m));
  CHECK(m.same_shape(DensePoint::matrix(2, 3)));
  CHECK_THROWS_AS(v.require_same_shape(m, "add"), Error);
}

TEST_CASE("arithmetic helpers") {
  auto a = DensePoint::from({1.0, -2.0, 3.0});
  auto b = DensePoint::from({4.0, 5.0, -6.0});

  CHECK(dot(a, b) == doctest::Approx(-24.0));
  CHECK(nrm2_sq(a) == doctest::Approx(14.0));

  auto y = DensePoint::from({10.0, 20.0, 30.0});
  axpy(0.5, a, y);
  CHECK(y[0] == doctest::Approx(10.5));
  CHECK(y[1] == doctest::Approx(19.0));
  CHECK(y[2] == doctest::Approx(31.5));

  scale(-1.0, y);
  CHECK(y[0] == doctest::Approx(-10.5));

  auto mixed = mix(a, b, 0.25);
  CHECK(mixed[0] == doctest::Approx(1.75));
  CHECK(mixed[1] == doctest::Approx(-0.25));
  CHECK(mixed[2] == doctest::Approx(0.75));

  auto d = sub(a, b);
  CHECK(d[0] == doctest::Approx(-3.0));
  CHECK(d[1] == doctest::Approx(-7.0));
  CHECK(d[2] == doctest::Approx(9.0));

  CHECK(max_abs_diff(a, b) == doctest::Approx(9.0));
}

TEST_CASE("bit_equal is exact, not approximate") {
  auto a = DensePoint::from({0.1, 0.2});
  auto b = a;
  CHECK(bit_equal(a, b));
  b[1] = std::nextafter(b[1], 1.0);
  CHECK_FALSE(bit_equal(a, b));
  // +0.0 and -0.0 compare equal as doubles but differ bitwise.
  auto p = DensePoint::from({0.0});
  auto n = DensePoint::from({-0.0});
  CHECK(p[0] == n[0]);
  CHECK_FALSE(bit_equal(p, n));
}

TEST_CASE("shape_string formats both ranks") {
  CHECK(shape_string({5}) == "(5)");
  CHECK(shape_string({2, 3}) == "(2 x 3)");
}
