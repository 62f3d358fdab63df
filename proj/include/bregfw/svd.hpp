#pragma once

#include <cstddef>
#include <vector>

namespace bregfw {

struct TopSingularPair {
  double sigma = 0.0;
  std::vector<double> u;  // length m
  std::vector<double> v;  // length n
  std::size_t iterations = 0;
  bool converged = false;
};

// Dominant singular triple of row-major A (m x n) by power iteration on the
// Gram operator, tolerance on successive sigma estimates.
TopSingularPair top_singular_pair_power(const std::vector<double>& a, std::size_t m,
                                        std::size_t n, double tol = 1e-10,
                                        std::size_t max_iter = 5000);

// All singular values of row-major A (m x n), descending, by one-sided Jacobi.
// Exact enough for the small matrices it is used on (min dim <= 64).
std::vector<double> singular_values_jacobi(const std::vector<double>& a,
                                           std::size_t m, std::size_t n);

// Dominant singular triple extracted from the one-sided Jacobi factorization.
TopSingularPair top_singular_pair_jacobi(const std::vector<double>& a,
                                         std::size_t m, std::size_t n);

}  // namespace bregfw
