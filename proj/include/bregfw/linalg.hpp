#pragma once

#include <cstddef>
#include <span>

namespace bregfw::linalg {

// Below this many scalar operations the dispatching wrappers stay serial;
// thread startup costs more than the loop at desk scale.
inline constexpr std::size_t kParallelGrain = 1u << 15;

int max_threads();

// Serial reference implementations. Kept separate (not just the 1-thread OpenMP
// path) so tests can compare the parallel kernels against them.
namespace serial {

double dot(std::span<const double> a, std::span<const double> b);
double nrm2_sq(std::span<const double> a);
double asum(std::span<const double> a);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
// x = (1 - gamma) * x + gamma * v
void mix(double gamma, std::span<const double> v, std::span<double> x);
// y = A x with A row-major m x n
void gemv(std::span<const double> a, std::size_t m, std::size_t n,
          std::span<const double> x, std::span<double> y);
// y = A^T x with A row-major m x n (x has length m, y length n)
void gemv_t(std::span<const double> a, std::size_t m, std::size_t n,
            std::span<const double> x, std::span<double> y);
// C = A B with A m x k, B k x n, all row-major
void gemm(std::span<const double> a, std::size_t m, std::size_t k,
          std::span<const double> b, std::size_t n, std::span<double> c);

}  // namespace serial

// OpenMP kernels. Reductions accumulate fixed contiguous chunks into
// per-thread partials and combine them in thread-index order, so output is
// deterministic for a fixed thread count. Row-partitioned kernels (gemv, gemm)
// compute each output element with the same loop order as the serial path and
// match it bitwise.
namespace par {

double dot(std::span<const double> a, std::span<const double> b);
double nrm2_sq(std::span<const double> a);
double asum(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
void mix(double gamma, std::span<const double> v, std::span<double> x);
void gemv(std::span<const double> a, std::size_t m, std::size_t n,
          std::span<const double> x, std::span<double> y);
void gemv_t(std::span<const double> a, std::size_t m, std::size_t n,
            std::span<const double> x, std::span<double> y);
void gemm(std::span<const double> a, std::size_t m, std::size_t k,
          std::span<const double> b, std::size_t n, std::span<double> c);

}  // namespace par

// Size-dispatching entry points used by the rest of the library.
double dot(std::span<const double> a, std::span<const double> b);
double nrm2_sq(std::span<const double> a);
double asum(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
void mix(double gamma, std::span<const double> v, std::span<double> x);
void gemv(std::span<const double> a, std::size_t m, std::size_t n,
          std::span<const double> x, std::span<double> y);
void gemv_t(std::span<const double> a, std::size_t m, std::size_t n,
            std::span<const double> x, std::span<double> y);
void gemm(std::span<const double> a, std::size_t m, std::size_t k,
          std::span<const double> b, std::size_t n, std::span<double> c);

}  // namespace bregfw::linalg
