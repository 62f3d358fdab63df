#include "bregfw/linalg.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bregfw::linalg {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double nrm2_sq(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

double asum(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v < 0 ? -v : v;
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

void mix(double gamma, std::span<const double> v, std::span<double> x) {
  const double keep = 1.0 - gamma;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = keep * x[i] + gamma * v[i];
}

void gemv(std::span<const double> a, std::size_t m, std::size_t n,
          std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = a.data() + i * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

void gemv_t(std::span<const double> a, std::size_t m, std::size_t n,
            std::span<const double> x, std::span<double> y) {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = a.data() + i * n;
    const double xi = x[i];
    for (std::size_t j = 0; j < n; ++j) y[j] += xi * row[j];
  }
}

void gemm(std::span<const double> a, std::size_t m, std::size_t k,
          std::span<const double> b, std::size_t n, std::span<double> c) {
  std::fill(c.begin(), c.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.data() + i * k;
    double* crow = c.data() + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = arow[l];
      const double* brow = b.data() + l * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += ail * brow[j];
    }
  }
}

}  // namespace serial

namespace par {

namespace {

// Fixed contiguous chunking: chunk t covers [t*q + min(t, r), ...), where
// q = n / T, r = n % T. Depends only on (n, T), not on scheduling.
struct Chunk {
  std::size_t lo, hi;
};

Chunk chunk_of(std::size_t n, int threads, int tid) {
  const std::size_t q = n / static_cast<std::size_t>(threads);
  const std::size_t r = n % static_cast<std::size_t>(threads);
  const std::size_t t = static_cast<std::size_t>(tid);
  const std::size_t lo = t * q + std::min(t, r);
  return {lo, lo + q + (t < r ? 1 : 0)};
}

template <typename Body>
double ordered_reduce(std::size_t n, const Body& body) {
  const int threads = max_threads();
  std::vector<double> partial(static_cast<std::size_t>(threads), 0.0);
#ifdef _OPENMP
#pragma omp parallel num_threads(threads)
  {
    const int tid = omp_get_thread_num();
    const Chunk c = chunk_of(n, threads, tid);
    double s = 0.0;
    for (std::size_t i = c.lo; i < c.hi; ++i) s += body(i);
    partial[static_cast<std::size_t>(tid)] = s;
  }
#else
  for (std::size_t i = 0; i < n; ++i) partial[0] += body(i);
#endif
  double s = 0.0;
  for (double p : partial) s += p;  // thread-index order: deterministic
  return s;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  return ordered_reduce(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double nrm2_sq(std::span<const double> a) {
  return ordered_reduce(a.size(), [&](std::size_t i) { return a[i] * a[i]; });
}

double asum(std::span<const double> a) {
  return ordered_reduce(a.size(),
                        [&](std::size_t i) { return a[i] < 0 ? -a[i] : a[i]; });
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t i = 0; i < n; ++i) x[i] *= alpha;
}

void mix(double gamma, std::span<const double> v, std::span<double> x) {
  const double keep = 1.0 - gamma;
  const std::int64_t n = static_cast<std::int64_t>(x.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t i = 0; i < n; ++i) x[i] = keep * x[i] + gamma * v[i];
}

void gemv(std::span<const double> a, std::size_t m, std::size_t n,
          std::span<const double> x, std::span<double> y) {
  const std::int64_t rows = static_cast<std::int64_t>(m);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t i = 0; i < rows; ++i) {
    const double* row = a.data() + static_cast<std::size_t>(i) * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
    y[static_cast<std::size_t>(i)] = s;
  }
}

void gemv_t(std::span<const double> a, std::size_t m, std::size_t n,
            std::span<const double> x, std::span<double> y) {
  // Column-partitioned strided dots: each y_j owned by one thread.
  const std::int64_t cols = static_cast<std::int64_t>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += x[i] * a[i * n + static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(j)] = s;
  }
}

void gemm(std::span<const double> a, std::size_t m, std::size_t k,
          std::span<const double> b, std::size_t n, std::span<double> c) {
  const std::int64_t rows = static_cast<std::int64_t>(m);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t i = 0; i < rows; ++i) {
    const double* arow = a.data() + static_cast<std::size_t>(i) * k;
    double* crow = c.data() + static_cast<std::size_t>(i) * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = arow[l];
      const double* brow = b.data() + l * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += ail * brow[j];
    }
  }
}

}  // namespace par

namespace {

bool parallel_worthwhile(std::size_t work) {
  return work >= kParallelGrain && max_threads() > 1;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  return parallel_worthwhile(a.size()) ? par::dot(a, b) : serial::dot(a, b);
}

double nrm2_sq(std::span<const double> a) {
  return parallel_worthwhile(a.size()) ? par::nrm2_sq(a) : serial::nrm2_sq(a);
}

double asum(std::span<const double> a) {
  return parallel_worthwhile(a.size()) ? par::asum(a) : serial::asum(a);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  parallel_worthwhile(x.size()) ? par::axpy(alpha, x, y) : serial::axpy(alpha, x, y);
}

void scale(double alpha, std::span<double> x) {
  parallel_worthwhile(x.size()) ? par::scale(alpha, x) : serial::scale(alpha, x);
}

void mix(double gamma, std::span<const double> v, std::span<double> x) {
  parallel_worthwhile(x.size()) ? par::mix(gamma, v, x) : serial::mix(gamma, v, x);
}

void gemv(std::span<const double> a, std::size_t m, std::size_t n,
          std::span<const double> x, std::span<double> y) {
  parallel_worthwhile(m * n) ? par::gemv(a, m, n, x, y) : serial::gemv(a, m, n, x, y);
}

void gemv_t(std::span<const double> a, std::size_t m, std::size_t n,
            std::span<const double> x, std::span<double> y) {
  parallel_worthwhile(m * n) ? par::gemv_t(a, m, n, x, y)
                             : serial::gemv_t(a, m, n, x, y);
}

void gemm(std::span<const double> a, std::size_t m, std::size_t k,
          std::span<const double> b, std::size_t n, std::span<double> c) {
  parallel_worthwhile(m * k * n) ? par::gemm(a, m, k, b, n, c)
                                 : serial::gemm(a, m, k, b, n, c);
}

}  // namespace bregfw::linalg
