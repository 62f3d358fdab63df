#include "bregfw/svd.hpp"

#include <algorithm>
#include <cmath>

#include "bregfw/errors.hpp"
#include "bregfw/linalg.hpp"

namespace bregfw {

namespace {

void matvec(const std::vector<double>& a, std::size_t m, std::size_t n,
            const std::vector<double>& x, std::vector<double>& y) {
  y.assign(m, 0.0);
  linalg::gemv(a, m, n, x, y);
}

void matvec_t(const std::vector<double>& a, std::size_t m, std::size_t n,
              const std::vector<double>& x, std::vector<double>& y) {
  y.assign(n, 0.0);
  linalg::gemv_t(a, m, n, x, y);
}

double normalize(std::vector<double>& v) {
  const double nrm = std::sqrt(linalg::nrm2_sq(v));
  if (nrm > 0.0)
    for (double& x : v) x /= nrm;
  return nrm;
}

// Columns of the working matrix (row-major, m x n), rotated in place together
// with the accumulated right-vector matrix.
struct JacobiResult {
  std::vector<double> b;       // rotated copy of the input, m x n
  std::vector<double> v;       // accumulated rotations, n x n row-major
  std::vector<double> sigma;   // column norms after convergence (unsorted)
};

JacobiResult one_sided_jacobi(const std::vector<double>& a, std::size_t m, std::size_t n) {
  JacobiResult r;
  r.b = a;
  r.v.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) r.v[i * n + i] = 1.0;

  auto col_dot = [&](std::size_t p, std::size_t q) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += r.b[i * n + p] * r.b[i * n + q];
    return s;
  };

  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double app = col_dot(p, p);
        const double aqq = col_dot(q, q);
        const double apq = col_dot(p, q);
        const double denom = std::sqrt(app * aqq);
        if (denom == 0.0 || std::fabs(apq) <= 1e-15 * denom) continue;
        off = std::max(off, std::fabs(apq) / denom);
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double bp = r.b[i * n + p];
          const double bq = r.b[i * n + q];
          r.b[i * n + p] = c * bp - s * bq;
          r.b[i * n + q] = s * bp + c * bq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = r.v[i * n + p];
          const double vq = r.v[i * n + q];
          r.v[i * n + p] = c * vp - s * vq;
          r.v[i * n + q] = s * vp + c * vq;
        }
      }
    }
    if (off < 1e-14) break;
  }

  r.sigma.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += r.b[i * n + j] * r.b[i * n + j];
    r.sigma[j] = std::sqrt(s);
  }
  return r;
}

}  // namespace

TopSingularPair top_singular_pair_power(const std::vector<double>& a, std::size_t m,
                                        std::size_t n, double tol, std::size_t max_iter) {
  if (a.size() != m * n || m == 0 || n == 0)
    throw ShapeMismatch("top_singular_pair_power: bad matrix dimensions");
  TopSingularPair out;
  // Fixed-seed start so every call over the same matrix is identical.
  std::vector<double> v(n);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  for (double& x : v) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    x = 0.5 + static_cast<double>(state >> 40) * 0x1.0p-25;
  }
  normalize(v);

  std::vector<double> av, atav;
  double sigma_prev = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    matvec(a, m, n, v, av);
    const double sigma = std::sqrt(linalg::nrm2_sq(av));
    matvec_t(a, m, n, av, atav);
    if (normalize(atav) == 0.0) {
      // A^T A v vanished: zero matrix (or v in the null space of a rank-deficient
      // A after the first products); sigma is 0 here in either case.
      out.sigma = 0.0;
      out.u.assign(m, 0.0);
      out.v = v;
      out.iterations = it;
      out.converged = true;
      return out;
    }
    v = atav;
    out.iterations = it;
    if (std::fabs(sigma - sigma_prev) <= tol * std::max(1.0, sigma)) {
      out.converged = true;
      sigma_prev = sigma;
      break;
    }
    sigma_prev = sigma;
  }
  matvec(a, m, n, v, av);
  out.sigma = normalize(av);
  out.u = av;
  out.v = v;
  return out;
}

std::vector<double> singular_values_jacobi(const std::vector<double>& a,
                                           std::size_t m, std::size_t n) {
  if (a.size() != m * n || m == 0 || n == 0)
    throw ShapeMismatch("singular_values_jacobi: bad matrix dimensions");
  // Work on the orientation with fewer columns; singular values are shared.
  if (n > m) {
    std::vector<double> at(n * m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) at[j * m + i] = a[i * n + j];
    return singular_values_jacobi(at, n, m);
  }
  JacobiResult r = one_sided_jacobi(a, m, n);
  std::sort(r.sigma.begin(), r.sigma.end(), std::greater<double>());
  return r.sigma;
}

TopSingularPair top_singular_pair_jacobi(const std::vector<double>& a,
                                         std::size_t m, std::size_t n) {
  if (a.size() != m * n || m == 0 || n == 0)
    throw ShapeMismatch("top_singular_pair_jacobi: bad matrix dimensions");
  if (n > m) {
    std::vector<double> at(n * m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) at[j * m + i] = a[i * n + j];
    TopSingularPair t = top_singular_pair_jacobi(at, n, m);
    std::swap(t.u, t.v);
    return t;
  }
  JacobiResult r = one_sided_jacobi(a, m, n);
  std::size_t best = 0;
  for (std::size_t j = 1; j < n; ++j)
    if (r.sigma[j] > r.sigma[best]) best = j;
  TopSingularPair out;
  out.sigma = r.sigma[best];
  out.converged = true;
  out.v.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out.v[i] = r.v[i * n + best];
  out.u.assign(m, 0.0);
  if (out.sigma > 0.0)
    for (std::size_t i = 0; i < m; ++i) out.u[i] = r.b[i * n + best] / out.sigma;
  return out;
}

}  // namespace bregfw
