#include "bregfw/regions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bregfw/linalg.hpp"
#include "bregfw/svd.hpp"

namespace bregfw {

namespace {

// Dense least squares via normal equations, Gaussian elimination with partial
// pivoting. Small systems only (barycentric-coordinate solves).
bool solve_normal_equations(const std::vector<double>& a, std::size_t rows,
                            std::size_t cols, const std::vector<double>& b,
                            std::vector<double>& w) {
  std::vector<double> ata(cols * cols, 0.0), atb(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t p = 0; p < cols; ++p) {
      atb[p] += a[i * cols + p] * b[i];
      for (std::size_t q = 0; q < cols; ++q)
        ata[p * cols + q] += a[i * cols + p] * a[i * cols + q];
    }
  }
  // Eliminate.
  std::vector<std::size_t> perm(cols);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t k = 0; k < cols; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < cols; ++i)
      if (std::fabs(ata[i * cols + k]) > std::fabs(ata[piv * cols + k])) piv = i;
    if (std::fabs(ata[piv * cols + k]) < 1e-12) return false;
    if (piv != k) {
      for (std::size_t j = 0; j < cols; ++j) std::swap(ata[k * cols + j], ata[piv * cols + j]);
      std::swap(atb[k], atb[piv]);
    }
    for (std::size_t i = k + 1; i < cols; ++i) {
      const double f = ata[i * cols + k] / ata[k * cols + k];
      for (std::size_t j = k; j < cols; ++j) ata[i * cols + j] -= f * ata[k * cols + j];
      atb[i] -= f * atb[k];
    }
  }
  w.assign(cols, 0.0);
  for (std::size_t ik = cols; ik-- > 0;) {
    double s = atb[ik];
    for (std::size_t j = ik + 1; j < cols; ++j) s -= ata[ik * cols + j] * w[j];
    w[ik] = s / ata[ik * cols + ik];
  }
  return true;
}

std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    if (c > cap) return cap + 1;
    c = c * (n - k + i) / i;
  }
  return c;
}

}  // namespace

std::string region_name(RegionKind kind) {
  switch (kind) {
    case RegionKind::SimplexLeqOne: return "simplex";
    case RegionKind::L2Ball: return "l2ball";
    case RegionKind::Box: return "box";
    case RegionKind::KSparsePolytope: return "ksparse";
    case RegionKind::NuclearNormBall: return "nuclear_ball";
    case RegionKind::ExplicitPolytope: return "explicit";
  }
  return "?";
}

Region Region::simplex(std::size_t n) {
  if (n == 0) throw InvalidConstant("simplex: dimension must be positive");
  Region r(RegionKind::SimplexLeqOne);
  r.dim_ = n;
  return r;
}

Region Region::l2_ball(std::size_t n, double b_max) {
  if (n == 0 || !(b_max > 0.0)) throw InvalidConstant("l2_ball: need n > 0 and b_max > 0");
  Region r(RegionKind::L2Ball);
  r.dim_ = n;
  r.b_max_ = b_max;
  return r;
}

Region Region::box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.empty() || lower.size() != upper.size())
    throw InvalidConstant("box: bound vectors must match and be nonempty");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(lower[i] <= upper[i])) throw InvalidConstant("box: lower > upper");
  Region r(RegionKind::Box);
  r.dim_ = lower.size();
  r.lower_ = std::move(lower);
  r.upper_ = std::move(upper);
  return r;
}

Region Region::box(std::size_t n, double lo, double hi) {
  return box(std::vector<double>(n, lo), std::vector<double>(n, hi));
}

Region Region::k_sparse(std::size_t n, std::size_t k) {
  if (n == 0 || k == 0 || k > n) throw InvalidConstant("k_sparse: need 0 < K <= n");
  Region r(RegionKind::KSparsePolytope);
  r.dim_ = n;
  r.k_ = k;
  return r;
}

Region Region::nuclear_ball(std::size_t rows, std::size_t cols, double xi) {
  if (rows == 0 || cols == 0 || !(xi > 0.0))
    throw InvalidConstant("nuclear_ball: need positive shape and radius");
  Region r(RegionKind::NuclearNormBall);
  r.rows_ = rows;
  r.cols_ = cols;
  r.dim_ = rows * cols;
  r.xi_ = xi;
  return r;
}

Region Region::explicit_polytope(std::vector<DensePoint> vertices) {
  if (vertices.empty()) throw InvalidConstant("explicit_polytope: empty vertex list");
  Region r(RegionKind::ExplicitPolytope);
  // Drop bitwise duplicates, keeping first occurrences.
  for (auto& v : vertices) {
    bool dup = false;
    for (const auto& u : r.vertices_)
      if (bit_equal(u, v)) { dup = true; break; }
    if (!dup) r.vertices_.push_back(std::move(v));
  }
  r.dim_ = r.vertices_.front().size();
  for (const auto& v : r.vertices_)
    if (v.size() != r.dim_) throw ShapeMismatch("explicit_polytope: mixed vertex shapes");
  return r;
}

std::vector<std::size_t> Region::point_shape() const {
  if (kind_ == RegionKind::NuclearNormBall) return {rows_, cols_};
  if (kind_ == RegionKind::ExplicitPolytope) return vertices_.front().shape;
  return {dim_};
}

bool Region::is_polytope() const {
  return kind_ != RegionKind::L2Ball && kind_ != RegionKind::NuclearNormBall;
}

DensePoint Region::center() const {
  switch (kind_) {
    case RegionKind::SimplexLeqOne:
      return DensePoint::vector(dim_, 1.0 / (2.0 * static_cast<double>(dim_)));
    case RegionKind::L2Ball:
    case RegionKind::KSparsePolytope:
      return DensePoint::vector(dim_, 0.0);
    case RegionKind::Box: {
      DensePoint c = DensePoint::vector(dim_);
      for (std::size_t i = 0; i < dim_; ++i) c[i] = 0.5 * (lower_[i] + upper_[i]);
      return c;
    }
    case RegionKind::NuclearNormBall:
      return DensePoint::matrix(rows_, cols_, 0.0);
    case RegionKind::ExplicitPolytope: {
      DensePoint c = vertices_.front();
      std::fill(c.data.begin(), c.data.end(), 0.0);
      for (const auto& v : vertices_) axpy(1.0, v, c);
      scale(1.0 / static_cast<double>(vertices_.size()), c);
      return c;
    }
  }
  throw Error("center: unreachable");
}

DensePoint Region::lmo(const DensePoint& direction) const {
  if (!direction.finite()) throw DomainViolation("lmo: non-finite direction");
  if (direction.shape != point_shape())
    throw ShapeMismatch("lmo: direction shape does not match the region");

  switch (kind_) {
    case RegionKind::SimplexLeqOne: {
      std::size_t best = 0;
      for (std::size_t j = 1; j < dim_; ++j)
        if (direction[j] < direction[best]) best = j;
      DensePoint v = DensePoint::vector(dim_, 0.0);
      if (direction[best] < 0.0) v[best] = 1.0;  // else the origin wins
      return v;
    }
    case RegionKind::L2Ball: {
      const double nrm = std::sqrt(nrm2_sq(direction));
      DensePoint v = DensePoint::vector(dim_, 0.0);
      if (nrm == 0.0) return v;
      const double s = -std::sqrt(b_max_) / nrm;
      for (std::size_t j = 0; j < dim_; ++j) v[j] = s * direction[j];
      return v;
    }
    case RegionKind::Box: {
      DensePoint v = DensePoint::vector(dim_);
      for (std::size_t j = 0; j < dim_; ++j)
        v[j] = direction[j] > 0.0 ? lower_[j] : upper_[j];
      return v;
    }
    case RegionKind::KSparsePolytope: {
      std::vector<std::size_t> idx(dim_);
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(direction[a]) > std::fabs(direction[b]);
      });
      DensePoint v = DensePoint::vector(dim_, 0.0);
      for (std::size_t i = 0; i < k_; ++i)
        v[idx[i]] = direction[idx[i]] > 0.0 ? -1.0 : 1.0;
      return v;
    }
    case RegionKind::NuclearNormBall: {
      TopSingularPair top =
          std::min(rows_, cols_) <= 64
              ? top_singular_pair_jacobi(direction.data, rows_, cols_)
              : top_singular_pair_power(direction.data, rows_, cols_, 1e-10, 5000);
      DensePoint v = DensePoint::matrix(rows_, cols_, 0.0);
      for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
          v.data[i * cols_ + j] = -xi_ * top.u[i] * top.v[j];
      return v;
    }
    case RegionKind::ExplicitPolytope: {
      std::size_t best = 0;
      double best_val = dot(direction, vertices_[0]);
      for (std::size_t i = 1; i < vertices_.size(); ++i) {
        const double val = dot(direction, vertices_[i]);
        if (val < best_val) {
          best_val = val;
          best = i;
        }
      }
      return vertices_[best];
    }
  }
  throw Error("lmo: unreachable");
}

bool Region::contains(const DensePoint& x, double tol) const {
  if (x.shape != point_shape() || !x.finite()) return false;
  switch (kind_) {
    case RegionKind::SimplexLeqOne: {
      double s = 0.0;
      for (double v : x.data) {
        if (v < -tol) return false;
        s += v;
      }
      return s <= 1.0 + tol;
    }
    case RegionKind::L2Ball:
      return nrm2_sq(x) <= b_max_ + tol;
    case RegionKind::Box:
      for (std::size_t j = 0; j < dim_; ++j)
        if (x[j] < lower_[j] - tol || x[j] > upper_[j] + tol) return false;
      return true;
    case RegionKind::KSparsePolytope: {
      double l1 = 0.0;
      for (double v : x.data) {
        const double a = std::fabs(v);
        if (a > 1.0 + tol) return false;
        l1 += a;
      }
      return l1 <= static_cast<double>(k_) + tol;
    }
    case RegionKind::NuclearNormBall: {
      const std::vector<double> sigma = singular_values_jacobi(x.data, rows_, cols_);
      double nuc = 0.0;
      for (double s : sigma) nuc += s;
      return nuc <= xi_ + tol;
    }
    case RegionKind::ExplicitPolytope: {
      // Barycentric solve; exact only for affinely independent vertex sets.
      const std::size_t kcount = vertices_.size();
      const std::size_t d = dim_;
      if (kcount > d + 1)
        throw Unsupported(
            "explicit polytope containment needs affinely independent vertices");
      std::vector<double> a((d + 1) * kcount), b(d + 1);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t p = 0; p < kcount; ++p) a[i * kcount + p] = vertices_[p][i];
        b[i] = x[i];
      }
      for (std::size_t p = 0; p < kcount; ++p) a[d * kcount + p] = 1.0;
      b[d] = 1.0;
      std::vector<double> w;
      if (!solve_normal_equations(a, d + 1, kcount, b, w))
        throw Unsupported(
            "explicit polytope containment needs affinely independent vertices");
      for (double wi : w)
        if (wi < -tol) return false;
      // Residual: the solved combination must actually reproduce x.
      for (std::size_t i = 0; i < d; ++i) {
        double xi = 0.0;
        for (std::size_t p = 0; p < kcount; ++p) xi += w[p] * vertices_[p][i];
        if (std::fabs(xi - x[i]) > tol + 1e-9) return false;
      }
      return true;
    }
  }
  return false;
}

std::size_t Region::vertex_count() const {
  switch (kind_) {
    case RegionKind::SimplexLeqOne:
      return dim_ + 1;
    case RegionKind::Box: {
      if (dim_ >= 63) throw TooLarge("box vertex enumeration: 2^n overflows the cap");
      const std::size_t c = std::size_t{1} << dim_;
      if (c > kVertexEnumerationCap) throw TooLarge("box vertex enumeration over cap");
      return c;
    }
    case RegionKind::KSparsePolytope: {
      const std::size_t comb = binomial_capped(dim_, k_, kVertexEnumerationCap);
      if (k_ >= 63) throw TooLarge("k-sparse vertex enumeration over cap");
      const std::size_t signs = std::size_t{1} << k_;
      if (comb > kVertexEnumerationCap / signs)
        throw TooLarge("k-sparse vertex enumeration over cap");
      return comb * signs;
    }
    case RegionKind::ExplicitPolytope:
      return vertices_.size();
    case RegionKind::L2Ball:
    case RegionKind::NuclearNormBall:
      throw Unsupported("vertex enumeration: region has no finite vertex set");
  }
  throw Error("vertex_count: unreachable");
}

std::vector<DensePoint> Region::enumerate_vertices() const {
  const std::size_t count = vertex_count();  // throws for bad kinds/sizes
  std::vector<DensePoint> out;
  out.reserve(count);
  switch (kind_) {
    case RegionKind::SimplexLeqOne: {
      out.push_back(DensePoint::vector(dim_, 0.0));
      for (std::size_t j = 0; j < dim_; ++j) {
        DensePoint v = DensePoint::vector(dim_, 0.0);
        v[j] = 1.0;
        out.push_back(std::move(v));
      }
      break;
    }
    case RegionKind::Box: {
      for (std::size_t mask = 0; mask < count; ++mask) {
        DensePoint v = DensePoint::vector(dim_);
        for (std::size_t j = 0; j < dim_; ++j)
          v[j] = (mask >> j) & 1 ? upper_[j] : lower_[j];
        out.push_back(std::move(v));
      }
      break;
    }
    case RegionKind::KSparsePolytope: {
      std::vector<std::size_t> support(k_);
      std::iota(support.begin(), support.end(), 0);
      while (true) {
        const std::size_t signs = std::size_t{1} << k_;
        for (std::size_t mask = 0; mask < signs; ++mask) {
          DensePoint v = DensePoint::vector(dim_, 0.0);
          for (std::size_t i = 0; i < k_; ++i)
            v[support[i]] = (mask >> i) & 1 ? -1.0 : 1.0;
          out.push_back(std::move(v));
        }
        // next combination in lexicographic order
        std::size_t i = k_;
        while (i-- > 0) {
          if (support[i] != i + dim_ - k_) {
            ++support[i];
            for (std::size_t j = i + 1; j < k_; ++j) support[j] = support[j - 1] + 1;
            break;
          }
          if (i == 0) return out;
        }
      }
    }
    case RegionKind::ExplicitPolytope:
      return vertices_;
    default:
      break;  // unreachable, vertex_count threw
  }
  return out;
}

DensePoint Region::sample_interior(Rng& rng, double pull) const {
  DensePoint raw;
  switch (kind_) {
    case RegionKind::SimplexLeqOne: {
      const std::vector<double> w = rng.simplex_uniform(dim_ + 1);
      raw = DensePoint::vector(dim_);
      for (std::size_t j = 0; j < dim_; ++j) raw[j] = w[j + 1];
      break;
    }
    case RegionKind::L2Ball: {
      raw = DensePoint::vector(dim_);
      for (std::size_t j = 0; j < dim_; ++j) raw[j] = rng.normal();
      const double nrm = std::sqrt(nrm2_sq(raw));
      const double radius = std::sqrt(b_max_) *
                            std::pow(rng.uniform(), 1.0 / static_cast<double>(dim_)) *
                            0.999;
      if (nrm > 0.0) scale(radius / nrm, raw);
      break;
    }
    case RegionKind::Box: {
      raw = DensePoint::vector(dim_);
      for (std::size_t j = 0; j < dim_; ++j) raw[j] = rng.uniform(lower_[j], upper_[j]);
      break;
    }
    case RegionKind::KSparsePolytope: {
      raw = DensePoint::vector(dim_);
      double l1 = 0.0, linf = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        raw[j] = rng.uniform(-1.0, 1.0);
        l1 += std::fabs(raw[j]);
        linf = std::max(linf, std::fabs(raw[j]));
      }
      double s = 0.95;
      if (l1 > 0.0) s = std::min(s, 0.95 * static_cast<double>(k_) / l1);
      if (linf > 0.0) s = std::min(s, 0.95 / linf);
      scale(s, raw);
      break;
    }
    case RegionKind::NuclearNormBall: {
      raw = DensePoint::matrix(rows_, cols_);
      for (double& v : raw.data) v = rng.normal();
      const std::vector<double> sigma = singular_values_jacobi(raw.data, rows_, cols_);
      double nuc = 0.0;
      for (double sg : sigma) nuc += sg;
      const double target = xi_ * rng.uniform(0.05, 0.9);
      if (nuc > 0.0) scale(target / nuc, raw);
      break;
    }
    case RegionKind::ExplicitPolytope: {
      const std::vector<double> w = rng.simplex_uniform(vertices_.size());
      raw = vertices_.front();
      std::fill(raw.data.begin(), raw.data.end(), 0.0);
      for (std::size_t i = 0; i < vertices_.size(); ++i) axpy(w[i], vertices_[i], raw);
      break;
    }
  }
  if (pull > 0.0) return mix(raw, center(), pull);
  return raw;
}

DensePoint Region::sample_boundaryish(Rng& rng) const {
  switch (kind_) {
    case RegionKind::SimplexLeqOne: {
      if (rng.uniform() < 0.5) {
        // cap face: sum = 1
        const std::vector<double> w = rng.simplex_uniform(dim_);
        DensePoint x = DensePoint::vector(dim_);
        for (std::size_t j = 0; j < dim_; ++j) x[j] = w[j];
        return x;
      }
      DensePoint x = sample_interior(rng, 0.0);
      x[rng.integer(dim_)] = 0.0;
      return x;
    }
    case RegionKind::L2Ball: {
      DensePoint x = DensePoint::vector(dim_);
      for (std::size_t j = 0; j < dim_; ++j) x[j] = rng.normal();
      const double nrm = std::sqrt(nrm2_sq(x));
      if (nrm > 0.0) scale(std::sqrt(b_max_) / nrm, x);
      return x;
    }
    case RegionKind::Box: {
      DensePoint x = sample_interior(rng, 0.0);
      const std::size_t j = rng.integer(dim_);
      x[j] = rng.uniform() < 0.5 ? lower_[j] : upper_[j];
      return x;
    }
    case RegionKind::KSparsePolytope: {
      DensePoint x = DensePoint::vector(dim_, 0.0);
      std::vector<std::size_t> idx(dim_);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t i = 0; i < k_; ++i)
        std::swap(idx[i], idx[i + rng.integer(dim_ - i)]);
      for (std::size_t i = 0; i < k_; ++i) x[idx[i]] = rng.uniform() < 0.5 ? 1.0 : -1.0;
      return x;
    }
    case RegionKind::NuclearNormBall: {
      std::vector<double> u(rows_), v(cols_);
      for (double& e : u) e = rng.normal();
      for (double& e : v) e = rng.normal();
      const double nu = std::sqrt(linalg::nrm2_sq(u));
      const double nv = std::sqrt(linalg::nrm2_sq(v));
      DensePoint x = DensePoint::matrix(rows_, cols_);
      if (nu > 0.0 && nv > 0.0)
        for (std::size_t i = 0; i < rows_; ++i)
          for (std::size_t j = 0; j < cols_; ++j)
            x.data[i * cols_ + j] = xi_ * (u[i] / nu) * (v[j] / nv);
      return x;
    }
    case RegionKind::ExplicitPolytope:
      return vertices_[rng.integer(vertices_.size())];
  }
  throw Error("sample_boundaryish: unreachable");
}

double Region::bregman_diameter_sq(const Kernel& kernel, std::size_t n_samples,
                                   std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<DensePoint> xs, ys;

  const bool restricted = kernel.domain() != KernelDomain::AllReals;
  if (is_polytope()) {
    bool enumerable = true;
    std::size_t count = 0;
    try {
      count = vertex_count();
    } catch (const Error&) {
      enumerable = false;
    }
    if (enumerable && count <= 256) {
      for (auto& v : enumerate_vertices()) xs.push_back(std::move(v));
    }
  }
  if (kind_ == RegionKind::L2Ball) {
    // Axis extremes: the sampled sup over the ball peaks at antipodal pairs.
    const double r = std::sqrt(b_max_);
    for (std::size_t j = 0; j < dim_; ++j) {
      DensePoint plus = DensePoint::vector(dim_, 0.0), minus = plus;
      plus[j] = r;
      minus[j] = -r;
      xs.push_back(std::move(plus));
      xs.push_back(std::move(minus));
    }
  }
  for (std::size_t i = 0; i < n_samples; ++i) xs.push_back(sample_boundaryish(rng));
  for (std::size_t i = 0; i < n_samples; ++i) xs.push_back(sample_interior(rng, 0.05));
  xs.push_back(center());

  if (restricted) {
    for (std::size_t i = 0; i < 2 * n_samples; ++i) ys.push_back(sample_interior(rng, 0.05));
    ys.push_back(center());
  } else {
    ys = xs;
  }

  double best = 0.0;
  for (const auto& x : xs) {
    if (!kernel.value_defined(x)) continue;
    for (const auto& y : ys) {
      if (!kernel.interior(y)) continue;
      const double d = kernel.divergence(x, y);
      if (std::isfinite(d) && d > best) best = d;
    }
  }
  return best;
}

DensePoint Region::project(const DensePoint& y) const {
  if (y.shape != point_shape()) throw ShapeMismatch("project: wrong point shape");
  switch (kind_) {
    case RegionKind::L2Ball: {
      const double n2 = nrm2_sq(y);
      if (n2 <= b_max_) return y;
      DensePoint x = y;
      scale(std::sqrt(b_max_ / n2), x);
      return x;
    }
    case RegionKind::Box: {
      DensePoint x = y;
      for (std::size_t j = 0; j < dim_; ++j)
        x[j] = std::clamp(x[j], lower_[j], upper_[j]);
      return x;
    }
    case RegionKind::SimplexLeqOne: {
      DensePoint z = y;
      double s = 0.0;
      for (double& v : z.data) {
        v = std::max(v, 0.0);
        s += v;
      }
      if (s <= 1.0) return z;
      // Clamped sum exceeds the cap: project onto the sum-1 face by the sorted
      // threshold rule on the raw input.
      std::vector<double> sorted(y.data.begin(), y.data.end());
      std::sort(sorted.begin(), sorted.end(), std::greater<double>());
      double cumsum = 0.0, theta = 0.0;
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        cumsum += sorted[k];
        const double cand = (cumsum - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - cand > 0.0) theta = cand;
      }
      DensePoint x = y;
      for (double& v : x.data) v = std::max(v - theta, 0.0);
      return x;
    }
    default:
      throw UnsupportedRegion("project: no cheap Euclidean projection for " +
                              region_name(kind_));
  }
}

}  // namespace bregfw
