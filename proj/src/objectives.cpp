#include "bregfw/objectives.hpp"

#include <cmath>

#include "bregfw/linalg.hpp"
#include "bregfw/svd.hpp"

namespace bregfw {

namespace {

std::vector<double> transpose(const std::vector<double>& a, std::size_t m, std::size_t n) {
  std::vector<double> at(n * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) at[j * m + i] = a[i * n + j];
  return at;
}

void require_vector(const DensePoint& x, std::size_t n, const char* who) {
  if (x.shape != std::vector<std::size_t>{n})
    throw ShapeMismatch(std::string(who) + ": expected a length-" + std::to_string(n) +
                        " vector");
}

}  // namespace

std::string objective_name(ObjectiveId id) {
  switch (id) {
    case ObjectiveId::Quadratic: return "quadratic";
    case ObjectiveId::LpLoss: return "lp_loss";
    case ObjectiveId::PhaseRetrieval: return "phase_retrieval";
    case ObjectiveId::KLInverse: return "kl_inverse";
    case ObjectiveId::LowRank: return "low_rank";
    case ObjectiveId::NMF: return "nmf";
    case ObjectiveId::ToyPiecewise: return "toy_piecewise";
    case ObjectiveId::ToyLog1pSq: return "toy_log1psq";
  }
  return "?";
}

double Objective::bregman_gap(const DensePoint& x_plus, const DensePoint& x) const {
  const DensePoint g = gradient(x);
  double d = value(x_plus) - value(x);
  for (std::size_t i = 0; i < x.size(); ++i) d -= g[i] * (x_plus[i] - x[i]);
  return d;
}

namespace {

class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(DensePoint q, DensePoint c) : q_(std::move(q)), c_(std::move(c)) {
    if (!q_.is_matrix() || q_.rows() != q_.cols())
      throw ShapeMismatch("quadratic: Q must be square");
    require_vector(c_, q_.rows(), "quadratic c");
    const std::size_t n = q_.rows();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::fabs(q_.at(i, j) - q_.at(j, i)) > 1e-9 * (1.0 + std::fabs(q_.at(i, j))))
          throw InvalidConstant("quadratic: Q must be symmetric");
  }

  ObjectiveId id() const override { return ObjectiveId::Quadratic; }
  std::size_t dim() const override { return c_.size(); }
  std::vector<std::size_t> point_shape() const override { return {c_.size()}; }

  double value(const DensePoint& x) const override {
    require_vector(x, dim(), "quadratic");
    std::vector<double> qx(dim());
    linalg::gemv(q_.data, dim(), dim(), x.data, qx);
    return 0.5 * linalg::dot(x.data, qx) + linalg::dot(c_.data, x.data);
  }

  DensePoint gradient(const DensePoint& x) const override {
    require_vector(x, dim(), "quadratic");
    DensePoint g = DensePoint::vector(dim());
    linalg::gemv(q_.data, dim(), dim(), x.data, g.data);
    for (std::size_t i = 0; i < dim(); ++i) g[i] += c_[i];
    return g;
  }

  KernelId recommended_kernel() const override { return KernelId::Euclidean; }

  std::optional<double> smad_constant() const override {
    // Spectral norm of symmetric Q.
    const std::size_t n = dim();
    const TopSingularPair top = n <= 64
                                    ? top_singular_pair_jacobi(q_.data, n, n)
                                    : top_singular_pair_power(q_.data, n, n);
    return top.sigma;
  }

 private:
  DensePoint q_, c_;
};

class LpLossObjective final : public Objective {
 public:
  LpLossObjective(DensePoint a, DensePoint b, double p)
      : a_(std::move(a)), b_(std::move(b)), p_(p) {
    if (!a_.is_matrix()) throw ShapeMismatch("lp_loss: A must be a matrix");
    require_vector(b_, a_.rows(), "lp_loss b");
    if (!(p_ > 1.0)) throw InvalidConstant("lp_loss: p must exceed 1");
  }

  ObjectiveId id() const override { return ObjectiveId::LpLoss; }
  std::size_t dim() const override { return a_.cols(); }
  std::vector<std::size_t> point_shape() const override { return {a_.cols()}; }

  double value(const DensePoint& x) const override {
    const std::vector<double> r = residual(x);
    double s = 0.0;
    for (double ri : r) s += std::pow(std::fabs(ri), p_);
    return s;
  }

  DensePoint gradient(const DensePoint& x) const override {
    std::vector<double> r = residual(x);
    for (double& ri : r) {
      // p |r|^(p-1) sign(r); the zero-residual limit is 0 for p > 1.
      ri = ri == 0.0 ? 0.0
                     : (ri > 0.0 ? p_ * std::pow(ri, p_ - 1.0)
                                 : -p_ * std::pow(-ri, p_ - 1.0));
    }
    DensePoint g = DensePoint::vector(dim());
    linalg::gemv_t(a_.data, a_.rows(), a_.cols(), r, g.data);
    return g;
  }

  KernelId recommended_kernel() const override { return KernelId::ObjectiveAsKernel; }
  std::optional<double> smad_constant() const override { return 1.0; }

  double p() const { return p_; }

 private:
  std::vector<double> residual(const DensePoint& x) const {
    require_vector(x, dim(), "lp_loss");
    std::vector<double> r(a_.rows());
    linalg::gemv(a_.data, a_.rows(), a_.cols(), x.data, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b_[i];
    return r;
  }

  DensePoint a_, b_;
  double p_;
};

class PhaseRetrievalObjective final : public Objective {
 public:
  PhaseRetrievalObjective(DensePoint a, DensePoint b)
      : a_(std::move(a)), b_(std::move(b)) {
    if (!a_.is_matrix()) throw ShapeMismatch("phase_retrieval: A must be a matrix");
    require_vector(b_, a_.rows(), "phase_retrieval b");
  }

  ObjectiveId id() const override { return ObjectiveId::PhaseRetrieval; }
  std::size_t dim() const override { return a_.cols(); }
  std::vector<std::size_t> point_shape() const override { return {a_.cols()}; }

  double value(const DensePoint& x) const override {
    require_vector(x, dim(), "phase_retrieval");
    std::vector<double> z(a_.rows());
    linalg::gemv(a_.data, a_.rows(), a_.cols(), x.data, z);
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double d = z[i] * z[i] - b_[i];
      s += d * d;
    }
    return 0.25 * s;
  }

  DensePoint gradient(const DensePoint& x) const override {
    require_vector(x, dim(), "phase_retrieval");
    std::vector<double> z(a_.rows());
    linalg::gemv(a_.data, a_.rows(), a_.cols(), x.data, z);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (z[i] * z[i] - b_[i]) * z[i];
    DensePoint g = DensePoint::vector(dim());
    linalg::gemv_t(a_.data, a_.rows(), a_.cols(), z, g.data);
    return g;
  }

  KernelId recommended_kernel() const override { return KernelId::Quartic; }

  std::optional<double> smad_constant() const override {
    // sum_i (3 ||a_i||^4 + ||a_i||^2 |b_i|) against the quartic kernel.
    double s = 0.0;
    for (std::size_t i = 0; i < a_.rows(); ++i) {
      double n2 = 0.0;
      for (std::size_t j = 0; j < a_.cols(); ++j) {
        const double v = a_.at(i, j);
        n2 += v * v;
      }
      s += 3.0 * n2 * n2 + n2 * std::fabs(b_[i]);
    }
    return s;
  }

 private:
  DensePoint a_, b_;
};

class KLInverseObjective final : public Objective {
 public:
  KLInverseObjective(DensePoint a, DensePoint b) : a_(std::move(a)), b_(std::move(b)) {
    if (!a_.is_matrix()) throw ShapeMismatch("kl_inverse: A must be a matrix");
    require_vector(b_, a_.rows(), "kl_inverse b");
    for (double v : a_.data)
      if (v < 0.0) throw InvalidConstant("kl_inverse: A must be elementwise nonnegative");
    for (double v : b_.data)
      if (!(v > 0.0)) throw InvalidConstant("kl_inverse: b must be elementwise positive");
  }

  ObjectiveId id() const override { return ObjectiveId::KLInverse; }
  std::size_t dim() const override { return a_.cols(); }
  std::vector<std::size_t> point_shape() const override { return {a_.cols()}; }

  double value(const DensePoint& x) const override {
    const std::vector<double> z = mapped(x);
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i] < 0.0) throw DomainViolation("kl_inverse: (Ax)_i negative");
      if (z[i] > 0.0) s += z[i] * std::log(z[i] / b_[i]) + b_[i] - z[i];
      else s += b_[i];  // z log z -> 0
    }
    return s;
  }

  DensePoint gradient(const DensePoint& x) const override {
    std::vector<double> z = mapped(x);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!(z[i] > 0.0))
        throw DomainViolation("kl_inverse: gradient needs (Ax)_i > 0");
      z[i] = std::log(z[i] / b_[i]);
    }
    DensePoint g = DensePoint::vector(dim());
    linalg::gemv_t(a_.data, a_.rows(), a_.cols(), z, g.data);
    return g;
  }

  bool in_domain(const DensePoint& x) const override {
    if (!x.finite()) return false;
    for (double zi : mapped(x))
      if (!(zi > 0.0)) return false;
    return true;
  }

  KernelId recommended_kernel() const override { return KernelId::Entropy; }

  std::optional<double> smad_constant() const override {
    // max column sum of A against the entropy kernel.
    double best = 0.0;
    for (std::size_t j = 0; j < a_.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < a_.rows(); ++i) s += a_.at(i, j);
      best = std::max(best, s);
    }
    return best;
  }

 private:
  std::vector<double> mapped(const DensePoint& x) const {
    require_vector(x, dim(), "kl_inverse");
    std::vector<double> z(a_.rows());
    linalg::gemv(a_.data, a_.rows(), a_.cols(), x.data, z);
    return z;
  }

  DensePoint a_, b_;
};

class LowRankObjective final : public Objective {
 public:
  LowRankObjective(DensePoint m, std::size_t r) : m_(std::move(m)), r_(r) {
    if (!m_.is_matrix() || m_.rows() != m_.cols())
      throw ShapeMismatch("low_rank: M must be square");
    if (r_ == 0) throw InvalidConstant("low_rank: rank must be positive");
    const std::size_t n = m_.rows();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::fabs(m_.at(i, j) - m_.at(j, i)) > 1e-9 * (1.0 + std::fabs(m_.at(i, j))))
          throw InvalidConstant("low_rank: M must be symmetric");
  }

  ObjectiveId id() const override { return ObjectiveId::LowRank; }
  std::size_t dim() const override { return m_.rows() * r_; }
  std::vector<std::size_t> point_shape() const override { return {m_.rows(), r_}; }

  double value(const DensePoint& x) const override {
    const std::vector<double> e = factor_residual(x);
    return 0.5 * linalg::nrm2_sq(e);
  }

  DensePoint gradient(const DensePoint& x) const override {
    const std::size_t n = m_.rows();
    const std::vector<double> e = factor_residual(x);  // n x n
    DensePoint g = DensePoint::matrix(n, r_);
    linalg::gemm(e, n, n, x.data, r_, g.data);
    linalg::scale(2.0, g.data);
    return g;
  }

  KernelId recommended_kernel() const override { return KernelId::Quartic; }

 private:
  std::vector<double> factor_residual(const DensePoint& x) const {
    if (x.shape != point_shape()) throw ShapeMismatch("low_rank: expected an n x r point");
    const std::size_t n = m_.rows();
    const std::vector<double> xt = transpose(x.data, n, r_);
    std::vector<double> e(n * n);
    linalg::gemm(x.data, n, r_, xt, n, e);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= m_.data[i];
    return e;
  }

  DensePoint m_;
  std::size_t r_;
};

class NMFObjective final : public Objective {
 public:
  NMFObjective(DensePoint v, std::size_t r) : v_(std::move(v)), r_(r) {
    if (!v_.is_matrix()) throw ShapeMismatch("nmf: V must be a matrix");
    if (r_ == 0) throw InvalidConstant("nmf: rank must be positive");
  }

  ObjectiveId id() const override { return ObjectiveId::NMF; }
  std::size_t dim() const override { return v_.rows() * r_ + r_ * v_.cols(); }
  std::vector<std::size_t> point_shape() const override { return {dim()}; }

  double value(const DensePoint& x) const override {
    const std::vector<double> e = residual(x);
    return 0.5 * linalg::nrm2_sq(e);
  }

  DensePoint gradient(const DensePoint& x) const override {
    const std::size_t m = v_.rows(), n = v_.cols();
    const std::vector<double> e = residual(x);  // m x n
    const double* w = x.data.data();
    const double* h = x.data.data() + m * r_;
    DensePoint g = DensePoint::vector(dim());
    // dW = E H^T, via (H E^T)^T computed directly with transposes.
    const std::vector<double> ht = transpose({h, h + r_ * n}, r_, n);  // n x r
    std::vector<double> gw(m * r_);
    linalg::gemm(e, m, n, ht, r_, gw);
    // dH = W^T E
    const std::vector<double> wt = transpose({w, w + m * r_}, m, r_);  // r x m
    std::vector<double> gh(r_ * n);
    linalg::gemm(wt, r_, m, e, n, gh);
    std::copy(gw.begin(), gw.end(), g.data.begin());
    std::copy(gh.begin(), gh.end(), g.data.begin() + m * r_);
    return g;
  }

  KernelId recommended_kernel() const override { return KernelId::Quartic; }

  double data_frobenius_norm() const { return std::sqrt(linalg::nrm2_sq(v_.data)); }
  std::size_t rank() const { return r_; }
  std::size_t data_rows() const { return v_.rows(); }
  std::size_t data_cols() const { return v_.cols(); }

 private:
  std::vector<double> residual(const DensePoint& x) const {
    if (x.shape != point_shape())
      throw ShapeMismatch("nmf: expected the stacked (W, H) vector");
    const std::size_t m = v_.rows(), n = v_.cols();
    std::vector<double> e(m * n);
    linalg::gemm({x.data.data(), m * r_}, m, r_, {x.data.data() + m * r_, r_ * n}, n, e);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= v_.data[i];
    return e;
  }

  DensePoint v_;
  std::size_t r_;
};

class ToyObjective final : public Objective {
 public:
  explicit ToyObjective(ToyKind kind) : kind_(kind) {}

  ObjectiveId id() const override {
    return kind_ == ToyKind::Piecewise ? ObjectiveId::ToyPiecewise
                                       : ObjectiveId::ToyLog1pSq;
  }
  std::size_t dim() const override { return 1; }
  std::vector<std::size_t> point_shape() const override { return {1}; }

  double value(const DensePoint& x) const override {
    require_vector(x, 1, "toy");
    const double t = x[0];
    if (kind_ == ToyKind::Piecewise) {
      if (t > -1.0 && t < -0.5) return 1.0 - t * t;
      const double u = t + 1.0;
      return 3.0 * u * u;
    }
    return std::log1p(t * t);
  }

  DensePoint gradient(const DensePoint& x) const override {
    require_vector(x, 1, "toy");
    const double t = x[0];
    DensePoint g = DensePoint::vector(1);
    if (kind_ == ToyKind::Piecewise) {
      // Kink points take the quadratic branch's slope.
      g[0] = (t > -1.0 && t < -0.5) ? -2.0 * t : 6.0 * (t + 1.0);
    } else {
      g[0] = 2.0 * t / (1.0 + t * t);
    }
    return g;
  }

  KernelId recommended_kernel() const override { return KernelId::Euclidean; }

  std::optional<double> smad_constant() const override {
    return toy_constants(kind_).smad_L;
  }

 private:
  ToyKind kind_;
};

}  // namespace

ObjectivePtr make_quadratic(DensePoint q, DensePoint c) {
  return std::make_shared<QuadraticObjective>(std::move(q), std::move(c));
}

ObjectivePtr make_lp_loss(DensePoint a, DensePoint b, double p) {
  return std::make_shared<LpLossObjective>(std::move(a), std::move(b), p);
}

ObjectivePtr make_phase_retrieval(DensePoint a, DensePoint b) {
  return std::make_shared<PhaseRetrievalObjective>(std::move(a), std::move(b));
}

ObjectivePtr make_kl_inverse(DensePoint a, DensePoint b) {
  return std::make_shared<KLInverseObjective>(std::move(a), std::move(b));
}

ObjectivePtr make_low_rank(DensePoint m, std::size_t r) {
  return std::make_shared<LowRankObjective>(std::move(m), r);
}

ObjectivePtr make_nmf(DensePoint v, std::size_t r) {
  return std::make_shared<NMFObjective>(std::move(v), r);
}

ObjectivePtr make_toy(ToyKind kind) { return std::make_shared<ToyObjective>(kind); }

ToyConstants toy_constants(ToyKind kind) {
  if (kind == ToyKind::Piecewise) return {2.0, 6.0, 6.0, -1.0, 0.0};
  return {0.25, 1.0 / 3.0, 2.0, 0.0, 0.0};
}

Kernel kernel_from_objective(const ObjectivePtr& objective) {
  if (!objective) throw InvalidConstant("kernel_from_objective: null objective");
  return Kernel::objective_as_kernel(
      [objective](const DensePoint& x) { return objective->value(x); },
      [objective](const DensePoint& x) { return objective->gradient(x); });
}

Kernel make_kernel(KernelId id, const ObjectivePtr& objective, double c) {
  switch (id) {
    case KernelId::Euclidean: return Kernel::euclidean();
    case KernelId::Entropy: return Kernel::entropy();
    case KernelId::Burg: return Kernel::burg();
    case KernelId::Quartic: return Kernel::quartic();
    case KernelId::QuarticScaled: return Kernel::quartic_scaled(c);
    case KernelId::ObjectiveAsKernel:
      return kernel_from_objective(objective);
  }
  throw UnknownKind("make_kernel: unknown kernel id");
}

}  // namespace bregfw
