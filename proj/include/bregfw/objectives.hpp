#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bregfw/kernels.hpp"
#include "bregfw/point.hpp"

namespace bregfw {

enum class ObjectiveId {
  Quadratic,
  LpLoss,
  PhaseRetrieval,
  KLInverse,
  LowRank,
  NMF,
  ToyPiecewise,
  ToyLog1pSq,
};

std::string objective_name(ObjectiveId id);

class Objective {
 public:
  virtual ~Objective() = default;

  virtual ObjectiveId id() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::vector<std::size_t> point_shape() const = 0;
  virtual double value(const DensePoint& x) const = 0;
  virtual DensePoint gradient(const DensePoint& x) const = 0;

  // Kernel this objective is smooth-adaptable against, and the matching L
  // when a closed form is known.
  virtual KernelId recommended_kernel() const = 0;
  virtual std::optional<double> smad_constant() const { return std::nullopt; }

  // True when value() and gradient() are defined at x.
  virtual bool in_domain(const DensePoint& x) const { return x.finite(); }

  // D_f(x_plus, x) = f(x_plus) - f(x) - <grad f(x), x_plus - x>; may be
  // negative for nonconvex objectives, no clamping.
  double bregman_gap(const DensePoint& x_plus, const DensePoint& x) const;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

// f(x) = 0.5 x^T Q x + c^T x, Q symmetric (stored dense row-major).
ObjectivePtr make_quadratic(DensePoint q, DensePoint c);
// f(x) = sum_i |(Ax - b)_i|^p, p > 1.
ObjectivePtr make_lp_loss(DensePoint a, DensePoint b, double p);
// f(x) = 0.25 * sum_i (<a_i, x>^2 - b_i)^2, rows of A are the a_i.
ObjectivePtr make_phase_retrieval(DensePoint a, DensePoint b);
// f(x) = sum_i [ (Ax)_i log((Ax)_i / b_i) + b_i - (Ax)_i ], A >= 0, b > 0.
ObjectivePtr make_kl_inverse(DensePoint a, DensePoint b);
// f(X) = 0.5 ||X X^T - M||_F^2 over n x r matrices, M symmetric n x n.
ObjectivePtr make_low_rank(DensePoint m, std::size_t r);
// f(x) = 0.5 ||W H - V||_F^2 where x stacks row-major W (m x r) then H (r x n).
ObjectivePtr make_nmf(DensePoint v, std::size_t r);

enum class ToyKind { Piecewise, Log1pSq };

struct ToyConstants {
  double weak_rho;  // weak-convexity modulus
  double growth_mu; // quadratic-growth modulus
  double smad_L;
  double x_star;
  double f_star;
};

// 1-D study objectives with documented constants.
ObjectivePtr make_toy(ToyKind kind);
ToyConstants toy_constants(ToyKind kind);

// Adapter used when the objective doubles as its own kernel (phi := f for
// convex f; D_phi then equals D_f and the pair is 1-smooth-adaptable).
Kernel kernel_from_objective(const ObjectivePtr& objective);

// Kernel factory covering every KernelId; `objective` is only consulted for
// ObjectiveAsKernel, `c` only for QuarticScaled.
Kernel make_kernel(KernelId id, const ObjectivePtr& objective = nullptr, double c = 1.0);

}  // namespace bregfw
