#pragma once

#include <optional>

#include "bregfw/kernels.hpp"
#include "bregfw/objectives.hpp"
#include "bregfw/point.hpp"

namespace bregfw {

enum class StepRuleKind {
  BregmanShort,       // closed form from known (L, nu)
  AdaptiveBregman,    // backtracking search over (M, kappa)
  OpenLoop,           // 2 / (2 + t)
  FixedNonconvex,     // 1 / (T + 1)^(1 / (1 + nu))
  EuclideanShort,     // gap / (L ||v - x||^2), ignores the problem kernel
  EuclideanAdaptive,  // backtracking on the Euclidean model, kappa pinned at 1
};

struct StepRuleSpec {
  StepRuleKind kind = StepRuleKind::AdaptiveBregman;
  std::optional<double> L;       // short rules; falls back to problem constants
  std::optional<double> nu;      // BregmanShort / FixedNonconvex
  double eta = 0.9;              // trial shrink on the previous L
  double tau = 2.0;              // L growth on rejection
  double beta = 0.9;             // kappa shrink on rejection
  double L_init = 1.0;           // L_{-1} before the first adaptive call
  double kappa_min = 0.05;       // floor for the searched exponent
  bool strict_alg2 = false;      // shrink kappa on every rejection, not only
                                 // when the scaling check fails
  std::optional<long> horizon;   // FixedNonconvex T; defaults to max_iters
};

struct StepOutcome {
  double gamma = 0.0;
  double L_star = 0.0;   // accepted model constant
  double nu_star = 1.0;  // accepted exponent
  long inner_evals = 0;  // acceptance-inequality evaluations
  bool accepted = true;
};

// Inner-iteration cap for the adaptive search.
inline constexpr long kAdaptiveSearchCap = 200;

// gamma = min{ (gap / (L (1 + nu) div))^(1/nu), gamma_max }. gap = 0 gives 0;
// div = 0 with gap > 0 gives gamma_max. Throws InvalidConstant for L <= 0 or
// nu outside (0, 1].
double bregman_short_gamma(double L, double nu, double gap, double div, double gamma_max);

double open_loop_gamma(long t);
double fixed_nonconvex_gamma(long horizon, double nu);

// Backtracking search for (gamma, M, kappa): starts at M = eta * L_prev,
// kappa = 1; on rejection multiplies M by tau, and shrinks kappa by beta
// (floored at kappa_min) either always (strict_alg2) or only when the scaling
// check D_phi(x - gamma d, x) <= gamma^(1+kappa) D_phi(v, x) fails. Acceptance:
// D_f(x - gamma d, x) <= M gamma^(1+kappa) D_phi(v, x). d is the step
// direction (x - v for a toward-vertex step), gap = <grad f(x), d> must be
// positive. Throws LineSearchDiverged past kAdaptiveSearchCap evaluations.
StepOutcome adaptive_bregman_step(const Objective& objective, const Kernel& kernel,
                                  const DensePoint& x, const DensePoint& v,
                                  const DensePoint& d, double gap, double L_prev,
                                  double gamma_max, const StepRuleSpec& spec);

// Euclidean backtracking with the exponent pinned at 1:
// gamma = min{ gap / (M ||v - x||^2), gamma_max }, acceptance against the
// quadratic model. Separate from adaptive_bregman_step so the reduction
// property can be checked across two code paths.
StepOutcome euclidean_adaptive_step(const Objective& objective, const DensePoint& x,
                                    const DensePoint& v, const DensePoint& d,
                                    double gap, double L_prev, double gamma_max,
                                    const StepRuleSpec& spec);

// Worst-case cumulative acceptance-evaluation budget through iteration t:
// max{ (1 - log eta / log tau)(t + 1) + max(log(tau L / L_init), 0) / log tau,
//      (1 + log nu / log beta)(t + 1) }.
double linesearch_budget_bound(long t, double eta, double tau, double beta,
                               double nu, double L, double L_init);

}  // namespace bregfw
