#include "bregfw/stepsize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bregfw {

namespace {

void check_search_params(const StepRuleSpec& spec) {
  if (!(spec.eta > 0.0 && spec.eta <= 1.0))
    throw InvalidConstant("step search: eta must lie in (0, 1]");
  if (!(spec.tau > 1.0)) throw InvalidConstant("step search: tau must exceed 1");
  if (!(spec.beta > 0.0 && spec.beta <= 1.0))
    throw InvalidConstant("step search: beta must lie in (0, 1]");
  if (!(spec.kappa_min > 0.0 && spec.kappa_min <= 1.0))
    throw InvalidConstant("step search: kappa_min must lie in (0, 1]");
}

double trial_gamma(double gap, double m, double kappa, double div, double gamma_max) {
  const double q = gap / (m * (1.0 + kappa) * div);
  // kappa == 1 keeps the Euclidean special case free of pow() noise.
  const double g = kappa == 1.0 ? q : std::pow(q, 1.0 / kappa);
  return std::min(g, gamma_max);
}

}  // namespace

double bregman_short_gamma(double L, double nu, double gap, double div,
                           double gamma_max) {
  if (!(L > 0.0)) throw InvalidConstant("bregman_short_gamma: L must be positive");
  if (!(nu > 0.0 && nu <= 1.0))
    throw InvalidConstant("bregman_short_gamma: nu must lie in (0, 1]");
  if (!(gamma_max >= 0.0))
    throw InvalidConstant("bregman_short_gamma: gamma_max must be nonnegative");
  if (gap <= 0.0) return 0.0;
  if (div <= 0.0) return gamma_max;
  return trial_gamma(gap, L, nu, div, gamma_max);
}

double open_loop_gamma(long t) {
  if (t < 0) throw InvalidConstant("open_loop_gamma: t must be nonnegative");
  return 2.0 / (static_cast<double>(t) + 2.0);
}

double fixed_nonconvex_gamma(long horizon, double nu) {
  if (horizon < 0) throw InvalidConstant("fixed_nonconvex_gamma: horizon must be nonnegative");
  if (!(nu > 0.0 && nu <= 1.0))
    throw InvalidConstant("fixed_nonconvex_gamma: nu must lie in (0, 1]");
  return std::pow(static_cast<double>(horizon) + 1.0, -1.0 / (1.0 + nu));
}

StepOutcome adaptive_bregman_step(const Objective& objective, const Kernel& kernel,
                                  const DensePoint& x, const DensePoint& v,
                                  const DensePoint& d, double gap, double L_prev,
                                  double gamma_max, const StepRuleSpec& spec) {
  check_search_params(spec);
  if (!(L_prev > 0.0)) throw InvalidConstant("step search: L_prev must be positive");
  x.require_same_shape(d, "adaptive step");
  if (gap <= 0.0) return {0.0, L_prev, 1.0, 0, true};

  const double div = kernel.divergence(v, x);
  const double f_x = objective.value(x);

  double m = spec.eta * L_prev;
  double kappa = 1.0;
  for (long evals = 1; evals <= kAdaptiveSearchCap; ++evals) {
    const double gamma = div <= 0.0 ? gamma_max : trial_gamma(gap, m, kappa, div, gamma_max);
    DensePoint x_plus = x;
    axpy(-gamma, d, x_plus);
    const double lhs = objective.value(x_plus) - f_x + gamma * gap;
    const double model = std::pow(gamma, 1.0 + kappa) * div;
    if (lhs <= m * model) return {gamma, m, kappa, evals, true};

    bool shrink_kappa = spec.strict_alg2;
    if (!shrink_kappa) {
      // Only curve the exponent down when the kernel itself fails to scale,
      // with a hair of slack so exact-equality kernels are left alone.
      const double scaling = kernel.divergence(x_plus, x);
      shrink_kappa = scaling > model + 1e-12 * (1.0 + std::fabs(model));
    }
    m *= spec.tau;
    if (shrink_kappa) kappa = std::max(spec.beta * kappa, spec.kappa_min);
  }
  throw LineSearchDiverged("adaptive step search exceeded " +
                           std::to_string(kAdaptiveSearchCap) + " evaluations");
}

StepOutcome euclidean_adaptive_step(const Objective& objective, const DensePoint& x,
                                    const DensePoint& v, const DensePoint& d,
                                    double gap, double L_prev, double gamma_max,
                                    const StepRuleSpec& spec) {
  check_search_params(spec);
  if (!(L_prev > 0.0)) throw InvalidConstant("step search: L_prev must be positive");
  x.require_same_shape(d, "euclidean adaptive step");
  if (gap <= 0.0) return {0.0, L_prev, 1.0, 0, true};

  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double dd = v[i] - x[i];
    s += dd * dd;
  }
  const double div = 0.5 * s;
  const double f_x = objective.value(x);

  double m = spec.eta * L_prev;
  const double kappa = 1.0;
  for (long evals = 1; evals <= kAdaptiveSearchCap; ++evals) {
    const double gamma = div <= 0.0 ? gamma_max : trial_gamma(gap, m, kappa, div, gamma_max);
    DensePoint x_plus = x;
    axpy(-gamma, d, x_plus);
    const double lhs = objective.value(x_plus) - f_x + gamma * gap;
    const double model = std::pow(gamma, 1.0 + kappa) * div;
    if (lhs <= m * model) return {gamma, m, kappa, evals, true};
    m *= spec.tau;
  }
  throw LineSearchDiverged("euclidean step search exceeded " +
                           std::to_string(kAdaptiveSearchCap) + " evaluations");
}

double linesearch_budget_bound(long t, double eta, double tau, double beta, double nu,
                               double L, double L_init) {
  if (t < 0) throw InvalidConstant("budget bound: t must be nonnegative");
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidConstant("budget bound: eta in (0, 1]");
  if (!(tau > 1.0)) throw InvalidConstant("budget bound: tau must exceed 1");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidConstant("budget bound: beta in (0, 1)");
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidConstant("budget bound: nu in (0, 1]");
  if (!(L > 0.0 && L_init > 0.0))
    throw InvalidConstant("budget bound: L and L_init must be positive");

  const double rounds = static_cast<double>(t) + 1.0;
  const double growth =
      (1.0 - std::log(eta) / std::log(tau)) * rounds +
      std::max(std::log(tau * L / L_init), 0.0) / std::log(tau);
  const double exponent = (1.0 + std::log(nu) / std::log(beta)) * rounds;
  return std::max(growth, exponent);
}

}  // namespace bregfw
