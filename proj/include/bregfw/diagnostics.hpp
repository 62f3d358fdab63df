#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bregfw/kernels.hpp"
#include "bregfw/objectives.hpp"
#include "bregfw/regions.hpp"
#include "bregfw/solvers.hpp"

namespace bregfw {

struct DescentLemmaReport {
  long violations = 0;
  double worst_ratio = 0.0;  // max |D_f| / D_phi over usable pairs
  long pairs_checked = 0;
};

// Samples interior pairs and tests |D_f(x, y)| <= L * D_phi(x, y) +
// 1e-9 * (1 + |f(x)|). Pairs with D_phi below 1e-300 are skipped for the
// ratio but still tested against the additive slack.
DescentLemmaReport check_descent_lemma(const Objective& objective, const Kernel& kernel,
                                       double L, const Region& region, long n_pairs,
                                       std::uint64_t seed);

// Central-difference audit with h_j = 1e-5 * (1 + |x_j|); returns
// max_j |fd_j - g_j| / (1 + |g_j|).
double gradient_fd_check(const Objective& objective, const DensePoint& x);

enum class RateModel { PowerLaw, Geometric };

struct RateFit {
  RateModel model = RateModel::PowerLaw;
  double exponent = 0.0;   // PowerLaw: slope of log y vs log t
  double ratio = 1.0;      // Geometric: per-iteration factor
  double r_squared = 0.0;
  long window_begin = 0;   // indices into the series actually fit
  long window_end = 0;
};

// Fits log(y) against log(t) and against t over the tail window (fraction of
// the positive-valued tail, default last half) and returns the better model by
// r^2 (ties prefer PowerLaw). Throws DegenerateSeries with fewer than 5 usable
// points.
RateFit fit_rate(std::span<const double> series, double tail_fraction = 0.5);

enum class BoundKind {
  SublinearConvex,  // 2^(1+nu) L D^2 / (t + 2)^nu
  NonconvexGlobal,  // 2 max{h0, L D^2} / (T + 1)^(nu / (1 + nu))
  LocalSublinear,   // 2^(1+nu) mu L D^2 / (rho (t + 2)^nu)
};

BoundKind bound_kind_from_string(const std::string& name);  // UnknownKind

struct BoundParams {
  double L = 0.0;
  double diameter_sq = 0.0;
  double nu = 1.0;
  long t = 0;        // iteration (SublinearConvex / LocalSublinear) or horizon T
  double h0 = 0.0;   // initial primal gap (NonconvexGlobal)
  double mu = 0.0;   // LocalSublinear
  double rho = 0.0;  // LocalSublinear
};

double theorem_bound(BoundKind kind, const BoundParams& params);

// Cumulative inner-evaluation audit for an adaptive run: checks the recorded
// running total against linesearch_budget_bound at every record, using the
// run's largest accepted L and smallest accepted exponent. Returns the number
// of violated records.
long audit_linesearch_budget(const RunResult& result, const StepRuleSpec& spec);

}  // namespace bregfw
