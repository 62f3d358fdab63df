#include "bregfw/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "bregfw/rng.hpp"

namespace bregfw {

DescentLemmaReport check_descent_lemma(const Objective& objective, const Kernel& kernel,
                                       double L, const Region& region, long n_pairs,
                                       std::uint64_t seed) {
  if (!(L > 0.0)) throw InvalidConstant("check_descent_lemma: L must be positive");
  if (n_pairs < 1) throw InvalidConstant("check_descent_lemma: n_pairs must be >= 1");
  Rng rng(seed);
  DescentLemmaReport report;
  for (long p = 0; p < n_pairs; ++p) {
    const DensePoint x = region.sample_interior(rng);
    const DensePoint y = region.sample_interior(rng);
    const double df = objective.bregman_gap(x, y);
    const double dphi = kernel.divergence(x, y);
    const double slack = 1e-9 * (1.0 + std::fabs(objective.value(x)));
    ++report.pairs_checked;
    if (std::fabs(df) > L * dphi + slack) ++report.violations;
    if (dphi >= 1e-300)
      report.worst_ratio = std::max(report.worst_ratio, std::fabs(df) / dphi);
  }
  return report;
}

double gradient_fd_check(const Objective& objective, const DensePoint& x) {
  const DensePoint g = objective.gradient(x);
  double worst = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = 1e-5 * (1.0 + std::fabs(x[j]));
    DensePoint hi = x, lo = x;
    hi[j] += h;
    lo[j] -= h;
    const double fd = (objective.value(hi) - objective.value(lo)) / (2.0 * h);
    worst = std::max(worst, std::fabs(fd - g[j]) / (1.0 + std::fabs(g[j])));
  }
  return worst;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double r_squared = 0.0;
};

LineFit least_squares(const std::vector<double>& u, const std::vector<double>& w) {
  const double n = static_cast<double>(u.size());
  double mu = 0.0, mw = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mw += w[i];
  }
  mu /= n;
  mw /= n;
  double suu = 0.0, suw = 0.0, sww = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double du = u[i] - mu;
    const double dw = w[i] - mw;
    suu += du * du;
    suw += du * dw;
    sww += dw * dw;
  }
  LineFit fit;
  if (suu < 1e-300) return fit;
  fit.slope = suw / suu;
  if (sww < 1e-300) {
    fit.r_squared = 1.0;  // constant response: a flat line is a perfect fit
  } else {
    const double ss_res = sww - fit.slope * suw;
    fit.r_squared = 1.0 - std::max(ss_res, 0.0) / sww;
  }
  return fit;
}

}  // namespace

RateFit fit_rate(std::span<const double> series, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw InvalidConstant("fit_rate: tail_fraction must lie in (0, 1]");
  std::vector<long> usable;
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i] > 0.0 && std::isfinite(series[i])) usable.push_back(static_cast<long>(i));
  const std::size_t want = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(usable.size())));
  if (usable.size() > want)
    usable.erase(usable.begin(), usable.end() - static_cast<std::ptrdiff_t>(want));
  if (usable.size() < 5)
    throw DegenerateSeries("fit_rate: fewer than 5 usable points in the tail window");

  std::vector<double> log_t, lin_t, log_y;
  for (long i : usable) {
    log_t.push_back(std::log(static_cast<double>(i) + 1.0));
    lin_t.push_back(static_cast<double>(i));
    log_y.push_back(std::log(series[static_cast<std::size_t>(i)]));
  }
  const LineFit power = least_squares(log_t, log_y);
  const LineFit geo = least_squares(lin_t, log_y);

  RateFit fit;
  fit.window_begin = usable.front();
  fit.window_end = usable.back() + 1;
  if (geo.r_squared > power.r_squared) {
    fit.model = RateModel::Geometric;
    fit.ratio = std::exp(geo.slope);
    fit.exponent = geo.slope;
    fit.r_squared = geo.r_squared;
  } else {
    fit.model = RateModel::PowerLaw;
    fit.exponent = power.slope;
    fit.ratio = std::exp(power.slope);
    fit.r_squared = power.r_squared;
  }
  return fit;
}

BoundKind bound_kind_from_string(const std::string& name) {
  if (name == "sublinear_convex") return BoundKind::SublinearConvex;
  if (name == "nonconvex_global") return BoundKind::NonconvexGlobal;
  if (name == "local_sublinear") return BoundKind::LocalSublinear;
  throw UnknownKind("unknown bound kind: " + name);
}

double theorem_bound(BoundKind kind, const BoundParams& params) {
  if (!(params.nu > 0.0 && params.nu <= 1.0))
    throw InvalidConstant("theorem_bound: nu must lie in (0, 1]");
  if (params.t < 0) throw InvalidConstant("theorem_bound: t must be nonnegative");
  if (!(params.L > 0.0) || !(params.diameter_sq > 0.0))
    throw InvalidConstant("theorem_bound: L and diameter_sq must be positive");
  const double t = static_cast<double>(params.t);
  switch (kind) {
    case BoundKind::SublinearConvex:
      return std::pow(2.0, 1.0 + params.nu) * params.L * params.diameter_sq /
             std::pow(t + 2.0, params.nu);
    case BoundKind::NonconvexGlobal: {
      if (params.h0 < 0.0) throw InvalidConstant("theorem_bound: h0 must be nonnegative");
      const double top = 2.0 * std::max(params.h0, params.L * params.diameter_sq);
      return top / std::pow(t + 1.0, params.nu / (1.0 + params.nu));
    }
    case BoundKind::LocalSublinear: {
      if (!(params.mu > 0.0) || !(params.rho > 0.0))
        throw InvalidConstant("theorem_bound: mu and rho must be positive");
      return std::pow(2.0, 1.0 + params.nu) * params.mu * params.L * params.diameter_sq /
             (params.rho * std::pow(t + 2.0, params.nu));
    }
  }
  throw UnknownKind("theorem_bound: unknown bound kind");
}

long audit_linesearch_budget(const RunResult& result, const StepRuleSpec& spec) {
  double L_max = spec.L_init;
  double nu_min = 1.0;
  bool any = false;
  for (const IterationRecord& rec : result.records) {
    if (rec.inner_evals > 0) {
      any = true;
      L_max = std::max(L_max, rec.L_t);
      nu_min = std::min(nu_min, rec.nu_t);
    }
  }
  if (!any) return 0;

  long violations = 0;
  long cumulative = 0;
  for (const IterationRecord& rec : result.records) {
    cumulative += rec.inner_evals;
    if (rec.inner_evals == 0) continue;
    const double bound = linesearch_budget_bound(rec.t, spec.eta, spec.tau, spec.beta,
                                                 nu_min, L_max, spec.L_init);
    if (static_cast<double>(cumulative) > bound + 1e-9) ++violations;
  }
  return violations;
}

}  // namespace bregfw
