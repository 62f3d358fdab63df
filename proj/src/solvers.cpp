#include "bregfw/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace bregfw {

namespace {

constexpr double kAwayCap = 1e12;       // gamma_max clamp when 1 - lambda underflows
constexpr double kWeightFloor = 1e-12;  // active-set weight considered zero

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct RuleState {
  double L_short = 0.0;   // constant for the short rules
  double nu_short = 1.0;  // exponent for BregmanShort / FixedNonconvex
  long horizon = 0;
  double L_prev = 1.0;  // adaptive warm start
};

RuleState resolve_rule(const StepRuleSpec& rule, const ProblemInstance& problem,
                       const SolveConfig& config) {
  RuleState st;
  st.L_prev = rule.L_init;
  st.horizon = rule.horizon.value_or(config.max_iters);
  const auto& c = problem.constants;
  switch (rule.kind) {
    case StepRuleKind::BregmanShort:
    case StepRuleKind::EuclideanShort: {
      std::optional<double> L = rule.L ? rule.L : c.smad_L;
      if (!L && problem.objective->smad_constant()) L = problem.objective->smad_constant();
      if (!L) throw InvalidConstant("short step rule needs a smoothness constant L");
      st.L_short = *L;
      st.nu_short = rule.nu.value_or(c.nu.value_or(1.0));
      break;
    }
    case StepRuleKind::FixedNonconvex:
      st.nu_short = rule.nu.value_or(c.nu.value_or(1.0));
      break;
    default: break;
  }
  if (!(st.L_prev > 0.0)) throw InvalidConstant("step rule: L_init must be positive");
  return st;
}

void check_start(const ProblemInstance& problem, const DensePoint& x0, const char* who) {
  if (x0.shape != problem.region.point_shape())
    throw ShapeMismatch(std::string(who) + ": x0 shape " + shape_string(x0.shape) +
                        " does not match the region's " +
                        shape_string(problem.region.point_shape()));
  if (!problem.region.contains(x0, 1e-9))
    throw InfeasibleStart(std::string(who) + ": x0 lies outside the feasible region");
}

}  // namespace

std::string step_kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::FW: return "fw";
    case StepKind::Away: return "away";
    case StepKind::Drop: return "drop";
  }
  return "?";
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::GapTolerance: return "gap_tolerance";
    case Termination::MaxIters: return "max_iters";
    case Termination::WallClock: return "wall_clock";
    case Termination::LineSearchDiverged: return "line_search_diverged";
  }
  return "?";
}

ActiveSet::ActiveSet(DensePoint x0) : x_(x0) {
  atoms_.push_back(std::move(x0));
  weights_.push_back(1.0);
}

std::size_t ActiveSet::argmax_inner(const DensePoint& direction) const {
  std::size_t best = 0;
  double best_val = dot(direction, atoms_[0]);
  for (std::size_t i = 1; i < atoms_.size(); ++i) {
    const double val = dot(direction, atoms_[i]);
    if (val > best_val) {
      best_val = val;
      best = i;
    }
  }
  return best;
}

void ActiveSet::apply_fw_step(const DensePoint& v, double gamma) {
  if (gamma == 1.0) {
    atoms_.assign(1, v);
    weights_.assign(1, 1.0);
    x_ = v;
    return;
  }
  const DensePoint d = sub(x_, v);
  axpy(-gamma, d, x_);
  for (double& w : weights_) w *= 1.0 - gamma;
  std::size_t hit = atoms_.size();
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (bit_equal(atoms_[i], v)) {
      hit = i;
      break;
    }
  }
  if (hit < atoms_.size()) {
    weights_[hit] += gamma;
  } else {
    atoms_.push_back(v);
    weights_.push_back(gamma);
  }
  renormalize_if_needed();
}

bool ActiveSet::apply_away_step(std::size_t i, double gamma) {
  const DensePoint d = sub(atoms_[i], x_);
  axpy(-gamma, d, x_);
  for (double& w : weights_) w *= 1.0 + gamma;
  weights_[i] -= gamma;
  const bool dropped = weights_[i] <= kWeightFloor;
  if (dropped) {
    atoms_.erase(atoms_.begin() + static_cast<std::ptrdiff_t>(i));
    weights_.erase(weights_.begin() + static_cast<std::ptrdiff_t>(i));
  }
  renormalize_if_needed();
  return dropped;
}

double ActiveSet::reconstruction_drift() const { return max_abs_diff(x_, reconstruct()); }

double ActiveSet::weight_sum() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

void ActiveSet::renormalize_if_needed() {
  const double s = weight_sum();
  if (std::fabs(s - 1.0) > kWeightFloor) {
    for (double& w : weights_) w /= s;
  }
  if (reconstruction_drift() > kWeightFloor) x_ = reconstruct();
}

DensePoint ActiveSet::reconstruct() const {
  DensePoint acc = atoms_[0];
  scale(weights_[0], acc);
  for (std::size_t i = 1; i < atoms_.size(); ++i) axpy(weights_[i], atoms_[i], acc);
  return acc;
}

std::pair<double, DensePoint> fw_gap(const ProblemInstance& problem, const DensePoint& x) {
  const DensePoint g = problem.objective->gradient(x);
  DensePoint v = problem.region.lmo(g);
  const double gap = dot(g, sub(x, v));
  return {gap, std::move(v)};
}

namespace {

struct StepDecision {
  StepOutcome out;
  bool diverged = false;
};

// Runs the configured rule for direction d with <grad, d> = gap > 0.
StepDecision take_step(const ProblemInstance& problem, const StepRuleSpec& rule,
                       RuleState& st, long t, const DensePoint& x, const DensePoint& v,
                       const DensePoint& d, double gap, double gamma_max) {
  StepDecision dec;
  switch (rule.kind) {
    case StepRuleKind::BregmanShort: {
      const double div = problem.kernel.divergence(v, x);
      const double gamma =
          bregman_short_gamma(st.L_short, st.nu_short, gap, div, gamma_max);
      dec.out = {gamma, st.L_short, st.nu_short, 0, true};
      return dec;
    }
    case StepRuleKind::EuclideanShort: {
      const double dist2 = nrm2_sq(d);
      const double gamma =
          dist2 <= 0.0 ? gamma_max : std::min(gap / (st.L_short * dist2), gamma_max);
      dec.out = {gamma, st.L_short, 1.0, 0, true};
      return dec;
    }
    case StepRuleKind::OpenLoop:
      dec.out = {std::min(open_loop_gamma(t), gamma_max), 0.0, 1.0, 0, true};
      return dec;
    case StepRuleKind::FixedNonconvex:
      dec.out = {std::min(fixed_nonconvex_gamma(st.horizon, st.nu_short), gamma_max),
                 0.0, st.nu_short, 0, true};
      return dec;
    case StepRuleKind::AdaptiveBregman:
      try {
        dec.out = adaptive_bregman_step(*problem.objective, problem.kernel, x, v, d, gap,
                                        st.L_prev, gamma_max, rule);
        st.L_prev = dec.out.L_star;
      } catch (const LineSearchDiverged&) {
        dec.diverged = true;
      }
      return dec;
    case StepRuleKind::EuclideanAdaptive:
      try {
        dec.out = euclidean_adaptive_step(*problem.objective, x, v, d, gap, st.L_prev,
                                          gamma_max, rule);
        st.L_prev = dec.out.L_star;
      } catch (const LineSearchDiverged&) {
        dec.diverged = true;
      }
      return dec;
  }
  throw UnknownKind("take_step: unknown step rule");
}

double rule_L_in_force(const StepRuleSpec& rule, const RuleState& st) {
  switch (rule.kind) {
    case StepRuleKind::BregmanShort:
    case StepRuleKind::EuclideanShort: return st.L_short;
    case StepRuleKind::AdaptiveBregman:
    case StepRuleKind::EuclideanAdaptive: return st.L_prev;
    default: return 0.0;
  }
}

}  // namespace

RunResult fw_run(const ProblemInstance& problem, const StepRuleSpec& rule,
                 const SolveConfig& config, DensePoint x0) {
  check_start(problem, x0, "fw_run");
  if (config.record_every < 1) throw InvalidConstant("fw_run: record_every must be >= 1");
  RuleState st = resolve_rule(rule, problem, config);

  RunResult res;
  res.final_x = std::move(x0);
  DensePoint& x = res.final_x;
  const auto start = Clock::now();

  for (long t = 0;; ++t) {
    const DensePoint g = problem.objective->gradient(x);
    const DensePoint v = problem.region.lmo(g);
    const DensePoint d = sub(x, v);
    const double gap = dot(g, d);
    const double primal = problem.objective->value(x);
    const double elapsed = seconds_since(start);

    IterationRecord rec;
    rec.t = t;
    rec.primal = primal;
    rec.fw_gap = gap;
    rec.L_t = rule_L_in_force(rule, st);
    rec.nu_t = st.nu_short;
    rec.elapsed_seconds = elapsed;

    if (gap <= config.fw_gap_tolerance) {
      res.records.push_back(rec);
      res.termination = Termination::GapTolerance;
      return res;
    }
    if (t >= config.max_iters) {
      res.records.push_back(rec);
      res.termination = Termination::MaxIters;
      return res;
    }
    if (config.wall_clock_limit_seconds && elapsed > *config.wall_clock_limit_seconds) {
      res.records.push_back(rec);
      res.termination = Termination::WallClock;
      return res;
    }

    const StepDecision dec = take_step(problem, rule, st, t, x, v, d, gap, 1.0);
    if (dec.diverged) {
      res.records.push_back(rec);
      res.termination = Termination::LineSearchDiverged;
      return res;
    }
    res.total_inner_evals += dec.out.inner_evals;
    rec.gamma = dec.out.gamma;
    rec.L_t = dec.out.L_star;
    rec.nu_t = dec.out.nu_star;
    rec.inner_evals = dec.out.inner_evals;
    if (t % config.record_every == 0) res.records.push_back(rec);

    if (dec.out.gamma == 1.0) {
      x = v;
    } else {
      axpy(-dec.out.gamma, d, x);
    }
  }
}

RunResult afw_run(const ProblemInstance& problem, const StepRuleSpec& rule,
                  const SolveConfig& config, DensePoint x0) {
  if (!problem.region.is_polytope())
    throw UnsupportedRegion("afw_run: the away-step solver needs a polytope region");
  check_start(problem, x0, "afw_run");
  if (config.record_every < 1) throw InvalidConstant("afw_run: record_every must be >= 1");
  RuleState st = resolve_rule(rule, problem, config);

  RunResult res;
  ActiveSet active(std::move(x0));
  const auto start = Clock::now();

  for (long t = 0;; ++t) {
    const DensePoint& x = active.iterate();
    const DensePoint g = problem.objective->gradient(x);
    const DensePoint v_fw = problem.region.lmo(g);
    const DensePoint d_fw = sub(x, v_fw);
    const double gap = dot(g, d_fw);
    const double primal = problem.objective->value(x);
    const double elapsed = seconds_since(start);

    IterationRecord rec;
    rec.t = t;
    rec.primal = primal;
    rec.fw_gap = gap;
    rec.L_t = rule_L_in_force(rule, st);
    rec.nu_t = st.nu_short;
    rec.elapsed_seconds = elapsed;

    if (gap <= config.fw_gap_tolerance) {
      res.records.push_back(rec);
      res.termination = Termination::GapTolerance;
      break;
    }
    if (t >= config.max_iters) {
      res.records.push_back(rec);
      res.termination = Termination::MaxIters;
      break;
    }
    if (config.wall_clock_limit_seconds && elapsed > *config.wall_clock_limit_seconds) {
      res.records.push_back(rec);
      res.termination = Termination::WallClock;
      break;
    }

    const std::size_t away_idx = active.argmax_inner(g);
    const DensePoint v_away = active.atom(away_idx);
    const DensePoint d_away = sub(v_away, x);
    const double away_gap = dot(g, d_away);
    const bool toward = gap >= away_gap;

    double gamma_max = 1.0;
    if (!toward) {
      const double lambda = active.weight(away_idx);
      const double denom = 1.0 - lambda;
      gamma_max = denom <= 0.0 ? kAwayCap : std::min(lambda / denom, kAwayCap);
    }
    const DensePoint& v_sel = toward ? v_fw : v_away;
    const DensePoint& d_sel = toward ? d_fw : d_away;
    const double step_gap = toward ? gap : away_gap;

    const StepDecision dec =
        take_step(problem, rule, st, t, x, v_sel, d_sel, step_gap, gamma_max);
    if (dec.diverged) {
      res.records.push_back(rec);
      res.termination = Termination::LineSearchDiverged;
      break;
    }
    res.total_inner_evals += dec.out.inner_evals;
    rec.gamma = dec.out.gamma;
    rec.L_t = dec.out.L_star;
    rec.nu_t = dec.out.nu_star;
    rec.inner_evals = dec.out.inner_evals;

    if (toward) {
      active.apply_fw_step(v_fw, dec.out.gamma);
      rec.step_kind = StepKind::FW;
    } else {
      const bool dropped = active.apply_away_step(away_idx, dec.out.gamma);
      rec.step_kind = dropped ? StepKind::Drop : StepKind::Away;
    }
    if (config.on_active_set) config.on_active_set(t, active);
    if (t % config.record_every == 0) res.records.push_back(rec);
  }
  res.final_x = active.iterate();
  return res;
}

RunResult mirror_descent_run(const ProblemInstance& problem,
                             const GammaSchedule& gamma_schedule,
                             const SolveConfig& config, DensePoint x0) {
  if (problem.kernel.id() != KernelId::Entropy)
    throw KernelMismatch("mirror_descent_run: needs the entropy kernel");
  if (problem.region.kind() != RegionKind::SimplexLeqOne)
    throw KernelMismatch("mirror_descent_run: needs the inequality-simplex region");
  check_start(problem, x0, "mirror_descent_run");
  if (config.record_every < 1)
    throw InvalidConstant("mirror_descent_run: record_every must be >= 1");

  double base = gamma_schedule.gamma0;
  if (gamma_schedule.kind == GammaSchedule::Kind::InverseL) {
    std::optional<double> L = problem.constants.smad_L;
    if (!L) L = problem.objective->smad_constant();
    if (!L) throw InvalidConstant("mirror_descent_run: inverse_l needs a known L");
    base = 1.0 / *L;
  }
  if (!(base > 0.0) || !std::isfinite(base))
    throw InvalidConstant("mirror_descent_run: step must be positive and finite");

  RunResult res;
  res.final_x = std::move(x0);
  DensePoint& x = res.final_x;
  const auto start = Clock::now();

  for (long t = 0;; ++t) {
    const DensePoint g = problem.objective->gradient(x);
    const DensePoint v = problem.region.lmo(g);
    const double gap = dot(g, sub(x, v));
    const double primal = problem.objective->value(x);
    const double elapsed = seconds_since(start);

    IterationRecord rec;
    rec.t = t;
    rec.primal = primal;
    rec.fw_gap = gap;
    rec.nu_t = 1.0;
    rec.elapsed_seconds = elapsed;

    if (gap <= config.fw_gap_tolerance) {
      res.records.push_back(rec);
      res.termination = Termination::GapTolerance;
      return res;
    }
    if (t >= config.max_iters) {
      res.records.push_back(rec);
      res.termination = Termination::MaxIters;
      return res;
    }
    if (config.wall_clock_limit_seconds && elapsed > *config.wall_clock_limit_seconds) {
      res.records.push_back(rec);
      res.termination = Termination::WallClock;
      return res;
    }

    const double gamma = gamma_schedule.kind == GammaSchedule::Kind::Diminishing
                             ? base / std::sqrt(double(t + 1))
                             : base;
    DensePoint y = x;
    double sum = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      y[j] = x[j] * std::exp(-gamma * g[j]);
      sum += y[j];
    }
    if (sum > 1.0) {
      for (std::size_t j = 0; j < y.size(); ++j) y[j] /= sum;
    }
    rec.gamma = gamma;
    if (t % config.record_every == 0) res.records.push_back(rec);
    x = y;
  }
}

RunResult projected_gradient_run(const ProblemInstance& problem, double step,
                                 const SolveConfig& config, DensePoint x0) {
  if (!(step > 0.0))
    throw InvalidConstant("projected_gradient_run: step must be positive");
  check_start(problem, x0, "projected_gradient_run");
  if (config.record_every < 1)
    throw InvalidConstant("projected_gradient_run: record_every must be >= 1");

  RunResult res;
  res.final_x = std::move(x0);
  DensePoint& x = res.final_x;
  const auto start = Clock::now();

  for (long t = 0;; ++t) {
    const DensePoint g = problem.objective->gradient(x);
    const DensePoint v = problem.region.lmo(g);
    const double gap = dot(g, sub(x, v));
    const double primal = problem.objective->value(x);
    const double elapsed = seconds_since(start);

    IterationRecord rec;
    rec.t = t;
    rec.primal = primal;
    rec.fw_gap = gap;
    rec.nu_t = 1.0;
    rec.elapsed_seconds = elapsed;

    if (gap <= config.fw_gap_tolerance) {
      res.records.push_back(rec);
      res.termination = Termination::GapTolerance;
      return res;
    }
    if (t >= config.max_iters) {
      res.records.push_back(rec);
      res.termination = Termination::MaxIters;
      return res;
    }
    if (config.wall_clock_limit_seconds && elapsed > *config.wall_clock_limit_seconds) {
      res.records.push_back(rec);
      res.termination = Termination::WallClock;
      return res;
    }

    DensePoint y = x;
    axpy(-step, g, y);
    rec.gamma = step;
    if (t % config.record_every == 0) res.records.push_back(rec);
    x = problem.region.project(y);
  }
}

DensePoint afw_start(const ProblemInstance& problem,
                     const std::optional<DensePoint>& reference) {
  if (reference) {
    const DensePoint g = problem.objective->gradient(*reference);
    return problem.region.lmo(g);
  }
  DensePoint dir;
  dir.shape = problem.region.point_shape();
  std::size_t n = 1;
  for (std::size_t s : dir.shape) n *= s;
  dir.data.assign(n, 1.0);
  return problem.region.lmo(dir);
}

}  // namespace bregfw
