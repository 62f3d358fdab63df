#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bregfw/problem.hpp"
#include "bregfw/stepsize.hpp"

namespace bregfw {

enum class StepKind { FW, Away, Drop };
std::string step_kind_name(StepKind kind);

struct IterationRecord {
  long t = 0;
  double primal = 0.0;       // f(x_t)
  double fw_gap = 0.0;       // max_v <grad f(x_t), x_t - v>
  double gamma = 0.0;        // step applied at x_t (0 on the terminal record)
  StepKind step_kind = StepKind::FW;
  double L_t = 0.0;          // model constant in force (0 for schedule rules)
  double nu_t = 1.0;
  long inner_evals = 0;      // acceptance evaluations spent this iteration
  double elapsed_seconds = 0.0;
};

enum class Termination { GapTolerance, MaxIters, WallClock, LineSearchDiverged };
std::string termination_name(Termination t);

class ActiveSet;

struct SolveConfig {
  long max_iters = 1000;
  double fw_gap_tolerance = 1e-7;
  std::uint64_t rng_seed = 1234;
  long record_every = 1;  // terminal record always kept
  std::optional<double> wall_clock_limit_seconds;
  // Away-step audit hook, invoked after every applied step with the iteration
  // index and the current decomposition. Ignored by the other solvers.
  std::function<void(long, const ActiveSet&)> on_active_set;
};

struct RunResult {
  std::vector<IterationRecord> records;
  DensePoint final_x;
  Termination termination = Termination::MaxIters;
  long total_inner_evals = 0;
};

// Maintained convex decomposition x = sum_v lambda_v v for the away-step
// solver. Weights sum to 1 within 1e-9 (renormalized past 1e-12 drift), atoms
// are distinct under bit equality, and the cached iterate matches the
// decomposition within 1e-9 (recomputed from atoms past 1e-12 drift).
class ActiveSet {
 public:
  explicit ActiveSet(DensePoint x0);

  std::size_t size() const { return atoms_.size(); }
  const DensePoint& atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const DensePoint& iterate() const { return x_; }

  // Index of the stored atom maximizing <direction, v>; ties keep the earliest.
  std::size_t argmax_inner(const DensePoint& direction) const;

  // Toward-vertex update: all weights scale by (1 - gamma), v gains gamma
  // (inserted if new). gamma == 1 collapses the set to {v}.
  void apply_fw_step(const DensePoint& v, double gamma);
  // Away update: weights scale by (1 + gamma), atom i loses gamma; at
  // gamma == gamma_max its weight hits zero and the atom is removed.
  // Returns true when the atom was dropped.
  bool apply_away_step(std::size_t i, double gamma);

  // max-norm drift between the cached iterate and sum lambda_v v.
  double reconstruction_drift() const;
  double weight_sum() const;

 private:
  void renormalize_if_needed();
  DensePoint reconstruct() const;

  std::vector<DensePoint> atoms_;
  std::vector<double> weights_;
  DensePoint x_;
};

// One LMO call: returns (gap, v) with gap = <grad f(x), x - v>.
std::pair<double, DensePoint> fw_gap(const ProblemInstance& problem, const DensePoint& x);

// Toward-vertex method: x_{t+1} = (1 - gamma_t) x_t + gamma_t v_t. One LMO and
// one gradient per iteration plus whatever the step rule spends.
RunResult fw_run(const ProblemInstance& problem, const StepRuleSpec& rule,
                 const SolveConfig& config, DensePoint x0);

// Away-step variant over polytopes; x0 must be a vertex. Chooses between the
// toward direction x - v_fw and the away direction v_away - x by comparing
// <grad, x - v_fw> >= <grad, v_away - x> (ties toward), with gamma_max = 1 or
// lambda / (1 - lambda) respectively (away cap clamped to 1e12).
RunResult afw_run(const ProblemInstance& problem, const StepRuleSpec& rule,
                  const SolveConfig& config, DensePoint x0);

// Step-size schedule gamma_t for the mirror-descent baseline.
struct GammaSchedule {
  enum class Kind {
    Diminishing,  // gamma_t = gamma0 / sqrt(t + 1), the classic choice
    Constant,     // gamma_t = gamma0
    InverseL,     // gamma_t = 1 / L from the problem constants or the
                  // objective's closed form; InvalidConstant when neither
                  // exists or L = 0
  };
  Kind kind = Kind::Diminishing;
  double gamma0 = 1.0;  // ignored by InverseL
};

// Entropy mirror descent on the inequality simplex: y_j = x_j exp(-gamma_t g_j),
// kept when sum y <= 1, otherwise normalized to sum 1. Requires the simplex
// region and entropy kernel (KernelMismatch otherwise). Records carry the FW
// gap so runs are comparable with the conditional-gradient methods.
RunResult mirror_descent_run(const ProblemInstance& problem,
                             const GammaSchedule& gamma_schedule,
                             const SolveConfig& config, DensePoint x0);

// Projected gradient with a constant step over regions with a cheap Euclidean
// projection (ball, box, simplex); UnsupportedRegion otherwise.
RunResult projected_gradient_run(const ProblemInstance& problem, double step,
                                 const SolveConfig& config, DensePoint x0);

// Vertex start for the away-step solver: lmo(grad f(reference)) when a
// reference point is given, else lmo(all-ones direction).
DensePoint afw_start(const ProblemInstance& problem,
                     const std::optional<DensePoint>& reference = std::nullopt);

}  // namespace bregfw
