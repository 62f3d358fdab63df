#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bregfw/datasets.hpp"
#include "bregfw/problem.hpp"
#include "bregfw/solvers.hpp"

namespace bregfw {

struct SolverSpec {
  std::string name;              // trace label, e.g. "BregFW"
  std::string algorithm;         // fw | afw | mirror_descent | projected_gradient
  StepRuleSpec step;             // fw / afw rules
  // mirror_descent schedule: diminishing gamma0/sqrt(t+1) (the classic
  // baseline), constant gamma0, or inverse_l (1/L, no gamma0).
  std::string md_schedule = "diminishing";
  std::optional<double> md_step; // gamma0 for diminishing/constant; default 1
  std::optional<double> pg_step; // projected_gradient, required
  std::optional<long> max_iters; // overrides [run] max_iters
};

struct ProblemSection {
  std::string objective;  // objective id string
  bool from_files = false;
  std::string a_file, b_file;
  RecipeSpec recipe;
  std::optional<double> f_star_override;
  TheoryConstants constants;
};

struct RegionSection {
  std::string kind;  // simplex | l2ball | box | ksparse | nuclear_ball
  std::size_t n = 0, rows = 0, cols = 0, k = 1;
  double b_max = 1.0;
  std::optional<double> xi;  // nuclear radius; absent uses the generator hint
  std::vector<double> lower, upper;
  std::optional<double> lower_scalar, upper_scalar;
  // Stacked-factor box: the W block and H block get separate upper bounds.
  std::optional<double> upper_w, upper_h;
};

struct KernelSection {
  std::string id = "euclidean";
  std::optional<double> c;  // quartic_scaled weight; absent = ||V||_F for nmf
};

struct RunSection {
  long max_iters = 1000;
  double tolerance = 1e-7;
  long repetitions = 1;
  long record_every = 1;
  std::uint64_t seed = 1234;
  std::optional<double> wall_clock_limit;
  std::string output;       // trace directory; empty = no files
  std::string x0 = "auto";  // auto | uniform | center | ones | random_unit | lmo | file:PATH
};

struct ExperimentConfig {
  ProblemSection problem;
  RegionSection region;
  KernelSection kernel;
  std::vector<SolverSpec> solvers;
  RunSection run;
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;  // all collected, each with line context
  bool ok() const { return errors.empty() && config.has_value(); }
};

// Structured text: '#' comments, [section] headers ([solver NAME] repeats),
// key = value lines. Unknown keys/sections, bad numbers, and cross-field
// violations are all collected, not first-error-only.
ParseResult parse_config_text(const std::string& text);
ParseResult load_config(const std::string& path);

// Instantiated problem for one repetition (dataset seed = run.seed + rep).
struct BuiltProblem {
  ProblemInstance instance;
  std::optional<double> f_star;
  std::string fstar_source;  // config | generator | best_found
  DensePoint default_x0;
};
BuiltProblem build_problem(const ExperimentConfig& config, long repetition);

struct RunOutcome {
  std::string solver;
  long repetition = 0;
  RunResult result;
  double final_primal = 0.0;
  double final_fw_gap = 0.0;
  double wall_seconds = 0.0;
  std::optional<double> f_star;  // this repetition's reference optimum
  bool diverged = false;         // no gap progress and no tolerance hit
  bool failed = false;
  std::string failure;
};

struct SolverSummary {
  std::string solver;
  long runs = 0, failures = 0, diverged = 0;
  double primal_gap_mean = 0.0, primal_gap_std = 0.0;
  double fw_gap_mean = 0.0, fw_gap_std = 0.0;
  double wall_mean = 0.0, wall_std = 0.0;
};

struct ExperimentOutcome {
  std::vector<RunOutcome> runs;
  std::vector<SolverSummary> summary;
  double f_star = 0.0;
  std::string fstar_source;
};

// Runs every solver on every repetition's instance. Per-run failures are
// recorded in the outcome, not rethrown.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

// Traces (CSV + JSON per run) and summary.json under `outdir`.
void write_outputs(const ExperimentOutcome& outcome, const std::string& outdir);

// Summary recomputed from the trace files on disk; used by `check` and tests.
std::vector<SolverSummary> summarize_from_traces(const std::string& outdir,
                                                 const std::vector<RunOutcome>& runs,
                                                 double f_star);

}  // namespace bregfw
