// bregfw: experiment driver and diagnostics front end.
//
// Subcommands:
//   run <config>              run the configured solver comparison
//   check <config>            diagnostics suite, JSON verdicts
//   lmo-test <region>         brute-force audit of the linear minimization oracle
//   nu-est <kernel> <region>  sampled kernel scaling exponent
//
// Exit codes: 0 success, 1 validation error (bad arguments, bad config,
// bad descriptor), 2 runtime failure (solver failure, failed verdict).
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bregfw/config.hpp"
#include "bregfw/diagnostics.hpp"
#include "bregfw/errors.hpp"
#include "bregfw/kernels.hpp"
#include "bregfw/problem.hpp"
#include "bregfw/regions.hpp"
#include "bregfw/rng.hpp"
#include "bregfw/solvers.hpp"
#include "bregfw/traces.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

using bregfw::DensePoint;
using bregfw::Kernel;
using bregfw::Region;

// Descriptor grammar: kind[:arg,arg,...], e.g. simplex:5, box:3,-1,2,
// l2ball:4,2.5 (bound on the squared norm), ksparse:6,3, nuclear:3,4,2.
std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t begin = 0;
  while (begin <= s.size()) {
    const std::size_t end = s.find(sep, begin);
    if (end == std::string::npos) {
      parts.push_back(s.substr(begin));
      break;
    }
    parts.push_back(s.substr(begin, end - begin));
    begin = end + 1;
  }
  return parts;
}

double parse_num(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw bregfw::Error("bad number '" + s + "'");
  return v;
}

std::size_t parse_dim(const std::string& s) {
  const double v = parse_num(s);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e6)
    throw bregfw::Error("bad dimension '" + s + "'");
  return static_cast<std::size_t>(v);
}

Region parse_region(const std::string& descriptor) {
  const std::size_t colon = descriptor.find(':');
  const std::string kind = descriptor.substr(0, colon);
  std::vector<std::string> args;
  if (colon != std::string::npos) args = split(descriptor.substr(colon + 1), ',');

  auto arity = [&](std::size_t want, const char* usage) {
    if (args.size() != want)
      throw bregfw::Error("region '" + kind + "' wants " + usage);
  };
  if (kind == "simplex") {
    arity(1, "simplex:N");
    return Region::simplex(parse_dim(args[0]));
  }
  if (kind == "l2ball") {
    arity(2, "l2ball:N,B_MAX");
    return Region::l2_ball(parse_dim(args[0]), parse_num(args[1]));
  }
  if (kind == "box") {
    arity(3, "box:N,LO,HI");
    return Region::box(parse_dim(args[0]), parse_num(args[1]), parse_num(args[2]));
  }
  if (kind == "ksparse") {
    arity(2, "ksparse:N,K");
    return Region::k_sparse(parse_dim(args[0]), parse_dim(args[1]));
  }
  if (kind == "nuclear") {
    arity(3, "nuclear:ROWS,COLS,XI");
    return Region::nuclear_ball(parse_dim(args[0]), parse_dim(args[1]),
                                parse_num(args[2]));
  }
  throw bregfw::Error("unknown region kind '" + kind +
                      "' (simplex | l2ball | box | ksparse | nuclear)");
}

Kernel parse_kernel(const std::string& descriptor) {
  const std::size_t colon = descriptor.find(':');
  const std::string id = descriptor.substr(0, colon);
  if (id == "euclidean") return Kernel::euclidean();
  if (id == "entropy") return Kernel::entropy();
  if (id == "burg") return Kernel::burg();
  if (id == "quartic") return Kernel::quartic();
  if (id == "quartic_scaled") {
    if (colon == std::string::npos)
      throw bregfw::Error("quartic_scaled wants quartic_scaled:C");
    return Kernel::quartic_scaled(parse_num(descriptor.substr(colon + 1)));
  }
  throw bregfw::Error("unknown kernel '" + id +
                      "' (euclidean | entropy | burg | quartic | quartic_scaled:C)");
}

// ---------------------------------------------------------------------------
// run

void print_summary(const bregfw::ExperimentOutcome& out) {
  std::printf("f_star %.17g (%s)\n", out.f_star, out.fstar_source.c_str());
  std::printf("%-12s %5s %5s %5s  %-24s %-24s %s\n", "solver", "runs", "fail",
              "div", "primal gap (mean/std)", "fw gap (mean/std)", "wall s");
  for (const bregfw::SolverSummary& s : out.summary)
    std::printf("%-12s %5ld %5ld %5ld  %.4e / %.2e  %.4e / %.2e  %.3f\n",
                s.solver.c_str(), s.runs, s.failures, s.diverged,
                s.primal_gap_mean, s.primal_gap_std, s.fw_gap_mean, s.fw_gap_std,
                s.wall_mean);
}

int cmd_run(const std::string& config_path, const std::string& output_override) {
  auto parsed = bregfw::load_config(config_path);
  if (!parsed.ok()) {
    for (const std::string& e : parsed.errors) std::fprintf(stderr, "%s\n", e.c_str());
    return kValidation;
  }
  bregfw::ExperimentConfig config = *parsed.config;
  if (!output_override.empty()) config.run.output = output_override;

  const auto out = bregfw::run_experiment(config);
  print_summary(out);

  int failures = 0;
  for (const bregfw::RunOutcome& run : out.runs)
    if (run.failed) {
      ++failures;
      std::fprintf(stderr, "run failed: %s rep %ld: %s\n", run.solver.c_str(),
                   run.repetition, run.failure.c_str());
    }
  if (!config.run.output.empty()) {
    bregfw::write_outputs(out, config.run.output);
    std::printf("traces written to %s\n", config.run.output.c_str());
  }
  return failures == 0 ? kOk : kRuntime;
}

// ---------------------------------------------------------------------------
// check

struct Verdict {
  std::string name;
  std::string status;  // pass | fail | skip
  std::string detail;
};

bool is_adaptive(bregfw::StepRuleKind kind) {
  return kind == bregfw::StepRuleKind::AdaptiveBregman ||
         kind == bregfw::StepRuleKind::EuclideanAdaptive;
}

bool is_monotone_rule(bregfw::StepRuleKind kind) {
  return kind == bregfw::StepRuleKind::AdaptiveBregman ||
         kind == bregfw::StepRuleKind::BregmanShort;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

int cmd_check(const std::string& config_path, const std::string& json_path) {
  auto parsed = bregfw::load_config(config_path);
  if (!parsed.ok()) {
    for (const std::string& e : parsed.errors) std::fprintf(stderr, "%s\n", e.c_str());
    return kValidation;
  }
  const bregfw::ExperimentConfig& config = *parsed.config;
  std::vector<Verdict> verdicts;
  auto add = [&](std::string name, bool pass, std::string detail) {
    verdicts.push_back({std::move(name), pass ? "pass" : "fail", std::move(detail)});
  };
  auto skip = [&](std::string name, std::string why) {
    verdicts.push_back({std::move(name), "skip", std::move(why)});
  };

  const auto built = bregfw::build_problem(config, 0);
  const bregfw::ProblemInstance& problem = built.instance;

  {  // Gradients against central differences at interior points.
    bregfw::Rng rng(config.run.seed ^ 0x5eedu);
    double worst = 0.0;
    for (int i = 0; i < 64; ++i)
      worst = std::max(worst, bregfw::gradient_fd_check(
                                  *problem.objective,
                                  problem.region.sample_interior(rng)));
    add("gradient_fd", worst <= 1e-5, fmt("worst relative error %.2e over 64 "
                                          "interior points (limit 1e-5)", worst));
  }

  {  // Two-sided descent lemma at the problem's smoothness constant.
    std::optional<double> L = problem.constants.smad_L;
    if (!L) L = problem.objective->smad_constant();
    if (!L && problem.kernel.id() == bregfw::KernelId::ObjectiveAsKernel)
      L = 1.0;  // f is 1-smad relative to itself when convex
    if (L) {
      const auto rep = bregfw::check_descent_lemma(*problem.objective, problem.kernel,
                                                   *L, problem.region, 500,
                                                   config.run.seed ^ 0xddcu);
      add("descent_lemma", rep.violations == 0,
          fmt("|D_f| <= %.6g D_phi on %ld pairs, %ld violations, worst ratio %.6g",
              *L, rep.pairs_checked, rep.violations, rep.worst_ratio));
    } else {
      skip("descent_lemma", "no smoothness constant available");
    }
  }

  {  // LMO against the vertex enumeration, when the region is enumerable.
    try {
      const auto vertices = problem.region.enumerate_vertices();
      if (vertices.size() > 4096) {
        skip("lmo_brute_force", fmt("%zu vertices, too many to scan", vertices.size()));
      } else {
        bregfw::Rng rng(config.run.seed ^ 0x10u);
        const auto shape = problem.region.point_shape();
        std::size_t dim = 1;
        for (std::size_t s : shape) dim *= s;
        long violations = 0;
        for (int trial = 0; trial < 200; ++trial) {
          DensePoint d = shape.size() == 2
                             ? DensePoint::matrix(shape[0], shape[1], 0.0)
                             : DensePoint::vector(dim);
          for (double& v : d.data) v = rng.normal();
          const DensePoint v = problem.region.lmo(d);
          double brute = std::numeric_limits<double>::infinity();
          for (const DensePoint& u : vertices) brute = std::min(brute, dot(d, u));
          if (std::fabs(dot(d, v) - brute) > 1e-12 ||
              !problem.region.contains(v, 1e-12))
            ++violations;
        }
        add("lmo_brute_force", violations == 0,
            fmt("%zu vertices x 200 directions, %ld violations", vertices.size(),
                violations));
      }
    } catch (const bregfw::Error& e) {
      skip("lmo_brute_force", e.what());
    }
  }

  {  // Kernel scaling exponent on this region.
    try {
      const double gammas[] = {0.5, 0.25, 0.1, 0.05};
      const auto est = bregfw::estimate_nu(problem.kernel, problem.region, 16, gammas,
                                           config.run.seed ^ 0x77u);
      const bool euclid = problem.kernel.id() == bregfw::KernelId::Euclidean;
      add("nu_estimate", !euclid || est.nu_hat == 1.0,
          fmt("nu_hat %.2f (binding sample implies %.4f at gamma %.2f)%s", est.nu_hat,
              est.implied_nu, est.gamma,
              euclid ? "; euclidean kernel must give exactly 1" : ""));
    } catch (const bregfw::Error& e) {
      add("nu_estimate", false, e.what());
    }
  }

  const auto out = bregfw::run_experiment(config);

  {  // Per-run failures.
    std::string detail;
    long failures = 0;
    for (const bregfw::RunOutcome& run : out.runs)
      if (run.failed) {
        ++failures;
        detail += fmt(" %s rep %ld: %s;", run.solver.c_str(), run.repetition,
                      run.failure.c_str());
      }
    add("run_failures", failures == 0,
        failures == 0 ? fmt("all %zu runs completed", out.runs.size()) : detail);
  }

  {  // Final iterates feasible.
    long violations = 0;
    for (const bregfw::RunOutcome& run : out.runs)
      if (!run.failed && !problem.region.contains(run.result.final_x, 1e-9))
        ++violations;
    add("feasibility", violations == 0,
        fmt("final iterates inside the region (1e-9): %ld violations", violations));
  }

  {  // Monotone descent for the Bregman rules.
    long violations = 0, runs = 0;
    for (const bregfw::RunOutcome& run : out.runs) {
      const bregfw::SolverSpec* spec = nullptr;
      for (const bregfw::SolverSpec& s : config.solvers)
        if (s.name == run.solver) spec = &s;
      if (!spec || run.failed) continue;
      if (spec->algorithm != "fw" && spec->algorithm != "afw") continue;
      if (!is_monotone_rule(spec->step.kind)) continue;
      ++runs;
      for (std::size_t i = 1; i < run.result.records.size(); ++i) {
        const double prev = run.result.records[i - 1].primal;
        if (run.result.records[i].primal > prev + 1e-12 * (1.0 + std::fabs(prev)))
          ++violations;
      }
    }
    if (runs == 0)
      skip("monotone_descent", "no Bregman-rule runs in this config");
    else
      add("monotone_descent", violations == 0,
          fmt("f non-increasing across records on %ld runs: %ld violations", runs,
              violations));
  }

  {  // Adaptive line-search budgets.
    long violations = 0, runs = 0;
    for (const bregfw::RunOutcome& run : out.runs) {
      const bregfw::SolverSpec* spec = nullptr;
      for (const bregfw::SolverSpec& s : config.solvers)
        if (s.name == run.solver) spec = &s;
      if (!spec || run.failed) continue;
      if (spec->algorithm != "fw" && spec->algorithm != "afw") continue;
      if (!is_adaptive(spec->step.kind)) continue;
      ++runs;
      violations += bregfw::audit_linesearch_budget(run.result, spec->step);
    }
    if (runs == 0)
      skip("linesearch_budget", "no adaptive-rule runs in this config");
    else
      add("linesearch_budget", violations == 0,
          fmt("cumulative inner evaluations within the worst-case bound on %ld "
              "runs: %ld violated records", runs, violations));
  }

  {  // Open-loop sublinear bound, when the constants are known.
    std::optional<double> L = config.problem.constants.smad_L;
    if (!L) L = problem.objective->smad_constant();
    long runs = 0, raw_violations = 0, safe_violations = 0;
    double dsq = 0.0;
    if (L) {
      dsq = problem.region.bregman_diameter_sq(problem.kernel, 2000,
                                               config.run.seed ^ 0xd2u);
      for (const bregfw::RunOutcome& run : out.runs) {
        const bregfw::SolverSpec* spec = nullptr;
        for (const bregfw::SolverSpec& s : config.solvers)
          if (s.name == run.solver) spec = &s;
        if (!spec || run.failed || !run.f_star) continue;
        if (spec->algorithm != "fw" ||
            spec->step.kind != bregfw::StepRuleKind::OpenLoop)
          continue;
        ++runs;
        bregfw::BoundParams bp;
        bp.L = *L;
        bp.nu = config.problem.constants.nu.value_or(1.0);
        for (const bregfw::IterationRecord& rec : run.result.records) {
          bp.t = rec.t;
          const double gap = rec.primal - *run.f_star;
          bp.diameter_sq = dsq;
          if (gap > bregfw::theorem_bound(bregfw::BoundKind::SublinearConvex, bp) +
                        1e-12)
            ++raw_violations;
          bp.diameter_sq = 2.0 * dsq;
          if (gap > bregfw::theorem_bound(bregfw::BoundKind::SublinearConvex, bp) +
                        1e-12)
            ++safe_violations;
        }
      }
    }
    if (!L)
      skip("open_loop_bound", "no smoothness constant available");
    else if (runs == 0)
      skip("open_loop_bound", "no open-loop runs with a known optimum");
    else
      add("open_loop_bound", safe_violations == 0,
          fmt("gap under 2^{1+nu} L D^2/(t+2)^nu on %ld runs; sampled D^2 %.6g: "
              "%ld violations raw, %ld with the 2x safety factor (verdict)",
              runs, dsq, raw_violations, safe_violations));
  }

  if (!config.run.output.empty()) {
    // Summary agrees with what a reader of the emitted traces reconstructs.
    bregfw::write_outputs(out, config.run.output);
    const auto redo =
        bregfw::summarize_from_traces(config.run.output, out.runs, out.f_star);
    bool match = redo.size() == out.summary.size();
    for (std::size_t i = 0; match && i < redo.size(); ++i)
      match = redo[i].solver == out.summary[i].solver &&
              std::fabs(redo[i].primal_gap_mean - out.summary[i].primal_gap_mean) <=
                  1e-12 &&
              std::fabs(redo[i].fw_gap_mean - out.summary[i].fw_gap_mean) <= 1e-12;
    add("summary_consistency", match,
        "summary statistics recomputed from the emitted traces match to 1e-12");
  }

  bool all_pass = true;
  nlohmann::json checks = nlohmann::json::array();
  for (const Verdict& v : verdicts) {
    if (v.status == "fail") all_pass = false;
    checks.push_back({{"name", v.name}, {"status", v.status}, {"detail", v.detail}});
  }
  nlohmann::json doc = {{"config", config_path},
                        {"f_star", out.f_star},
                        {"fstar_source", out.fstar_source},
                        {"checks", checks},
                        {"pass", all_pass}};
  const std::string text = doc.dump(2) + "\n";
  if (json_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream f(json_path);
    if (!f) {
      std::fprintf(stderr, "cannot write %s\n", json_path.c_str());
      return kRuntime;
    }
    f << text;
    std::printf("verdicts written to %s\n", json_path.c_str());
  }
  return all_pass ? kOk : kRuntime;
}

// ---------------------------------------------------------------------------
// lmo-test

int cmd_lmo_test(const std::string& descriptor, long trials, std::uint64_t seed,
                 double tol) {
  const Region region = parse_region(descriptor);
  std::vector<DensePoint> vertices;
  try {
    vertices = region.enumerate_vertices();
  } catch (const bregfw::Error& e) {
    std::fprintf(stderr, "region is not brute-force testable: %s\n", e.what());
    return kValidation;
  }

  bregfw::Rng rng(seed);
  const auto shape = region.point_shape();
  std::size_t dim = 1;
  for (std::size_t s : shape) dim *= s;
  long violations = 0;
  double worst = 0.0;
  for (long trial = 0; trial < trials; ++trial) {
    DensePoint d = shape.size() == 2 ? DensePoint::matrix(shape[0], shape[1], 0.0)
                                     : DensePoint::vector(dim);
    for (double& v : d.data) v = rng.normal();
    const DensePoint v = region.lmo(d);
    double brute = std::numeric_limits<double>::infinity();
    for (const DensePoint& u : vertices) brute = std::min(brute, dot(d, u));
    const double diff = std::fabs(dot(d, v) - brute);
    worst = std::max(worst, diff);
    if (diff > tol || !region.contains(v, tol)) ++violations;
  }
  std::printf("%s: %zu vertices, %ld directions, %ld violations, "
              "worst value diff %.3e (tol %.1e)\n",
              descriptor.c_str(), vertices.size(), trials, violations, worst, tol);
  return violations == 0 ? kOk : kRuntime;
}

// ---------------------------------------------------------------------------
// nu-est

int cmd_nu_est(const std::string& kernel_desc, const std::string& region_desc,
               std::size_t pairs, std::uint64_t seed) {
  const Kernel kernel = parse_kernel(kernel_desc);
  const Region region = parse_region(region_desc);
  const double gammas[] = {0.5, 0.25, 0.1, 0.05};
  try {
    const auto est = bregfw::estimate_nu(kernel, region, pairs, gammas, seed);
    std::printf("nu_hat %.2f on %s with the %s kernel "
                "(binding sample: implied nu %.6f at gamma %.2f; sampled "
                "estimate, not a certificate)\n",
                est.nu_hat, region_desc.c_str(), kernel_desc.c_str(), est.implied_nu,
                est.gamma);
  } catch (const bregfw::NoValidNu& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kRuntime;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bregfw: projection-free optimization experiment driver"};
  app.require_subcommand(1);

  std::string config_path, output_override, json_path;
  std::string region_desc, kernel_desc;
  long trials = 1000;
  std::uint64_t seed = 1234;
  double tol = 1e-12;
  std::size_t pairs = 16;

  CLI::App* run = app.add_subcommand("run", "run the configured experiment");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--output", output_override, "override the trace directory");

  CLI::App* check = app.add_subcommand("check", "diagnostics suite, JSON verdicts");
  check->add_option("config", config_path, "experiment config file")->required();
  check->add_option("--json", json_path, "write verdicts to a file instead of stdout");

  CLI::App* lmo = app.add_subcommand("lmo-test", "brute-force LMO audit");
  lmo->add_option("region", region_desc, "region descriptor, e.g. simplex:5")
      ->required();
  lmo->add_option("--trials", trials, "random directions (default 1000)");
  lmo->add_option("--seed", seed, "RNG seed");
  lmo->add_option("--tol", tol, "value and feasibility tolerance");

  CLI::App* nu = app.add_subcommand("nu-est", "sampled kernel scaling exponent");
  nu->add_option("kernel", kernel_desc, "kernel descriptor, e.g. entropy")->required();
  nu->add_option("region", region_desc, "region descriptor, e.g. simplex:5")
      ->required();
  nu->add_option("--pairs", pairs, "sampled point pairs (default 16)");
  nu->add_option("--seed", seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, output_override);
    if (check->parsed()) return cmd_check(config_path, json_path);
    if (lmo->parsed()) return cmd_lmo_test(region_desc, trials, seed, tol);
    if (nu->parsed()) return cmd_nu_est(kernel_desc, region_desc, pairs, seed);
  } catch (const bregfw::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    // Descriptor and config shape problems are validation errors; anything
    // thrown past that point is a runtime failure.
    if (lmo->parsed() || nu->parsed()) return kValidation;
    return kRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kRuntime;
  }
  return kOk;
}
