#include "bregfw/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bregfw/rng.hpp"
#include "bregfw/traces.hpp"

namespace fs = std::filesystem;

namespace bregfw {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const std::set<std::string> kObjectives = {
    "quadratic", "lp_loss",  "phase_retrieval", "kl_inverse",
    "low_rank",  "nmf",      "toy_piecewise",   "toy_log1psq"};
const std::set<std::string> kRegions = {"simplex", "l2ball", "box", "ksparse",
                                        "nuclear_ball"};
const std::set<std::string> kKernels = {"euclidean", "entropy",        "burg",
                                        "quartic",   "quartic_scaled", "objective",
                                        "auto"};
const std::set<std::string> kAlgorithms = {"fw", "afw", "mirror_descent",
                                           "projected_gradient"};

std::optional<StepRuleKind> step_rule_from_string(const std::string& s) {
  if (s == "bregman_short") return StepRuleKind::BregmanShort;
  if (s == "adaptive_bregman") return StepRuleKind::AdaptiveBregman;
  if (s == "open_loop") return StepRuleKind::OpenLoop;
  if (s == "fixed_nonconvex") return StepRuleKind::FixedNonconvex;
  if (s == "euclidean_short") return StepRuleKind::EuclideanShort;
  if (s == "euclidean_adaptive") return StepRuleKind::EuclideanAdaptive;
  return std::nullopt;
}

class Parser {
 public:
  ParseResult run(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    long lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      std::string line = raw;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        header(line, lineno);
      } else {
        keyValue(line, lineno);
      }
    }
    validate();
    ParseResult result;
    result.errors = std::move(errors_);
    if (result.errors.empty()) result.config = std::move(cfg_);
    return result;
  }

 private:
  void err(long lineno, const std::string& msg) {
    errors_.push_back("line " + std::to_string(lineno) + ": " + msg);
  }
  void verr(const std::string& msg) { errors_.push_back("config: " + msg); }

  void header(const std::string& line, long lineno) {
    if (line.back() != ']') {
      err(lineno, "unterminated section header");
      section_.clear();
      return;
    }
    const std::string inner = trim(line.substr(1, line.size() - 2));
    if (inner.rfind("solver", 0) == 0 &&
        (inner.size() == 6 || inner[6] == ' ' || inner[6] == '\t')) {
      const std::string name = trim(inner.substr(6));
      if (name.empty()) {
        err(lineno, "[solver] needs a name: [solver NAME]");
        section_.clear();
        return;
      }
      cfg_.solvers.push_back(SolverSpec{});
      cfg_.solvers.back().name = name;
      section_ = "solver";
      return;
    }
    if (inner == "problem" || inner == "region" || inner == "kernel" || inner == "run") {
      section_ = inner;
      return;
    }
    err(lineno, "unknown section [" + inner + "]");
    section_.clear();
  }

  void keyValue(const std::string& line, long lineno) {
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      err(lineno, "expected key = value, got '" + line + "'");
      return;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      err(lineno, "empty key");
      return;
    }
    if (value.empty()) {
      err(lineno, "empty value for '" + key + "'");
      return;
    }
    if (section_ == "problem") problemKey(key, value, lineno);
    else if (section_ == "region") regionKey(key, value, lineno);
    else if (section_ == "kernel") kernelKey(key, value, lineno);
    else if (section_ == "run") runKey(key, value, lineno);
    else if (section_ == "solver") solverKey(key, value, lineno);
    else err(lineno, "'" + key + "' appears before any [section]");
  }

  std::optional<double> num(const std::string& value, const std::string& key, long lineno) {
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      err(lineno, "'" + key + "' is not a number: '" + value + "'");
      return std::nullopt;
    }
  }

  std::optional<long> integer(const std::string& value, const std::string& key,
                              long lineno) {
    try {
      std::size_t used = 0;
      const long v = std::stol(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      err(lineno, "'" + key + "' is not an integer: '" + value + "'");
      return std::nullopt;
    }
  }

  std::optional<std::size_t> count(const std::string& value, const std::string& key,
                                   long lineno) {
    const auto v = integer(value, key, lineno);
    if (!v) return std::nullopt;
    if (*v < 0) {
      err(lineno, "'" + key + "' must be nonnegative");
      return std::nullopt;
    }
    return static_cast<std::size_t>(*v);
  }

  std::optional<bool> boolean(const std::string& value, const std::string& key,
                              long lineno) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    err(lineno, "'" + key + "' is not a boolean: '" + value + "'");
    return std::nullopt;
  }

  std::optional<std::vector<double>> numberList(const std::string& value,
                                                const std::string& key, long lineno) {
    std::vector<double> out;
    std::string piece;
    std::istringstream ls(value);
    while (std::getline(ls, piece, ',')) {
      piece = trim(piece);
      if (piece.empty()) continue;
      const auto v = num(piece, key, lineno);
      if (!v) return std::nullopt;
      out.push_back(*v);
    }
    if (out.empty()) {
      err(lineno, "'" + key + "' has no values");
      return std::nullopt;
    }
    return out;
  }

  void problemKey(const std::string& key, const std::string& value, long lineno) {
    auto& p = cfg_.problem;
    if (key == "objective") p.objective = value;
    else if (key == "a_file") { p.a_file = value; p.from_files = true; }
    else if (key == "b_file") { p.b_file = value; p.from_files = true; }
    else if (key == "m") { if (auto v = count(value, key, lineno)) p.recipe.m = *v; }
    else if (key == "n") { if (auto v = count(value, key, lineno)) p.recipe.n = *v; }
    else if (key == "r") { if (auto v = count(value, key, lineno)) p.recipe.r = *v; }
    else if (key == "p") { if (auto v = num(value, key, lineno)) p.recipe.p = *v; }
    else if (key == "noise") { if (auto v = num(value, key, lineno)) p.recipe.noise = *v; }
    else if (key == "radius") { if (auto v = num(value, key, lineno)) p.recipe.radius = *v; }
    else if (key == "normalize_xstar") {
      if (auto v = boolean(value, key, lineno)) p.recipe.normalize_xstar = *v;
    } else if (key == "lambda_min") {
      if (auto v = num(value, key, lineno)) p.recipe.lambda_min = *v;
    } else if (key == "lambda_max") {
      if (auto v = num(value, key, lineno)) p.recipe.lambda_max = *v;
    } else if (key == "center") {
      if (auto v = numberList(value, key, lineno)) {
        p.recipe.quadratic_center = DensePoint::from(std::move(*v));
      }
    } else if (key == "f_star") {
      if (auto v = num(value, key, lineno)) p.f_star_override = *v;
    } else if (key == "smad_L") {
      if (auto v = num(value, key, lineno)) p.constants.smad_L = *v;
    } else if (key == "nu") {
      if (auto v = num(value, key, lineno)) p.constants.nu = *v;
    } else if (key == "growth_mu") {
      if (auto v = num(value, key, lineno)) p.constants.growth_mu = *v;
    } else if (key == "growth_q") {
      if (auto v = num(value, key, lineno)) p.constants.growth_q = *v;
    } else if (key == "weak_rho") {
      if (auto v = num(value, key, lineno)) p.constants.weak_rho = *v;
    } else if (key == "interior_radius") {
      if (auto v = num(value, key, lineno)) p.constants.interior_radius = *v;
    } else if (key == "pyramidal_width") {
      if (auto v = num(value, key, lineno)) p.constants.pyramidal_width = *v;
    } else {
      err(lineno, "unknown [problem] key '" + key + "'");
    }
  }

  void regionKey(const std::string& key, const std::string& value, long lineno) {
    auto& r = cfg_.region;
    if (key == "kind") r.kind = value;
    else if (key == "n") { if (auto v = count(value, key, lineno)) r.n = *v; }
    else if (key == "rows") { if (auto v = count(value, key, lineno)) r.rows = *v; }
    else if (key == "cols") { if (auto v = count(value, key, lineno)) r.cols = *v; }
    else if (key == "k") { if (auto v = count(value, key, lineno)) r.k = *v; }
    else if (key == "b_max") { if (auto v = num(value, key, lineno)) r.b_max = *v; }
    else if (key == "xi") { if (auto v = num(value, key, lineno)) r.xi = *v; }
    else if (key == "lower") {
      if (auto v = numberList(value, key, lineno)) {
        if (v->size() == 1) r.lower_scalar = (*v)[0];
        else r.lower = std::move(*v);
      }
    } else if (key == "upper") {
      if (auto v = numberList(value, key, lineno)) {
        if (v->size() == 1) r.upper_scalar = (*v)[0];
        else r.upper = std::move(*v);
      }
    } else if (key == "upper_w") {
      if (auto v = num(value, key, lineno)) r.upper_w = *v;
    } else if (key == "upper_h") {
      if (auto v = num(value, key, lineno)) r.upper_h = *v;
    } else {
      err(lineno, "unknown [region] key '" + key + "'");
    }
  }

  void kernelKey(const std::string& key, const std::string& value, long lineno) {
    if (key == "id") cfg_.kernel.id = value;
    else if (key == "c") { if (auto v = num(value, key, lineno)) cfg_.kernel.c = *v; }
    else err(lineno, "unknown [kernel] key '" + key + "'");
  }

  void runKey(const std::string& key, const std::string& value, long lineno) {
    auto& r = cfg_.run;
    if (key == "max_iters") { if (auto v = integer(value, key, lineno)) r.max_iters = *v; }
    else if (key == "tolerance") { if (auto v = num(value, key, lineno)) r.tolerance = *v; }
    else if (key == "repetitions") {
      if (auto v = integer(value, key, lineno)) r.repetitions = *v;
    } else if (key == "record_every") {
      if (auto v = integer(value, key, lineno)) r.record_every = *v;
    } else if (key == "seed") {
      if (auto v = integer(value, key, lineno)) r.seed = static_cast<std::uint64_t>(*v);
    } else if (key == "wall_clock_limit") {
      if (auto v = num(value, key, lineno)) r.wall_clock_limit = *v;
    } else if (key == "output") {
      r.output = value;
    } else if (key == "x0") {
      r.x0 = value;
    } else {
      err(lineno, "unknown [run] key '" + key + "'");
    }
  }

  void solverKey(const std::string& key, const std::string& value, long lineno) {
    if (cfg_.solvers.empty()) {
      err(lineno, "solver key outside a [solver NAME] section");
      return;
    }
    SolverSpec& s = cfg_.solvers.back();
    if (key == "algorithm") s.algorithm = value;
    else if (key == "step") {
      const auto kind = step_rule_from_string(value);
      if (kind) s.step.kind = *kind;
      else err(lineno, "unknown step rule '" + value + "'");
    }
    else if (key == "L") { if (auto v = num(value, key, lineno)) s.step.L = *v; }
    else if (key == "nu") { if (auto v = num(value, key, lineno)) s.step.nu = *v; }
    else if (key == "eta") { if (auto v = num(value, key, lineno)) s.step.eta = *v; }
    else if (key == "tau") { if (auto v = num(value, key, lineno)) s.step.tau = *v; }
    else if (key == "beta") { if (auto v = num(value, key, lineno)) s.step.beta = *v; }
    else if (key == "L_init") { if (auto v = num(value, key, lineno)) s.step.L_init = *v; }
    else if (key == "kappa_min") {
      if (auto v = num(value, key, lineno)) s.step.kappa_min = *v;
    } else if (key == "strict_alg2") {
      if (auto v = boolean(value, key, lineno)) s.step.strict_alg2 = *v;
    } else if (key == "horizon") {
      if (auto v = integer(value, key, lineno)) s.step.horizon = *v;
    } else if (key == "md_schedule") {
      s.md_schedule = value;
    } else if (key == "md_step") {
      if (auto v = num(value, key, lineno)) s.md_step = *v;
    } else if (key == "pg_step") {
      if (auto v = num(value, key, lineno)) s.pg_step = *v;
    } else if (key == "max_iters") {
      if (auto v = integer(value, key, lineno)) s.max_iters = *v;
    } else {
      err(lineno, "unknown [solver] key '" + key + "'");
    }
  }

  void validate() {
    const auto& p = cfg_.problem;
    if (p.objective.empty()) verr("[problem] objective is required");
    else if (!kObjectives.count(p.objective))
      verr("unknown objective '" + p.objective + "'");
    if (p.from_files) {
      if (p.a_file.empty()) verr("[problem] a_file is required with file input");
      else if (!fs::exists(p.a_file)) verr("a_file does not exist: " + p.a_file);
      if (!p.b_file.empty() && !fs::exists(p.b_file))
        verr("b_file does not exist: " + p.b_file);
    }

    const auto& r = cfg_.region;
    if (r.kind.empty()) verr("[region] kind is required");
    else if (!kRegions.count(r.kind)) verr("unknown region kind '" + r.kind + "'");
    if (r.kind == "ksparse") {
      const std::size_t n = r.n ? r.n : cfg_.problem.recipe.n;
      if (n == 0) verr("ksparse region needs n");
      else if (r.k > n)
        verr("ksparse region: k = " + std::to_string(r.k) + " exceeds n = " +
             std::to_string(n));
      if (r.k == 0) verr("ksparse region: k must be positive");
    }

    if (!kKernels.count(cfg_.kernel.id))
      verr("unknown kernel '" + cfg_.kernel.id + "'");
    if (cfg_.kernel.id == "quartic_scaled" && cfg_.kernel.c && !(*cfg_.kernel.c > 0.0))
      verr("quartic_scaled kernel: c must be positive");
    if (cfg_.kernel.id == "quartic_scaled" && !cfg_.kernel.c &&
        cfg_.problem.objective != "nmf")
      verr("quartic_scaled kernel: c is required unless the objective is nmf");

    if (cfg_.solvers.empty()) verr("at least one [solver NAME] section is required");
    std::set<std::string> names;
    for (const SolverSpec& s : cfg_.solvers) {
      const std::string who = "solver '" + s.name + "'";
      if (!names.insert(s.name).second) verr("duplicate solver name '" + s.name + "'");
      if (s.algorithm.empty()) verr(who + ": algorithm is required");
      else if (!kAlgorithms.count(s.algorithm))
        verr(who + ": unknown algorithm '" + s.algorithm + "'");
      if (s.algorithm == "projected_gradient" && (!s.pg_step || !(*s.pg_step > 0.0)))
        verr(who + ": projected_gradient needs pg_step > 0");
      if (s.md_step && !(*s.md_step > 0.0)) verr(who + ": md_step must be positive");
      if (s.md_schedule != "diminishing" && s.md_schedule != "constant" &&
          s.md_schedule != "inverse_l")
        verr(who + ": unknown md_schedule '" + s.md_schedule + "'");
      if (s.md_schedule == "inverse_l" && s.md_step)
        verr(who + ": md_step does not apply to the inverse_l schedule");
      if (s.algorithm == "mirror_descent") {
        if (cfg_.kernel.id != "entropy" &&
            !(cfg_.kernel.id == "auto" && cfg_.problem.objective == "kl_inverse"))
          verr(who + ": mirror_descent needs the entropy kernel");
        if (cfg_.region.kind != "simplex")
          verr(who + ": mirror_descent needs the simplex region");
      }
      if (!(s.step.eta > 0.0 && s.step.eta <= 1.0)) verr(who + ": eta must be in (0, 1]");
      if (!(s.step.tau > 1.0)) verr(who + ": tau must exceed 1");
      if (!(s.step.beta > 0.0 && s.step.beta <= 1.0))
        verr(who + ": beta must be in (0, 1]");
      if (!(s.step.L_init > 0.0)) verr(who + ": L_init must be positive");
      if (!(s.step.kappa_min > 0.0 && s.step.kappa_min <= 1.0))
        verr(who + ": kappa_min must be in (0, 1]");
      if (s.step.L && !(*s.step.L > 0.0)) verr(who + ": L must be positive");
      if (s.step.nu && !(*s.step.nu > 0.0 && *s.step.nu <= 1.0))
        verr(who + ": nu must be in (0, 1]");
      if (s.step.horizon && *s.step.horizon < 0)
        verr(who + ": horizon must be nonnegative");
      if (s.max_iters && *s.max_iters < 0) verr(who + ": max_iters must be nonnegative");
    }

    const auto& run = cfg_.run;
    if (run.max_iters < 0) verr("[run] max_iters must be nonnegative");
    if (run.tolerance < 0.0) verr("[run] tolerance must be nonnegative");
    if (run.repetitions < 1) verr("[run] repetitions must be at least 1");
    if (run.record_every < 1) verr("[run] record_every must be at least 1");
    if (run.wall_clock_limit && !(*run.wall_clock_limit > 0.0))
      verr("[run] wall_clock_limit must be positive");
    if (run.x0.rfind("file:", 0) == 0) {
      const std::string path = run.x0.substr(5);
      if (!fs::exists(path)) verr("x0 file does not exist: " + path);
    } else if (run.x0 != "auto" && run.x0 != "uniform" && run.x0 != "center" &&
               run.x0 != "ones" && run.x0 != "random_unit" && run.x0 != "lmo") {
      verr("unknown x0 mode '" + run.x0 + "'");
    }
  }

  ExperimentConfig cfg_;
  std::vector<std::string> errors_;
  std::string section_;
};

bool is_binary_matrix_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  return in && magic[0] == 'B' && magic[1] == 'F' && magic[2] == 'W' && magic[3] == 'M';
}

DensePoint load_any_matrix(const std::string& path) {
  return is_binary_matrix_file(path) ? load_matrix_binary(path) : load_matrix_text(path);
}

DensePoint as_vector(DensePoint m) {
  if (m.shape.size() == 1) return m;
  if (m.rows() == 1 || m.cols() == 1) {
    m.shape = {m.data.size()};
    return m;
  }
  throw ShapeMismatch("expected a vector, got a " + shape_string(m.shape) + " matrix");
}

struct BuiltObjective {
  ObjectivePtr objective;
  std::optional<double> f_star;
  std::optional<DensePoint> planted;
  std::optional<double> nuclear_hint;
  std::optional<double> nmf_data_fnorm;
  std::size_t nmf_w_size = 0;  // boundary between the W and H blocks
};

BuiltObjective build_objective(const ExperimentConfig& config, std::uint64_t seed) {
  const auto& p = config.problem;
  BuiltObjective out;

  if (p.objective == "toy_piecewise" || p.objective == "toy_log1psq") {
    const ToyKind kind =
        p.objective == "toy_piecewise" ? ToyKind::Piecewise : ToyKind::Log1pSq;
    out.objective = make_toy(kind);
    const ToyConstants tc = toy_constants(kind);
    out.f_star = tc.f_star;
    out.planted = DensePoint::from({tc.x_star});
    return out;
  }

  if (p.from_files) {
    DensePoint a = load_any_matrix(p.a_file);
    std::optional<DensePoint> b;
    if (!p.b_file.empty()) b = as_vector(load_any_matrix(p.b_file));
    auto need_b = [&]() -> DensePoint {
      if (!b) throw InvalidConstant("objective '" + p.objective + "' needs b_file");
      return *b;
    };
    if (p.objective == "quadratic") out.objective = make_quadratic(a, need_b());
    else if (p.objective == "lp_loss")
      out.objective = make_lp_loss(a, need_b(), p.recipe.p);
    else if (p.objective == "phase_retrieval")
      out.objective = make_phase_retrieval(a, need_b());
    else if (p.objective == "kl_inverse") out.objective = make_kl_inverse(a, need_b());
    else if (p.objective == "low_rank") {
      if (p.recipe.r == 0) throw InvalidConstant("low_rank from files needs r");
      out.objective = make_low_rank(a, p.recipe.r);
    } else if (p.objective == "nmf") {
      if (p.recipe.r == 0) throw InvalidConstant("nmf from files needs r");
      out.nmf_data_fnorm = std::sqrt(nrm2_sq(a));
      out.nmf_w_size = a.rows() * p.recipe.r;
      out.objective = make_nmf(a, p.recipe.r);
    } else {
      throw UnknownKind("objective '" + p.objective + "' cannot be built from files");
    }
    return out;
  }

  RecipeSpec recipe = p.recipe;
  recipe.kind = recipe_kind_from_string(p.objective);
  GeneratedDataset data = generate_dataset(recipe, seed);
  out.objective = std::move(data.objective);
  out.f_star = data.f_star;
  out.planted = std::move(data.planted);
  out.nuclear_hint = data.nuclear_radius_hint;
  if (recipe.kind == RecipeKind::NMF) {
    out.nmf_data_fnorm = data.meta.at("v_fnorm");
    out.nmf_w_size = recipe.m * recipe.r;
  }
  return out;
}

Region build_region(const ExperimentConfig& config, const BuiltObjective& built) {
  const auto& r = config.region;
  const auto shape = built.objective->point_shape();
  const std::size_t dim = built.objective->dim();
  const std::size_t n = r.n ? r.n : dim;

  if (r.kind == "simplex") return Region::simplex(n);
  if (r.kind == "l2ball") return Region::l2_ball(n, r.b_max);
  if (r.kind == "ksparse") return Region::k_sparse(n, r.k);
  if (r.kind == "box") {
    if (!r.lower.empty() || !r.upper.empty()) {
      std::vector<double> lo = r.lower.empty() ? std::vector<double>(n, 0.0) : r.lower;
      std::vector<double> hi = r.upper.empty() ? std::vector<double>(n, 1.0) : r.upper;
      return Region::box(std::move(lo), std::move(hi));
    }
    if (r.upper_w || r.upper_h) {
      if (built.nmf_w_size == 0)
        throw InvalidConstant("upper_w/upper_h apply only to stacked-factor objectives");
      std::vector<double> lo(dim, r.lower_scalar.value_or(0.0));
      std::vector<double> hi(dim, 0.0);
      for (std::size_t i = 0; i < dim; ++i)
        hi[i] = i < built.nmf_w_size ? r.upper_w.value_or(3.0) : r.upper_h.value_or(1.0);
      return Region::box(std::move(lo), std::move(hi));
    }
    return Region::box(n, r.lower_scalar.value_or(0.0), r.upper_scalar.value_or(1.0));
  }
  if (r.kind == "nuclear_ball") {
    std::size_t rows = r.rows, cols = r.cols;
    if ((rows == 0 || cols == 0) && shape.size() == 2) {
      rows = shape[0];
      cols = shape[1];
    }
    if (rows == 0 || cols == 0)
      throw InvalidConstant("nuclear_ball region needs rows and cols");
    double xi = 0.0;
    if (r.xi) xi = *r.xi;
    else if (built.nuclear_hint) xi = *built.nuclear_hint;
    else throw InvalidConstant("nuclear_ball region: xi not given and no generator hint");
    return Region::nuclear_ball(rows, cols, xi);
  }
  throw UnknownKind("unknown region kind '" + r.kind + "'");
}

Kernel build_kernel(const ExperimentConfig& config, const BuiltObjective& built) {
  std::string id = config.kernel.id;
  if (id == "auto") {
    switch (built.objective->recommended_kernel()) {
      case KernelId::Euclidean: id = "euclidean"; break;
      case KernelId::Entropy: id = "entropy"; break;
      case KernelId::Burg: id = "burg"; break;
      case KernelId::Quartic: id = "quartic"; break;
      case KernelId::QuarticScaled: id = "quartic_scaled"; break;
      case KernelId::ObjectiveAsKernel: id = "objective"; break;
    }
  }
  if (id == "euclidean") return Kernel::euclidean();
  if (id == "entropy") return Kernel::entropy();
  if (id == "burg") return Kernel::burg();
  if (id == "quartic") return Kernel::quartic();
  if (id == "quartic_scaled") {
    double c = 0.0;
    if (config.kernel.c) c = *config.kernel.c;
    else if (built.nmf_data_fnorm) c = *built.nmf_data_fnorm;
    else throw InvalidConstant("quartic_scaled kernel needs c");
    return Kernel::quartic_scaled(c);
  }
  if (id == "objective") return kernel_from_objective(built.objective);
  throw UnknownKind("unknown kernel '" + id + "'");
}

DensePoint shaped_from_vector(std::vector<double> data,
                              const std::vector<std::size_t>& shape) {
  DensePoint p;
  p.data = std::move(data);
  p.shape = shape;
  std::size_t expect = 1;
  for (std::size_t s : shape) expect *= s;
  if (p.data.size() != expect)
    throw ShapeMismatch("x0 has " + std::to_string(p.data.size()) +
                        " values but the problem expects " + shape_string(shape));
  return p;
}

DensePoint default_start(const ExperimentConfig& config, const ProblemInstance& inst,
                         std::uint64_t seed) {
  const std::string& mode = config.run.x0;
  const auto shape = inst.region.point_shape();
  std::size_t dim = 1;
  for (std::size_t s : shape) dim *= s;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);

  if (mode == "auto") {
    if (inst.region.kind() == RegionKind::SimplexLeqOne)
      return shaped_from_vector(std::vector<double>(dim, 1.0 / static_cast<double>(dim)),
                                shape);
    return inst.region.center();
  }
  if (mode == "center") return inst.region.center();
  if (mode == "ones") return shaped_from_vector(std::vector<double>(dim, 1.0), shape);
  if (mode == "uniform") {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.uniform();
    if (inst.region.kind() == RegionKind::SimplexLeqOne) {
      double s = 0.0;
      for (double x : v) s += x;
      if (s > 1.0)
        for (double& x : v) x /= s;
    }
    return shaped_from_vector(std::move(v), shape);
  }
  if (mode == "random_unit") return inst.region.sample_boundaryish(rng);
  if (mode == "lmo") {
    const DensePoint g = inst.objective->gradient(inst.region.center());
    return inst.region.lmo(g);
  }
  if (mode.rfind("file:", 0) == 0) {
    DensePoint m = load_any_matrix(mode.substr(5));
    return shaped_from_vector(std::move(m.data), shape);
  }
  throw UnknownKind("unknown x0 mode '" + mode + "'");
}

std::string sanitize(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return out;
}

std::string trace_basename(const RunOutcome& run) {
  return sanitize(run.solver) + "_rep" + std::to_string(run.repetition);
}

struct MeanStd {
  double mean = 0.0, std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd ms;
  if (xs.empty()) return ms;
  for (double x : xs) ms.mean += x;
  ms.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - ms.mean) * (x - ms.mean);
    ms.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return ms;
}

std::vector<SolverSummary> summarize(const std::vector<SolverSpec>& solvers,
                                     const std::vector<RunOutcome>& runs,
                                     const std::optional<double>& fixed_fstar) {
  std::vector<SolverSummary> out;
  for (const SolverSpec& s : solvers) {
    SolverSummary sum;
    sum.solver = s.name;
    std::vector<double> gaps, fw_gaps, walls;
    for (const RunOutcome& run : runs) {
      if (run.solver != s.name) continue;
      ++sum.runs;
      if (run.failed) {
        ++sum.failures;
        continue;
      }
      if (run.diverged) ++sum.diverged;
      const double fstar = fixed_fstar ? *fixed_fstar : run.f_star.value_or(0.0);
      gaps.push_back(run.final_primal - fstar);
      fw_gaps.push_back(run.final_fw_gap);
      walls.push_back(run.wall_seconds);
    }
    const MeanStd g = mean_std(gaps), f = mean_std(fw_gaps), w = mean_std(walls);
    sum.primal_gap_mean = g.mean;
    sum.primal_gap_std = g.std;
    sum.fw_gap_mean = f.mean;
    sum.fw_gap_std = f.std;
    sum.wall_mean = w.mean;
    sum.wall_std = w.std;
    out.push_back(std::move(sum));
  }
  return out;
}

}  // namespace

ParseResult parse_config_text(const std::string& text) { return Parser{}.run(text); }

ParseResult load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.errors.push_back("cannot open config file: " + path);
    return r;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

BuiltProblem build_problem(const ExperimentConfig& config, long repetition) {
  if (repetition < 0) throw InvalidConstant("build_problem: repetition must be >= 0");
  const std::uint64_t seed = config.run.seed + static_cast<std::uint64_t>(repetition);

  BuiltObjective built = build_objective(config, seed);
  Region region = build_region(config, built);
  Kernel kernel = build_kernel(config, built);

  ProblemInstance instance = make_problem(built.objective, std::move(kernel),
                                          std::move(region), config.problem.constants);

  BuiltProblem out{std::move(instance), std::nullopt, "best_found", DensePoint{}};
  if (config.problem.f_star_override) {
    out.f_star = *config.problem.f_star_override;
    out.fstar_source = "config";
  } else if (built.f_star && built.planted &&
             built.planted->shape == out.instance.region.point_shape() &&
             out.instance.region.contains(*built.planted, 1e-9)) {
    out.f_star = *built.f_star;
    out.fstar_source = "generator";
  }
  out.default_x0 = default_start(config, out.instance, seed);
  return out;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  using Clock = std::chrono::steady_clock;
  ExperimentOutcome out;
  out.fstar_source = "best_found";

  for (long rep = 0; rep < config.run.repetitions; ++rep) {
    const BuiltProblem built = build_problem(config, rep);
    if (rep == 0) out.fstar_source = built.fstar_source;

    for (const SolverSpec& solver : config.solvers) {
      RunOutcome run;
      run.solver = solver.name;
      run.repetition = rep;
      run.f_star = built.f_star;

      SolveConfig sc;
      sc.max_iters = solver.max_iters.value_or(config.run.max_iters);
      sc.fw_gap_tolerance = config.run.tolerance;
      sc.rng_seed = config.run.seed + static_cast<std::uint64_t>(rep);
      sc.record_every = config.run.record_every;
      sc.wall_clock_limit_seconds = config.run.wall_clock_limit;

      const auto t0 = Clock::now();
      try {
        DensePoint x0 = built.default_x0;
        if (solver.algorithm == "afw" && config.run.x0 == "auto")
          x0 = afw_start(built.instance);
        if (solver.algorithm == "fw") {
          run.result = fw_run(built.instance, solver.step, sc, std::move(x0));
        } else if (solver.algorithm == "afw") {
          run.result = afw_run(built.instance, solver.step, sc, std::move(x0));
        } else if (solver.algorithm == "mirror_descent") {
          GammaSchedule md;
          md.kind = solver.md_schedule == "constant" ? GammaSchedule::Kind::Constant
                    : solver.md_schedule == "inverse_l"
                        ? GammaSchedule::Kind::InverseL
                        : GammaSchedule::Kind::Diminishing;
          if (solver.md_step) md.gamma0 = *solver.md_step;
          run.result = mirror_descent_run(built.instance, md, sc, std::move(x0));
        } else if (solver.algorithm == "projected_gradient") {
          if (!solver.pg_step)
            throw InvalidConstant("projected_gradient needs pg_step");
          run.result =
              projected_gradient_run(built.instance, *solver.pg_step, sc, std::move(x0));
        } else {
          throw UnknownKind("unknown algorithm '" + solver.algorithm + "'");
        }
        const auto& recs = run.result.records;
        run.final_primal = recs.back().primal;
        run.final_fw_gap = recs.back().fw_gap;
        run.diverged = run.result.termination == Termination::LineSearchDiverged ||
                       (run.result.termination != Termination::GapTolerance &&
                        run.final_fw_gap >= recs.front().fw_gap);
      } catch (const Error& e) {
        run.failed = true;
        run.failure = e.what();
        run.final_primal = std::numeric_limits<double>::quiet_NaN();
        run.final_fw_gap = std::numeric_limits<double>::quiet_NaN();
      }
      run.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      out.runs.push_back(std::move(run));
    }
  }

  // Repetitions without a known optimum fall back to the best value any
  // solver visited on that repetition's instance.
  for (long rep = 0; rep < config.run.repetitions; ++rep) {
    bool missing = false;
    double best = std::numeric_limits<double>::infinity();
    for (const RunOutcome& run : out.runs) {
      if (run.repetition != rep) continue;
      if (!run.f_star) missing = true;
      if (run.failed) continue;
      for (const IterationRecord& rec : run.result.records)
        best = std::min(best, rec.primal);
    }
    if (!missing) continue;
    for (RunOutcome& run : out.runs) {
      if (run.repetition == rep && !run.f_star && std::isfinite(best)) run.f_star = best;
    }
  }

  if (!out.runs.empty() && out.runs.front().f_star) out.f_star = *out.runs.front().f_star;
  out.summary = summarize(config.solvers, out.runs, std::nullopt);
  return out;
}

void write_outputs(const ExperimentOutcome& outcome, const std::string& outdir) {
  fs::create_directories(outdir);
  nlohmann::json j;
  j["f_star"] = outcome.f_star;
  j["fstar_source"] = outcome.fstar_source;

  nlohmann::json runs = nlohmann::json::array();
  for (const RunOutcome& run : outcome.runs) {
    nlohmann::json rj;
    rj["solver"] = run.solver;
    rj["repetition"] = run.repetition;
    rj["failed"] = run.failed;
    rj["diverged"] = run.diverged;
    rj["wall_seconds"] = run.wall_seconds;
    if (run.failed) {
      rj["failure"] = run.failure;
    } else {
      const std::string base = trace_basename(run);
      const fs::path csv = fs::path(outdir) / (base + ".csv");
      const fs::path json_path = fs::path(outdir) / (base + ".json");
      write_trace_csv(run.result, csv.string());
      write_run_json(run.result, json_path.string());
      rj["termination"] = termination_name(run.result.termination);
      rj["final_primal"] = run.final_primal;
      rj["final_fw_gap"] = run.final_fw_gap;
      if (run.f_star) rj["f_star"] = *run.f_star;
      rj["trace_csv"] = csv.filename().string();
      rj["trace_json"] = json_path.filename().string();
    }
    runs.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs);

  nlohmann::json sums = nlohmann::json::array();
  for (const SolverSummary& s : outcome.summary) {
    sums.push_back({{"solver", s.solver},
                    {"runs", s.runs},
                    {"failures", s.failures},
                    {"diverged", s.diverged},
                    {"primal_gap_mean", s.primal_gap_mean},
                    {"primal_gap_std", s.primal_gap_std},
                    {"fw_gap_mean", s.fw_gap_mean},
                    {"fw_gap_std", s.fw_gap_std},
                    {"wall_mean", s.wall_mean},
                    {"wall_std", s.wall_std}});
  }
  j["summary"] = std::move(sums);

  std::ofstream out(fs::path(outdir) / "summary.json");
  if (!out) throw IoError("cannot write summary.json under " + outdir);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("short write to summary.json under " + outdir);
}

std::vector<SolverSummary> summarize_from_traces(const std::string& outdir,
                                                 const std::vector<RunOutcome>& runs,
                                                 double f_star) {
  std::vector<RunOutcome> reread;
  std::vector<SolverSpec> order;
  std::set<std::string> seen;
  for (const RunOutcome& run : runs) {
    if (seen.insert(run.solver).second) {
      SolverSpec s;
      s.name = run.solver;
      order.push_back(std::move(s));
    }
    RunOutcome copy = run;
    if (!run.failed) {
      const fs::path csv = fs::path(outdir) / (trace_basename(run) + ".csv");
      const std::vector<IterationRecord> recs = read_trace_csv(csv.string());
      if (recs.empty()) throw IoError(csv.string() + ": no records");
      copy.final_primal = recs.back().primal;
      copy.final_fw_gap = recs.back().fw_gap;
    }
    reread.push_back(std::move(copy));
  }
  return summarize(order, reread, f_star);
}

}  // namespace bregfw
