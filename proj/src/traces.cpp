#include "bregfw/traces.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bregfw {

namespace {

StepKind step_kind_from_string(const std::string& name) {
  if (name == "fw") return StepKind::FW;
  if (name == "away") return StepKind::Away;
  if (name == "drop") return StepKind::Drop;
  throw UnknownKind("unknown step kind: " + name);
}

Termination termination_from_string(const std::string& name) {
  if (name == "gap_tolerance") return Termination::GapTolerance;
  if (name == "max_iters") return Termination::MaxIters;
  if (name == "wall_clock") return Termination::WallClock;
  if (name == "line_search_diverged") return Termination::LineSearchDiverged;
  throw UnknownKind("unknown termination: " + name);
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(const RunResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << kTraceHeader << '\n';
  for (const IterationRecord& r : result.records) {
    out << r.t << ',' << format_double(r.primal) << ',' << format_double(r.fw_gap) << ','
        << format_double(r.gamma) << ',' << step_kind_name(r.step_kind) << ','
        << format_double(r.L_t) << ',' << format_double(r.nu_t) << ',' << r.inner_evals
        << ',' << format_double(r.elapsed_seconds) << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

std::vector<IterationRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw IoError(path + ": missing or mismatched trace header");
  std::vector<IterationRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 9)
      throw IoError(path + ": line " + std::to_string(lineno) + " has " +
                    std::to_string(fields.size()) + " fields, expected 9");
    try {
      IterationRecord r;
      r.t = std::stol(fields[0]);
      r.primal = std::stod(fields[1]);
      r.fw_gap = std::stod(fields[2]);
      r.gamma = std::stod(fields[3]);
      r.step_kind = step_kind_from_string(fields[4]);
      r.L_t = std::stod(fields[5]);
      r.nu_t = std::stod(fields[6]);
      r.inner_evals = std::stol(fields[7]);
      r.elapsed_seconds = std::stod(fields[8]);
      records.push_back(r);
    } catch (const std::invalid_argument&) {
      throw IoError(path + ": unparsable number on line " + std::to_string(lineno));
    } catch (const std::out_of_range&) {
      throw IoError(path + ": out-of-range number on line " + std::to_string(lineno));
    }
  }
  return records;
}

void write_run_json(const RunResult& result, const std::string& path) {
  nlohmann::json j;
  j["termination"] = termination_name(result.termination);
  j["total_inner_evals"] = result.total_inner_evals;
  j["final_x"] = {{"shape", result.final_x.shape}, {"data", result.final_x.data}};
  nlohmann::json recs = nlohmann::json::array();
  for (const IterationRecord& r : result.records) {
    recs.push_back({{"t", r.t},
                    {"primal", r.primal},
                    {"fw_gap", r.fw_gap},
                    {"gamma", r.gamma},
                    {"step_kind", step_kind_name(r.step_kind)},
                    {"L_t", r.L_t},
                    {"nu_t", r.nu_t},
                    {"inner_evals", r.inner_evals},
                    {"elapsed_seconds", r.elapsed_seconds}});
  }
  j["records"] = std::move(recs);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("short write to " + path);
}

RunResult read_run_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
  try {
    RunResult res;
    res.termination = termination_from_string(j.at("termination").get<std::string>());
    res.total_inner_evals = j.at("total_inner_evals").get<long>();
    res.final_x.shape = j.at("final_x").at("shape").get<std::vector<std::size_t>>();
    res.final_x.data = j.at("final_x").at("data").get<std::vector<double>>();
    for (const auto& rj : j.at("records")) {
      IterationRecord r;
      r.t = rj.at("t").get<long>();
      r.primal = rj.at("primal").get<double>();
      r.fw_gap = rj.at("fw_gap").get<double>();
      r.gamma = rj.at("gamma").get<double>();
      r.step_kind = step_kind_from_string(rj.at("step_kind").get<std::string>());
      r.L_t = rj.at("L_t").get<double>();
      r.nu_t = rj.at("nu_t").get<double>();
      r.inner_evals = rj.at("inner_evals").get<long>();
      r.elapsed_seconds = rj.at("elapsed_seconds").get<double>();
      res.records.push_back(r);
    }
    return res;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

bool run_results_equal(const RunResult& a, const RunResult& b) {
  if (a.termination != b.termination) return false;
  if (a.total_inner_evals != b.total_inner_evals) return false;
  if (!bit_equal(a.final_x, b.final_x)) return false;
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const IterationRecord& ra = a.records[i];
    const IterationRecord& rb = b.records[i];
    if (ra.t != rb.t || ra.step_kind != rb.step_kind || ra.inner_evals != rb.inner_evals)
      return false;
    if (!same_bits(ra.primal, rb.primal) || !same_bits(ra.fw_gap, rb.fw_gap) ||
        !same_bits(ra.gamma, rb.gamma) || !same_bits(ra.L_t, rb.L_t) ||
        !same_bits(ra.nu_t, rb.nu_t))
      return false;
    // elapsed_seconds is wall-clock noise and intentionally not compared.
  }
  return true;
}

}  // namespace bregfw
