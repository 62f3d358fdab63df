#pragma once

#include <string>
#include <vector>

#include "bregfw/solvers.hpp"

namespace bregfw {

// Column order is part of the interface.
inline constexpr const char* kTraceHeader =
    "t,primal,fw_gap,gamma,step_kind,L_t,nu_t,inner_evals,elapsed_seconds";

// Floats are written with 17 significant digits so doubles round-trip exactly.
std::string format_double(double v);

void write_trace_csv(const RunResult& result, const std::string& path);
std::vector<IterationRecord> read_trace_csv(const std::string& path);

void write_run_json(const RunResult& result, const std::string& path);
RunResult read_run_json(const std::string& path);

bool run_results_equal(const RunResult& a, const RunResult& b);

}  // namespace bregfw
