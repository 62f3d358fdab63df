#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "bregfw/errors.hpp"
#include "bregfw/problem.hpp"
#include "bregfw/rng.hpp"
#include "bregfw/traces.hpp"

using namespace bregfw;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
  std::string str() const { return path.string(); }
};

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

// A short deterministic run with a nontrivial trace.
RunResult sample_run() {
  DensePoint q = DensePoint::matrix(1, 1, 0.0);
  q.at(0, 0) = 1.0;
  auto p = make_problem(make_quadratic(std::move(q), DensePoint::from({0.0})),
                        Kernel::euclidean(), Region::box(1, 0.0, 1.0));
  StepRuleSpec rule;
  rule.kind = StepRuleKind::BregmanShort;
  rule.L = 2.0;
  SolveConfig cfg;
  cfg.max_iters = 3;
  cfg.fw_gap_tolerance = 1e-9;
  return fw_run(p, rule, cfg, DensePoint::from({1.0}));
}

}  // namespace

TEST_CASE("doubles survive the 17-digit text format") {
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform() * 40.0 - 20.0);
    CHECK(same_bits(std::stod(format_double(v)), v));
  }
  CHECK(same_bits(std::stod(format_double(0.1)), 0.1));
  CHECK(same_bits(std::stod(format_double(-0.0)), -0.0));
  CHECK(same_bits(std::stod(format_double(1e-300)), 1e-300));
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("trace CSV round-trips bit-exactly") {
  RunResult run = sample_run();
  REQUIRE(run.records.size() == 4);
  TempFile f("bregfw_trace_rt.csv");
  write_trace_csv(run, f.str());

  {
    std::ifstream in(f.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == std::string(kTraceHeader));
  }

  auto records = read_trace_csv(f.str());
  REQUIRE(records.size() == run.records.size());
  RunResult copy = run;
  copy.records = records;
  CHECK(run_results_equal(run, copy));
  // Even the excluded clock column round-trips through the text format.
  for (std::size_t i = 0; i < records.size(); ++i)
    CHECK(same_bits(records[i].elapsed_seconds, run.records[i].elapsed_seconds));
}

TEST_CASE("trace CSV loader diagnostics") {
  TempFile f("bregfw_trace_bad.csv");
  {
    std::ofstream out(f.str());
    out << "t,primal\n";
  }
  CHECK_THROWS_WITH_AS(read_trace_csv(f.str()),
                       doctest::Contains("header"), IoError);

  {
    std::ofstream out(f.str());
    out << kTraceHeader << "\n0,1,1,0.5,fw,2,1,0\n";
  }
  CHECK_THROWS_WITH_AS(read_trace_csv(f.str()),
                       doctest::Contains("expected 9"), IoError);

  {
    std::ofstream out(f.str());
    out << kTraceHeader << "\n0,oops,1,0.5,fw,2,1,0,0\n";
  }
  CHECK_THROWS_WITH_AS(read_trace_csv(f.str()),
                       doctest::Contains("line 2"), IoError);

  {
    std::ofstream out(f.str());
    out << kTraceHeader << "\n0,1,1,0.5,sideways,2,1,0,0\n";
  }
  CHECK_THROWS_AS(read_trace_csv(f.str()), UnknownKind);

  {
    std::ofstream out(f.str());
    out << kTraceHeader << "\n\n1,0.5,0.25,0.5,away,2,1,3,0.001\n\n";
  }
  auto records = read_trace_csv(f.str());  // blank lines skipped
  REQUIRE(records.size() == 1);
  CHECK(records[0].t == 1);
  CHECK(records[0].step_kind == StepKind::Away);
  CHECK(records[0].inner_evals == 3);

  {
    std::ofstream out(f.str());
    out << kTraceHeader << '\n';
  }
  CHECK(read_trace_csv(f.str()).empty());

  CHECK_THROWS_AS(read_trace_csv("/nonexistent/bregfw_nope.csv"), IoError);
}

TEST_CASE("run JSON round-trips the full result") {
  RunResult run = sample_run();
  TempFile f("bregfw_run_rt.json");
  write_run_json(run, f.str());
  RunResult back = read_run_json(f.str());
  CHECK(run_results_equal(run, back));
  CHECK(back.termination == run.termination);
  CHECK(back.total_inner_evals == run.total_inner_evals);
  CHECK(back.final_x.shape == run.final_x.shape);
}

TEST_CASE("run JSON loader diagnostics") {
  TempFile f("bregfw_run_bad.json");
  {
    std::ofstream out(f.str());
    out << "{oops";
  }
  CHECK_THROWS_AS(read_run_json(f.str()), IoError);

  {
    std::ofstream out(f.str());
    out << R"({"termination": "gap_tolerance"})";
  }
  CHECK_THROWS_AS(read_run_json(f.str()), IoError);  // missing keys

  {
    std::ofstream out(f.str());
    out << R"({"termination": "solved it", "total_inner_evals": 0,)"
        << R"( "final_x": {"shape": [1], "data": [0.0]}, "records": []})";
  }
  CHECK_THROWS_AS(read_run_json(f.str()), UnknownKind);

  CHECK_THROWS_AS(read_run_json("/nonexistent/bregfw_nope.json"), IoError);
}

TEST_CASE("result comparison ignores only the clock") {
  RunResult a = sample_run();

  RunResult b = a;
  for (auto& r : b.records) r.elapsed_seconds += 1000.0;
  CHECK(run_results_equal(a, b));

  b = a;
  b.termination = Termination::WallClock;
  CHECK_FALSE(run_results_equal(a, b));

  b = a;
  b.total_inner_evals += 1;
  CHECK_FALSE(run_results_equal(a, b));

  b = a;
  b.final_x[0] = std::nextafter(b.final_x[0], 2.0);
  CHECK_FALSE(run_results_equal(a, b));

  b = a;
  b.records[1].primal = std::nextafter(b.records[1].primal, 1.0);
  CHECK_FALSE(run_results_equal(a, b));

  b = a;
  b.records[2].step_kind = StepKind::Drop;
  CHECK_FALSE(run_results_equal(a, b));

  b = a;
  b.records[0].inner_evals = 7;
  CHECK_FALSE(run_results_equal(a, b));

  b = a;
  b.records.pop_back();
  CHECK_FALSE(run_results_equal(a, b));

  // Signed zero is a bit pattern too.
  b = a;
  REQUIRE(b.records.back().gamma == 0.0);
  b.records.back().gamma = -0.0;
  CHECK_FALSE(run_results_equal(a, b));
}
