#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <eqsolve/bench.hpp>

using namespace eqsolve;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

RunOptions quick_options() {
  RunOptions opt;
  opt.ga.max_generations = 10;
  return opt;
}

}  // namespace

TEST_CASE("registry contents", "[bench][registry]") {
  const auto& cases = registry();
  REQUIRE(cases.size() == 13);
  std::set<std::string> ids;
  for (const auto& c : cases) {
    ids.insert(c.id);
    const auto system = c.system();
    INFO(c.id);
    REQUIRE(system.is_square());
    REQUIRE(c.default_x0.size() == system.variable_count());
    REQUIRE_FALSE(c.references.empty());
    for (const auto& ref : c.references) REQUIRE(ref.values.size() == system.variable_count());
    if (c.kind == CaseKind::Linear) REQUIRE_NOTHROW(extract_linear(system));
    else {
      // A probe at the origin may leave the domain (nonlinear-5 divides by x1).
      bool rejected = false;
      try {
        extract_linear(system);
      } catch (const NotLinear&) {
        rejected = true;
      } catch (const DomainError&) {
        rejected = true;
      }
      REQUIRE(rejected);
    }
  }
  REQUIRE(ids.size() == 13);
  REQUIRE(std::count_if(cases.begin(), cases.end(), [](const auto& c) { return c.id.rfind("linear-", 0) == 0; }) == 5);
  REQUIRE(std::count_if(cases.begin(), cases.end(), [](const auto& c) { return c.id.rfind("nonlinear-", 0) == 0; }) == 6);

  const auto& l2 = find_case("linear-2");
  REQUIRE(l2.kind == CaseKind::Linear);
  REQUIRE(l2.references.front().values == Vector{2, 3, -1});
  REQUIRE(l2.references.front().provenance == Provenance::PaperTable);

  const auto& n1 = find_case("nonlinear-1");
  REQUIRE(n1.system().variables() == std::vector<std::string>{"x1", "x2"});
  REQUIRE(n1.default_x0 == Vector{5, 2});
  std::vector<Vector> roots;
  for (const auto& r : n1.references) roots.push_back(r.values);
  REQUIRE(std::find(roots.begin(), roots.end(), Vector{4, 3}) != roots.end());
  REQUIRE(std::find(roots.begin(), roots.end(), Vector{-3, -4}) != roots.end());

  const auto& l1 = find_case("linear-1");
  REQUIRE(l1.notes.find("singular") != std::string::npos);
  for (const Vector& v : {Vector{1, 2, 3}, Vector{2, 0, 4}, Vector{0, 4, 2}}) {
    const bool present = std::any_of(l1.references.begin(), l1.references.end(), [&](const auto& r) { return r.values == v; });
    REQUIRE(present);
  }

  for (const auto& c : cases) {
    const auto vars = c.system().variables();
    for (std::size_t i = 0; i < vars.size(); ++i) REQUIRE(vars[i] == "x" + std::to_string(i + 1));
  }
  REQUIRE_THROWS_AS(find_case("nonlinear-7"), InvalidConfig);
}

TEST_CASE("published values satisfy their systems unless flagged", "[bench][registry][property]") {
  std::size_t flagged = 0;
  for (const auto& c : registry()) {
    const auto system = c.system();
    for (const auto& ref : c.references) {
      if (ref.provenance != Provenance::PaperTable) continue;
      const double norm = residual_norm(system, ref.values);
      INFO(c.id << " " << ref.source << " residual " << norm);
      if (ref.flagged) {
        ++flagged;
        REQUIRE(norm > 5e-3);
      } else {
        REQUIRE(norm < 5e-3);
      }
    }
  }
  REQUIRE(flagged >= 2);
  // The derived second root of the circle-line system is exact.
  REQUIRE(residual_norm(find_case("nonlinear-1").system(), std::vector{-3.0, -4.0}) == 0.0);
}

TEST_CASE("discrepancy ignores flagged references", "[bench][harness]") {
  const auto& l5 = find_case("linear-5");
  REQUIRE(*discrepancy(l5, std::vector{1.0, 2.0, 3.0}) == 0.0);
  // Close to the flagged value but far from the actual solution.
  REQUIRE(*discrepancy(l5, std::vector{1.0, 0.9998, 3.0012}) > 1.0);
  REQUIRE_FALSE(discrepancy(find_case("nonlinear-5"), std::vector{3.0, 3.0, -1.0}).has_value());
}

TEST_CASE("run_case", "[bench][harness]") {
  const auto rows = run_case(find_case("linear-2"), {Method::Gauss, Method::GA}, quick_options());
  REQUIRE(rows.size() == 2);
  const auto gauss = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return r.method == Method::Gauss; });
  REQUIRE(gauss != rows.end());
  REQUIRE(gauss->converged);
  REQUIRE(*gauss->discrepancy <= 1e-9);
  REQUIRE(gauss->elapsed_ms >= 0.0);

  const auto newton = run_case(find_case("nonlinear-1"), {Method::Newton});
  REQUIRE(newton.size() == 1);
  REQUIRE(newton[0].converged);
  REQUIRE(*newton[0].discrepancy <= 1e-6);

  RunOptions seeds = quick_options();
  seeds.seeds = 3;
  const auto ga_rows = run_case(find_case("nonlinear-2"), {Method::GA}, seeds);
  REQUIRE(ga_rows.size() == 3);
  REQUIRE(*ga_rows[0].seed == 1);
  REQUIRE(*ga_rows[2].seed == 3);
}

TEST_CASE("run_case captures solver errors in the row", "[bench][harness]") {
  BenchmarkCase wide;
  wide.id = "wide";
  wide.system_text = "x + y + z = 1\nx - y = 0";
  wide.kind = CaseKind::Linear;
  wide.default_x0 = {0, 0, 0};
  const auto rows = run_case(wide, {Method::Gauss, Method::Newton});
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    REQUIRE_FALSE(r.converged);
    REQUIRE(r.note.find("square") != std::string::npos);
  }

  const auto singular = run_case(find_case("linear-1"), {Method::Gauss});
  REQUIRE(singular[0].converged);
  REQUIRE(singular[0].note.find("rank 2") != std::string::npos);
  REQUIRE(singular[0].residual_norms[0] <= 1e-10);
}

TEST_CASE("run_bench order does not depend on thread count", "[bench][harness]") {
  std::vector<BenchmarkCase> cases{find_case("linear-3"), find_case("nonlinear-1"), find_case("convergence-linear")};
  RunOptions opt = quick_options();
  opt.seeds = 3;
  const std::set<Method> all{Method::Gauss, Method::GA, Method::Newton, Method::LM};
  const auto serial = run_bench(cases, all, opt, 1);
  const auto parallel = run_bench(cases, all, opt, 4);
  // linear: gauss + 3 ga + newton + lm; nonlinear: 3 ga + newton + lm.
  REQUIRE(serial.size() == 6 + 5 + 6);
  REQUIRE(serial.size() == parallel.size());
  std::ostringstream a;
  std::ostringstream b;
  emit_report(serial, ReportFormat::Csv, a, true);
  emit_report(parallel, ReportFormat::Csv, b, true);
  REQUIRE(a.str() == b.str());
  REQUIRE(serial.front().case_id == "linear-3");
  REQUIRE(serial.back().case_id == "convergence-linear");
}

TEST_CASE("CSV report", "[bench][report]") {
  const auto rows = run_case(find_case("linear-2"), {Method::Gauss});
  std::ostringstream out;
  emit_report(rows, ReportFormat::Csv, out);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 2);
  REQUIRE(lines[0] == "case,method,solution,residual_norm,iterations,elapsed_ms,converged,discrepancy");
  REQUIRE(lines[1].rfind("linear-2,gauss,2;3;-1,", 0) == 0);
  REQUIRE(lines[1].find(",true,") != std::string::npos);

  BenchReportRow multi;
  multi.case_id = "linear-1";
  multi.method = Method::GA;
  multi.solutions = {{1, 2, 3}, {0.1234567890123, 4, 2}};
  multi.residual_norms = {0, 1e-7};
  std::ostringstream m;
  emit_report({multi}, ReportFormat::Csv, m);
  REQUIRE(lines_of(m.str())[1] == "linear-1,ga,1;2;3|0.123456789;4;2,0|1e-07,0,0.000000,false,n/a");

  REQUIRE_THROWS_AS(emit_report({}, ReportFormat::Csv, out), InvalidConfig);
  REQUIRE_THROWS_AS(emit_report(rows, ReportFormat::Csv, "/nonexistent/dir/out.csv"), IoError);
}

TEST_CASE("markdown report has a section per case", "[bench][report]") {
  std::vector<BenchmarkCase> table;
  for (const auto& c : registry())
    if (c.id.rfind("linear-", 0) == 0) table.push_back(c);
  const auto rows = run_bench(table, {Method::Gauss}, {});
  std::ostringstream out;
  emit_report(rows, ReportFormat::Markdown, out);
  const std::string md = out.str();
  REQUIRE(count_of(md, "\n### ") + (md.rfind("### ", 0) == 0) == 5);
  REQUIRE(count_of(md, "## Linear systems") == 1);
  REQUIRE(count_of(md, "## Nonlinear systems") == 0);
}

TEST_CASE("JSON round trip", "[bench][report]") {
  RunOptions opt = quick_options();
  opt.seeds = 2;
  auto rows = run_bench({find_case("linear-1"), find_case("nonlinear-5"), find_case("nonlinear-2")},
                        {Method::Gauss, Method::GA, Method::Newton, Method::LM}, opt);
  BenchReportRow failed;
  failed.case_id = "odd";
  failed.method = Method::Newton;
  failed.solutions = {{std::numeric_limits<double>::infinity(), 1.0 / 3.0}};
  failed.residual_norms = {std::numeric_limits<double>::infinity()};
  rows.push_back(failed);

  std::ostringstream out;
  emit_report(rows, ReportFormat::Json, out);
  const auto parsed = parse_report_json(out.str());
  REQUIRE(parsed == rows);

  const auto json = nlohmann::json::parse(out.str());
  for (const char* key : {"case", "method", "solution", "residual_norm", "iterations", "elapsed_ms", "converged", "discrepancy"})
    REQUIRE(json[0].contains(key));
}

TEST_CASE("traces", "[bench][trace]") {
  const auto linear = parse_system("3*x1 + 2*x2 = 5\n4*x1 - x2 = 1");
  std::ostringstream newton_out;
  emit_trace(newton_solve(linear, std::vector{0.0, 0.0}), newton_out);
  const auto newton_lines = lines_of(newton_out.str());
  REQUIRE(newton_lines.size() == 3);
  REQUIRE(newton_lines[0] == "iteration,residual_norm");
  REQUIRE(newton_lines[1].rfind("0,5.09901951359278", 0) == 0);

  GaConfig cfg;
  cfg.seed = 4;
  const auto ga = ga_solve(linear, cfg);
  std::ostringstream ga_out;
  emit_trace(ga.report, ga_out);
  const auto ga_lines = lines_of(ga_out.str());
  REQUIRE(ga_lines[0] == "generation,best_fitness");
  REQUIRE(ga_lines.size() == ga.generations_run + 2);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < ga_lines.size(); ++i) {
    const double v = std::stod(ga_lines[i].substr(ga_lines[i].find(',') + 1));
    REQUIRE(v <= previous);
    previous = v;
  }

  REQUIRE_THROWS_AS(emit_trace(SolveReport{}, ga_out), InvalidConfig);
}

TEST_CASE("configuration overrides", "[bench][config]") {
  GaConfig ga;
  NewtonConfig newton;
  LmConfig lm;
  apply_config("# tuning\n"
               "ga.population_size = 40\n"
               "ga.mutation_rate = 0.05   # per gene\n"
               "ga.seed = 12\n"
               "\n"
               "newton.max_iterations = 7\n"
               "lm.lambda_init = 1e-4\n"
               "lm.scale_diagonal = true\n",
               ga, newton, lm);
  REQUIRE(ga.population_size == 40);
  REQUIRE(ga.mutation_rate == 0.05);
  REQUIRE(ga.seed == 12);
  REQUIRE(newton.max_iterations == 7);
  REQUIRE(lm.lambda_init == 1e-4);
  REQUIRE(lm.scale_diagonal);
  REQUIRE(ga.crossover_rate == 0.8);

  REQUIRE_THROWS_AS(apply_config("ga.colour = 3", ga, newton, lm), InvalidConfig);
  REQUIRE_THROWS_AS(apply_config("ga.population_size = many", ga, newton, lm), InvalidConfig);
  REQUIRE_THROWS_AS(apply_config("ga.population_size = -4", ga, newton, lm), InvalidConfig);
  REQUIRE_THROWS_AS(apply_config("just words", ga, newton, lm), InvalidConfig);
  REQUIRE_THROWS_AS(load_config("/nonexistent.conf", ga, newton, lm), IoError);
}
