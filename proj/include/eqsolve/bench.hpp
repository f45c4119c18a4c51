#pragma once

// Benchmark registry, comparison harness, and report/trace emission.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "expr.hpp"
#include "ga.hpp"
#include "linalg.hpp"
#include "lm.hpp"
#include "newton.hpp"
#include "report.hpp"
#include "vector.hpp"

namespace eqsolve {

enum class CaseKind { Linear, Nonlinear };

inline std::string_view to_string(CaseKind k) { return k == CaseKind::Linear ? "linear" : "nonlinear"; }

enum class Provenance { PaperTable, Derived };

struct Reference {
  Vector values;
  Provenance provenance = Provenance::PaperTable;
  std::string source;  // which published column (or derivation) the value comes from
  // Published value that does not satisfy its own system; kept for the
  // record but never used as a comparison target.
  bool flagged = false;
};

struct BenchmarkCase {
  std::string id;
  std::string system_text;
  CaseKind kind = CaseKind::Linear;
  std::vector<Reference> references;
  Vector default_x0;
  std::string notes;

  EquationSystem system() const { return parse_system(system_text); }
};

/// The thirteen benchmark systems: five linear and six nonlinear published
/// systems, plus the linear and nonlinear convergence benchmarks.
inline const std::vector<BenchmarkCase>& registry() {
  using P = Provenance;
  static const std::vector<BenchmarkCase> cases = {
      {"linear-1",
       "x1 + 2*x2 + 3*x3 = 14\nx1 + x2 + x3 = 6\n3*x1 + 2*x2 + x3 = 10",
       CaseKind::Linear,
       {{{1, 2, 3}, P::PaperTable, "actual"},
        {{2, 0, 4}, P::PaperTable, "ga"},
        {{0, 4, 2}, P::PaperTable, "ga"}},
       {0, 0, 0},
       "singular (rank 2); infinitely many solutions x = (1,2,3) + t(1,-2,1)"},
      {"linear-2",
       "2*x1 + x2 - x3 = 8\n-3*x1 - x2 + 2*x3 = -11\n-2*x1 + x2 + 2*x3 = -3",
       CaseKind::Linear,
       {{{2, 3, -1}, P::PaperTable, "actual"}},
       {0, 0, 0},
       ""},
      {"linear-3",
       "10*x1 + x2 + x3 = 12\n2*x1 + 10*x2 + x3 = 13\n2*x1 + 2*x2 + 10*x3 = 14",
       CaseKind::Linear,
       {{{1, 1, 1}, P::PaperTable, "actual"}},
       {0, 0, 0},
       ""},
      {"linear-4",
       "x1 + 2*x2 + 3*x3 = 6\n2*x1 + 4*x2 + x3 = 7\n3*x1 + 2*x2 + 9*x3 = 14",
       CaseKind::Linear,
       {{{1, 1, 1}, P::PaperTable, "actual"}},
       {0, 0, 0},
       ""},
      {"linear-5",
       "2*x1 + x2 + 3*x3 = 13\nx1 + 5*x2 + x3 = 14\n3*x1 + x2 + 4*x3 = 17",
       CaseKind::Linear,
       {{{1, 2, 3}, P::PaperTable, "actual"},
        {{1, 0.9998, 3.0012}, P::PaperTable, "gauss", true}},
       {0, 0, 0},
       "published Gaussian-elimination value (1, 0.9998, 3.0012) does not satisfy the system; exact solution is (1, 2, 3)"},
      {"nonlinear-1",
       "x1^2 + x2^2 = 25\nx1 - x2 = 1",
       CaseKind::Nonlinear,
       {{{4, 3}, P::PaperTable, "newton,lm"}, {{-3, -4}, P::Derived, "second root"}},
       {5, 2},
       ""},
      {"nonlinear-2",
       "exp(x1) + x2 = 10\nsin(x1) + cos(x2) = 1",
       CaseKind::Nonlinear,
       {{{2.1510, 1.4064}, P::PaperTable, "newton,lm"}},
       {1, 1},
       ""},
      {"nonlinear-3",
       "x1^3 - x2 = 4\nx2^5 + x1^4 = 2",
       CaseKind::Nonlinear,
       {{{1.4173, -1.1528}, P::PaperTable, "newton,lm"}},
       {1, -1},
       ""},
      {"nonlinear-4",
       "exp(x1) - sin(x2) = 5\nx1^2 + x2^2 = 10\ncos(x1 + x3) = 0.5",
       CaseKind::Nonlinear,
       {{{1.69663362, 2.6686, -0.6494}, P::PaperTable, "newton"},
        {{1.6966, 2.6686, -2.7438}, P::PaperTable, "lm"}},
       {1.5, 2.5, -0.5},
       "x3 is determined only up to the periodic solutions of cos(x1 + x3) = 0.5"},
      {"nonlinear-5",
       "x1^2 + x2^2 = 20\n1/x1 + sqrt(x2) = 2\nsin(x1) - exp(x3) = 0",
       CaseKind::Nonlinear,
       {{{3.1761, 3.1477, -1.1357}, P::PaperTable, "newton", true},
        {{3.1758, 3.1481, -27.6827}, P::PaperTable, "lm", true}},
       {3, 3, -1},
       "published values do not satisfy the system (sin(x1) < 0 there, but exp(x3) > 0)"},
      {"nonlinear-6",
       "x1^3 - x2 = 3\nexp(x1) + cos(x2) = 5\nln(x3 + x2) = 1",
       CaseKind::Nonlinear,
       {{{1.7595, 2.4657, 0.2526}, P::PaperTable, "newton", true},
        {{1.3960, -0.2797, 2.9981}, P::PaperTable, "lm"}},
       {1.5, 0.5, 2.5},
       "published Newton value leaves a residual of about 0.03 in the second equation"},
      {"convergence-linear",
       "3*x1 + 2*x2 = 5\n4*x1 - x2 = 1",
       CaseKind::Linear,
       {{{7.0 / 11.0, 17.0 / 11.0}, P::Derived, "exact elimination"}},
       {0, 0},
       "convergence benchmark"},
      {"convergence-nonlinear",
       "x1^2 + x2^2 = 25\nx1 - x2 = 1",
       CaseKind::Nonlinear,
       {{{4, 3}, P::PaperTable, "newton,lm"}, {{-3, -4}, P::Derived, "second root"}},
       {5, 2},
       "convergence benchmark"},
  };
  return cases;
}

inline const BenchmarkCase& find_case(std::string_view id) {
  for (const auto& c : registry())
    if (c.id == id) return c;
  throw InvalidConfig("unknown benchmark case '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------
// Harness

struct BenchReportRow {
  std::string case_id;
  Method method = Method::Gauss;
  std::vector<Vector> solutions;
  std::vector<double> residual_norms;
  std::size_t iterations = 0;
  double elapsed_ms = 0.0;
  bool converged = false;
  std::optional<double> discrepancy;  // ∞-norm distance to the nearest usable reference

  // Not serialized.
  std::optional<std::uint64_t> seed;
  std::string note;
  SolveReport report;  // full solver output, including the trace

  friend bool operator==(const BenchReportRow& a, const BenchReportRow& b) {
    return a.case_id == b.case_id && a.method == b.method && a.solutions == b.solutions &&
           a.residual_norms == b.residual_norms && a.iterations == b.iterations && a.elapsed_ms == b.elapsed_ms &&
           a.converged == b.converged && a.discrepancy == b.discrepancy;
  }
};

/// Smallest ∞-norm distance from `x` to a non-flagged reference of matching
/// arity, if any.
inline std::optional<double> discrepancy(const BenchmarkCase& c, std::span<const double> x) {
  std::optional<double> best;
  for (const auto& ref : c.references) {
    if (ref.flagged || ref.values.size() != x.size()) continue;
    const double d = distance_inf(ref.values, x);
    if (!best || d < *best) best = d;
  }
  return best;
}

struct RunOptions {
  GaConfig ga;
  NewtonConfig newton;
  LmConfig lm;
  std::size_t seeds = 1;  // GA runs per case, seeds ga.seed, ga.seed + 1, ...
  std::optional<Vector> x0;  // overrides the case's default_x0
};

namespace detail {

inline BenchReportRow row_from_report(const BenchmarkCase& c, SolveReport report) {
  BenchReportRow row;
  row.case_id = c.id;
  row.method = report.method;
  row.solutions = report.solutions;
  row.residual_norms = report.residual_norms;
  row.iterations = report.iterations;
  row.elapsed_ms = report.elapsed.count();
  row.converged = report.converged;
  row.note = report.message;
  if (!row.solutions.empty()) row.discrepancy = discrepancy(c, row.solutions.front());
  row.report = std::move(report);
  return row;
}

inline BenchReportRow failed_row(const BenchmarkCase& c, Method m, const std::string& note, double elapsed_ms) {
  BenchReportRow row;
  row.case_id = c.id;
  row.method = m;
  row.converged = false;
  row.elapsed_ms = elapsed_ms;
  row.note = note;
  row.report.method = m;
  row.report.message = note;
  return row;
}

}  // namespace detail

/// Gaussian elimination on a case, timed end to end (including extraction of
/// A and b). Solver errors become a failed row.
inline BenchReportRow run_gauss(const BenchmarkCase& c) {
  Stopwatch clock;
  try {
    const EquationSystem system = c.system();
    const LinearSystem ls = extract_linear(system);
    const GaussSolution sol = gaussian_solve(ls);
    SolveReport report;
    report.method = Method::Gauss;
    report.solutions = {sol.solution};
    report.residual_norms = {residual_norm(system, sol.solution)};
    report.converged = true;
    report.stop = StopReason::Direct;
    if (sol.rank_deficient())
      report.message = "rank " + std::to_string(sol.rank) + " of " + std::to_string(sol.solution.size()) +
                       "; particular solution with free variables set to 0";
    report.elapsed = clock.elapsed();
    return detail::row_from_report(c, std::move(report));
  } catch (const Error& e) {
    return detail::failed_row(c, Method::Gauss, e.what(), clock.elapsed().count());
  }
}

inline BenchReportRow run_single(const BenchmarkCase& c, Method m, const RunOptions& opt, std::uint64_t seed) {
  if (m == Method::Gauss) return run_gauss(c);
  Stopwatch clock;
  try {
    const EquationSystem system = c.system();
    if (m == Method::GA) {
      GaConfig cfg = opt.ga;
      cfg.seed = seed;
      GaResult result = ga_solve(system, cfg);
      auto row = detail::row_from_report(c, std::move(result.report));
      row.seed = seed;
      return row;
    }
    const Vector x0 = opt.x0 ? *opt.x0 : (c.default_x0.empty() ? Vector(system.variable_count(), 1.0) : c.default_x0);
    SolveReport report = m == Method::Newton ? newton_solve(system, x0, opt.newton) : lm_solve(system, x0, opt.lm);
    return detail::row_from_report(c, std::move(report));
  } catch (const Error& e) {
    return detail::failed_row(c, m, e.what(), clock.elapsed().count());
  }
}

/// Runs every requested method on one case: one row per deterministic method
/// and `opt.seeds` GA rows. Failures are captured in their row.
inline std::vector<BenchReportRow> run_case(const BenchmarkCase& c, const std::set<Method>& methods,
                                            const RunOptions& opt = {}) {
  std::vector<BenchReportRow> rows;
  for (Method m : methods) {
    if (m == Method::GA) {
      for (std::size_t i = 0; i < opt.seeds; ++i) rows.push_back(run_single(c, m, opt, opt.ga.seed + i));
    } else {
      rows.push_back(run_single(c, m, opt, 0));
    }
  }
  return rows;
}

/// Methods that apply to a case kind: Gaussian elimination only on linear
/// systems.
inline std::set<Method> applicable(const std::set<Method>& requested, CaseKind kind) {
  std::set<Method> out;
  for (Method m : requested)
    if (m != Method::Gauss || kind == CaseKind::Linear) out.insert(m);
  return out;
}

/// Runs many cases, optionally on `jobs` threads. Rows come back in
/// (case, method, seed) order whatever the completion order. Concurrent runs
/// share the machine, so their timings are noisier than serial ones.
inline std::vector<BenchReportRow> run_bench(const std::vector<BenchmarkCase>& cases, const std::set<Method>& methods,
                                             const RunOptions& opt, std::size_t jobs = 1) {
  struct Task {
    const BenchmarkCase* c;
    Method m;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& c : cases)
    for (Method m : applicable(methods, c.kind)) {
      if (m == Method::GA)
        for (std::size_t i = 0; i < opt.seeds; ++i) tasks.push_back({&c, m, opt.ga.seed + i});
      else
        tasks.push_back({&c, m, 0});
    }

  std::vector<BenchReportRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++)
      rows[i] = run_single(*tasks[i].c, tasks[i].m, opt, tasks[i].seed);
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, tasks.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Report emission

enum class ReportFormat { Csv, Json, Markdown };

inline std::optional<ReportFormat> format_from_name(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  return std::nullopt;
}

namespace detail {

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string join_vector(const Vector& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_number(v[i]);
  }
  return out;
}

inline std::string format_solutions(const std::vector<Vector>& sols) {
  std::string out;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    if (i) out += '|';
    out += join_vector(sols[i]);
  }
  return out;
}

inline std::string format_norms(const std::vector<double>& norms) {
  std::string out;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (i) out += '|';
    out += format_number(norms[i]);
  }
  return out;
}

inline std::string format_elapsed(double ms) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", ms);
  return buf;
}

inline std::string case_section(const std::string& case_id) {
  for (const auto& c : registry())
    if (c.id == case_id) return std::string(to_string(c.kind));
  return "other";
}

inline nlohmann::json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

inline double number_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline constexpr std::string_view kCsvHeader = "case,method,solution,residual_norm,iterations,elapsed_ms,converged,discrepancy";

/// Writes rows as CSV, JSON, or Markdown. CSV and Markdown print numbers with
/// 10 significant digits; JSON keeps full precision so it reads back exactly.
/// With `canonical`, elapsed times print as 0 so repeated runs compare equal.
inline void emit_report(const std::vector<BenchReportRow>& rows, ReportFormat format, std::ostream& out,
                        bool canonical = false) {
  if (rows.empty()) throw InvalidConfig("emit_report needs at least one row");
  auto elapsed = [&](const BenchReportRow& r) { return canonical ? 0.0 : r.elapsed_ms; };
  auto disc = [](const BenchReportRow& r) { return r.discrepancy ? detail::format_number(*r.discrepancy) : "n/a"; };

  switch (format) {
    case ReportFormat::Csv: {
      out << kCsvHeader << '\n';
      for (const auto& r : rows) {
        out << r.case_id << ',' << to_string(r.method) << ',' << detail::format_solutions(r.solutions) << ','
            << detail::format_norms(r.residual_norms) << ',' << r.iterations << ','
            << detail::format_elapsed(elapsed(r)) << ',' << (r.converged ? "true" : "false") << ',' << disc(r)
            << '\n';
      }
      break;
    }
    case ReportFormat::Json: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : rows) {
        nlohmann::json sols = nlohmann::json::array();
        for (const auto& s : r.solutions) {
          nlohmann::json v = nlohmann::json::array();
          for (double x : s) v.push_back(detail::number_json(x));
          sols.push_back(std::move(v));
        }
        nlohmann::json norms = nlohmann::json::array();
        for (double x : r.residual_norms) norms.push_back(detail::number_json(x));
        arr.push_back({{"case", r.case_id},
                       {"method", std::string(to_string(r.method))},
                       {"solution", std::move(sols)},
                       {"residual_norm", std::move(norms)},
                       {"iterations", r.iterations},
                       {"elapsed_ms", elapsed(r)},
                       {"converged", r.converged},
                       {"discrepancy", r.discrepancy ? nlohmann::json(*r.discrepancy) : nlohmann::json("n/a")}});
      }
      out << arr.dump(2) << '\n';
      break;
    }
    case ReportFormat::Markdown: {
      for (std::string_view kind : {"linear", "nonlinear", "other"}) {
        std::vector<std::string> ids;
        for (const auto& r : rows)
          if (detail::case_section(r.case_id) == kind && std::find(ids.begin(), ids.end(), r.case_id) == ids.end())
            ids.push_back(r.case_id);
        if (ids.empty()) continue;
        out << "## " << (kind == "linear" ? "Linear systems" : kind == "nonlinear" ? "Nonlinear systems" : "Other systems")
            << "\n\n";
        for (const auto& id : ids) {
          out << "### " << id << "\n\n";
          out << "| method | solution | residual norm | iterations | elapsed (ms) | converged | discrepancy |\n";
          out << "|---|---|---|---|---|---|---|\n";
          for (const auto& r : rows) {
            if (r.case_id != id) continue;
            std::string sol = detail::format_solutions(r.solutions);
            std::replace(sol.begin(), sol.end(), '|', '/');
            std::string norms = detail::format_norms(r.residual_norms);
            std::replace(norms.begin(), norms.end(), '|', '/');
            out << "| " << to_string(r.method) << " | " << sol << " | " << norms << " | " << r.iterations << " | "
                << detail::format_elapsed(elapsed(r)) << " | " << (r.converged ? "yes" : "no") << " | " << disc(r)
                << " |\n";
          }
          out << '\n';
        }
      }
      break;
    }
  }
  if (!out) throw IoError("<stream>", "write failed");
}

inline void emit_report(const std::vector<BenchReportRow>& rows, ReportFormat format, const std::string& path,
                        bool canonical = false) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  emit_report(rows, format, out, canonical);
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

/// Reads the JSON form back into rows (serialized columns only).
inline std::vector<BenchReportRow> parse_report_json(std::string_view text) {
  const auto arr = nlohmann::json::parse(text);
  std::vector<BenchReportRow> rows;
  for (const auto& j : arr) {
    BenchReportRow r;
    r.case_id = j.at("case").get<std::string>();
    const auto m = method_from_name(j.at("method").get<std::string>());
    if (!m) throw InvalidConfig("unknown method in report");
    r.method = *m;
    for (const auto& s : j.at("solution")) {
      Vector v;
      for (const auto& x : s) v.push_back(detail::number_from_json(x));
      r.solutions.push_back(std::move(v));
    }
    for (const auto& x : j.at("residual_norm")) r.residual_norms.push_back(detail::number_from_json(x));
    r.iterations = j.at("iterations").get<std::size_t>();
    r.elapsed_ms = j.at("elapsed_ms").get<double>();
    r.converged = j.at("converged").get<bool>();
    if (j.at("discrepancy").is_number()) r.discrepancy = j.at("discrepancy").get<double>();
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Two-column CSV of a solver trace: `generation,best_fitness` for the GA,
/// `iteration,residual_norm` otherwise.
inline void emit_trace(const SolveReport& report, std::ostream& out) {
  if (report.trace.empty()) throw InvalidConfig("report has no trace to emit");
  out << (report.method == Method::GA ? "generation,best_fitness" : "iteration,residual_norm") << '\n';
  char buf[64];
  for (const auto& p : report.trace) {
    std::snprintf(buf, sizeof buf, "%.17g", p.value);
    out << p.index << ',' << buf << '\n';
  }
  if (!out) throw IoError("<stream>", "write failed");
}

inline void emit_trace(const SolveReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  emit_trace(report, out);
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

// ---------------------------------------------------------------------------
// Configuration file: `key = value` per line, `#` comments. Keys are
// prefixed with the solver they configure, e.g. `ga.population_size = 200`,
// `newton.max_iterations = 50`, `lm.lambda_init = 1e-4`.

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || end != value.data() + value.size())
    throw InvalidConfig("config key '" + key + "': '" + value + "' is not a number");
  return v;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || end != value.data() + value.size())
    throw InvalidConfig("config key '" + key + "': '" + value + "' is not a non-negative integer");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InvalidConfig("config key '" + key + "': '" + value + "' is not a boolean");
}

}  // namespace detail

/// Applies `key = value` overrides to the solver configurations. Unknown keys
/// and malformed values raise InvalidConfig naming the line.
inline void apply_config(std::string_view text, GaConfig& ga, NewtonConfig& newton, LmConfig& lm) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidConfig("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    auto num = [&] { return detail::parse_double(key, value); };
    auto count = [&] { return static_cast<std::size_t>(detail::parse_count(key, value)); };

    if (key == "ga.population_size") ga.population_size = count();
    else if (key == "ga.crossover_rate") ga.crossover_rate = num();
    else if (key == "ga.mutation_rate") ga.mutation_rate = num();
    else if (key == "ga.max_generations") ga.max_generations = count();
    else if (key == "ga.tournament_size") ga.tournament_size = count();
    else if (key == "ga.elite_count") ga.elite_count = count();
    else if (key == "ga.init_low") ga.init_low = num();
    else if (key == "ga.init_high") ga.init_high = num();
    else if (key == "ga.mutation_delta") ga.mutation_delta = num();
    else if (key == "ga.fitness_threshold") ga.fitness_threshold = num();
    else if (key == "ga.stall_generations") ga.stall_generations = count();
    else if (key == "ga.dedup_radius") ga.dedup_radius = num();
    else if (key == "ga.seed") ga.seed = detail::parse_count(key, value);
    else if (key == "ga.threads") ga.threads = count();
    else if (key == "newton.max_iterations") newton.max_iterations = count();
    else if (key == "newton.step_tolerance") newton.step_tolerance = num();
    else if (key == "newton.residual_tolerance") newton.residual_tolerance = num();
    else if (key == "newton.fd_step_scale") newton.fd_step_scale = num();
    else if (key == "lm.lambda_init") lm.lambda_init = num();
    else if (key == "lm.lambda_up") lm.lambda_up = num();
    else if (key == "lm.lambda_down") lm.lambda_down = num();
    else if (key == "lm.max_iterations") lm.max_iterations = count();
    else if (key == "lm.step_tolerance") lm.step_tolerance = num();
    else if (key == "lm.residual_tolerance") lm.residual_tolerance = num();
    else if (key == "lm.lambda_max") lm.lambda_max = num();
    else if (key == "lm.scale_diagonal") lm.scale_diagonal = detail::parse_bool(key, value);
    else if (key == "lm.fd_step_scale") lm.fd_step_scale = num();
    else throw InvalidConfig("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
}

inline void load_config(const std::string& path, GaConfig& ga, NewtonConfig& newton, LmConfig& lm) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  apply_config(buffer.str(), ga, newton, lm);
}

}  // namespace eqsolve
