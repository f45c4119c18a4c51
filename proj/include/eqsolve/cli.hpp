#pragma once

// Command-line front end: `solve`, `bench`, and `trace` subcommands.
//
// Exit codes: 0 success, 1 solver did not converge, 2 usage or input error.

#include <filesystem>
#include <iostream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bench.hpp"

namespace eqsolve {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline Vector parse_vector_arg(const std::string& flag, const std::string& text) {
  Vector out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    double v = 0.0;
    auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || end != item.data() + item.size())
      throw InvalidConfig(flag + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidConfig(flag + ": expected comma-separated numbers");
  return out;
}

inline std::string read_system_text(const std::string& source, std::istream& in) {
  if (source == "-") return std::string(std::istreambuf_iterator<char>(in), {});
  std::ifstream file(source);
  if (!file) throw IoError(source, "cannot open system file");
  return std::string(std::istreambuf_iterator<char>(file), {});
}

inline BenchmarkCase adhoc_case(const std::string& text) {
  BenchmarkCase c;
  c.id = "input";
  c.system_text = text;
  const EquationSystem system = parse_system(text);
  try {
    (void)extract_linear(system);
    c.kind = CaseKind::Linear;
  } catch (const NotLinear&) {
    c.kind = CaseKind::Nonlinear;
  } catch (const DomainError&) {
    c.kind = CaseKind::Nonlinear;
  }
  c.default_x0.assign(system.variable_count(), 1.0);
  return c;
}

}  // namespace detail

/// Runs the CLI with the given arguments (argv[0] is the program name).
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr,
                    std::istream& in = std::cin) {
  CLI::App app{"Solve systems of equations with a genetic algorithm, Newton's method, "
               "Levenberg-Marquardt, or Gaussian elimination."};
  app.require_subcommand(1);

  std::string system_path;
  std::string method_name;
  std::string x0_text;
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_path;
  std::string format_name = "csv";

  auto* solve = app.add_subcommand("solve", "Solve one system");
  solve->add_option("--system", system_path, "System file in the equation grammar, or - for stdin")->required();
  solve->add_option("--method", method_name, "ga | newton | lm | gauss")->required();
  solve->add_option("--x0", x0_text, "Initial guess for newton/lm, comma separated");
  solve->add_option("--seed", seed, "GA seed");
  solve->add_option("--config", config_path, "key = value overrides");
  solve->add_option("--out", out_path, "Write the report here instead of stdout");
  solve->add_option("--format", format_name, "csv | json | markdown");

  std::string suite = "all";
  std::string methods_text;
  std::size_t seeds = 10;
  std::string out_dir = ".";
  bool canonical = false;
  std::size_t jobs = 1;
  auto* bench = app.add_subcommand("bench", "Run the benchmark suite");
  bench->add_option("--suite", suite, "linear | nonlinear | all");
  bench->add_option("--methods", methods_text, "Comma-separated methods (default: all applicable)");
  bench->add_option("--seeds", seeds, "GA runs per case");
  bench->add_option("--seed", seed, "Base GA seed");
  bench->add_option("--config", config_path, "key = value overrides");
  bench->add_option("--out-dir", out_dir, "Directory for bench.csv, bench.json, bench.md");
  bench->add_flag("--canonical", canonical, "Write elapsed times as 0 for byte-stable output");
  bench->add_option("--jobs", jobs, "Concurrent runs");

  auto* trace = app.add_subcommand("trace", "Write a convergence trace");
  trace->add_option("--system", system_path, "System file, or - for stdin")->required();
  trace->add_option("--method", method_name, "ga | newton | lm")->required();
  trace->add_option("--seed", seed, "GA seed");
  trace->add_option("--x0", x0_text, "Initial guess for newton/lm");
  trace->add_option("--config", config_path, "key = value overrides");
  trace->add_option("--out", out_path, "Trace CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  RunOptions opt;
  try {
    if (!config_path.empty()) load_config(config_path, opt.ga, opt.newton, opt.lm);
    if (seed) opt.ga.seed = *seed;
    if (!x0_text.empty()) opt.x0 = detail::parse_vector_arg("--x0", x0_text);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (solve->parsed() || trace->parsed()) {
      const auto method = method_from_name(method_name);
      if (!method || (trace->parsed() && *method == Method::Gauss)) {
        err << "error: --method: unsupported method '" << method_name << "'\n";
        return kExitUsage;
      }
      const BenchmarkCase c = detail::adhoc_case(detail::read_system_text(system_path, in));
      const EquationSystem system = c.system();
      if (opt.x0 && opt.x0->size() != system.variable_count()) {
        err << "error: --x0: expected " << system.variable_count() << " values\n";
        return kExitUsage;
      }
      if (*method == Method::Gauss && c.kind != CaseKind::Linear) {
        // Surface the linearity failure itself.
        try {
          (void)extract_linear(system);
        } catch (const Error& e) {
          err << "error: " << e.what() << "; Gaussian elimination needs a linear system\n";
        }
        return kExitUsage;
      }
      if ((*method == Method::Newton) && !system.is_square()) {
        err << "error: Newton's method needs a square system\n";
        return kExitUsage;
      }

      opt.seeds = 1;
      BenchReportRow row = run_single(c, *method, opt, opt.ga.seed);

      if (trace->parsed()) {
        emit_trace(row.report, out_path);
        out << "wrote " << row.report.trace.size() << " trace points to " << out_path << '\n';
      } else {
        const auto format = format_from_name(format_name);
        if (!format) {
          err << "error: --format: unsupported format '" << format_name << "'\n";
          return kExitUsage;
        }
        if (out_path.empty()) emit_report({row}, *format, out);
        else emit_report({row}, *format, out_path);
        if (!row.note.empty()) err << "note: " << row.note << '\n';
      }
      return row.converged ? kExitOk : kExitNotConverged;
    }

    // bench
    std::vector<BenchmarkCase> cases;
    for (const auto& c : registry()) {
      const bool table_case = c.id.rfind("linear-", 0) == 0 || c.id.rfind("nonlinear-", 0) == 0;
      if (suite == "all" || (table_case && to_string(c.kind) == suite)) cases.push_back(c);
    }
    if (suite != "all" && suite != "linear" && suite != "nonlinear") {
      err << "error: --suite: expected linear, nonlinear, or all\n";
      return kExitUsage;
    }
    std::set<Method> methods;
    if (methods_text.empty()) {
      methods = {Method::Gauss, Method::GA, Method::Newton, Method::LM};
    } else {
      std::istringstream list(methods_text);
      std::string name;
      while (std::getline(list, name, ',')) {
        const auto m = method_from_name(detail::trim(name));
        if (!m) {
          err << "error: --methods: unknown method '" << name << "'\n";
          return kExitUsage;
        }
        methods.insert(*m);
      }
    }
    opt.seeds = seeds;
    const auto rows = run_bench(cases, methods, opt, jobs);
    if (rows.empty()) {
      err << "error: no applicable (case, method) pairs\n";
      return kExitUsage;
    }
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    emit_report(rows, ReportFormat::Csv, (dir / "bench.csv").string(), canonical);
    emit_report(rows, ReportFormat::Json, (dir / "bench.json").string(), canonical);
    emit_report(rows, ReportFormat::Markdown, (dir / "bench.md").string(), canonical);
    out << "wrote " << rows.size() << " rows to " << (dir / "bench.{csv,json,md}").string() << '\n';
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace eqsolve
