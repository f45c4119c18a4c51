#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "vector.hpp"

namespace eqsolve {

enum class Method { Newton, LM, GA, Gauss };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Newton: return "newton";
    case Method::LM: return "lm";
    case Method::GA: return "ga";
    case Method::Gauss: return "gauss";
  }
  return "?";
}

inline std::optional<Method> method_from_name(std::string_view name) {
  if (name == "newton") return Method::Newton;
  if (name == "lm") return Method::LM;
  if (name == "ga") return Method::GA;
  if (name == "gauss") return Method::Gauss;
  return std::nullopt;
}

/// Why a solver stopped.
enum class StopReason {
  ResidualTolerance,
  StepTolerance,
  FitnessThreshold,
  MaxIterations,
  Stalled,
  DampingLimit,
  SingularJacobian,
  DomainFailure,
  Direct,
};

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::ResidualTolerance: return "residual-tolerance";
    case StopReason::StepTolerance: return "step-tolerance";
    case StopReason::FitnessThreshold: return "fitness-threshold";
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::Stalled: return "stalled";
    case StopReason::DampingLimit: return "damping-limit";
    case StopReason::SingularJacobian: return "singular-jacobian";
    case StopReason::DomainFailure: return "domain-error";
    case StopReason::Direct: return "direct";
  }
  return "?";
}

struct TracePoint {
  std::size_t index;
  double value;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

/// Result of one solver run. Iterative failures (singular Jacobian, domain
/// error) are reported here with `converged == false` rather than thrown, so
/// the trace up to the failure is kept.
struct SolveReport {
  Method method = Method::Newton;
  std::vector<Vector> solutions;
  std::vector<double> residual_norms;  // aligned with solutions
  std::size_t iterations = 0;
  bool converged = false;
  StopReason stop = StopReason::MaxIterations;
  std::optional<std::size_t> failed_at;  // iteration of a singular/domain failure
  std::string message;
  std::vector<TracePoint> trace;  // merit value per iteration or generation
  std::vector<Vector> path;       // iterate (or best chromosome) per trace point
  std::chrono::duration<double, std::milli> elapsed{0};

  friend bool operator==(const SolveReport&, const SolveReport&) = default;
};

/// Monotonic stopwatch for per-run timing.
class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  std::chrono::duration<double, std::milli> elapsed() const {
    return std::chrono::steady_clock::now() - start_;
  }

private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace eqsolve
