#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "linalg.hpp"
#include "report.hpp"
#include "vector.hpp"

namespace eqsolve {

struct NewtonConfig {
  std::size_t max_iterations = 100;
  double step_tolerance = 1e-10;      // on ||Δx||₂
  double residual_tolerance = 1e-10;  // on ||F(x)||₂
  double fd_step_scale = 1e-5;

  void validate() const {
    if (max_iterations < 1) throw InvalidConfig("max_iterations must be at least 1");
    if (!(step_tolerance > 0.0) || !(residual_tolerance > 0.0)) throw InvalidConfig("tolerances must be positive");
    if (!(fd_step_scale > 0.0)) throw InvalidConfig("fd_step_scale must be positive");
  }
};

/// Central-difference Jacobian, J[i][j] ≈ ∂f_i/∂x_j, with step
/// h_j = scale · max(1, |x_j|). Where one side of a probe leaves a residual's
/// domain the one-sided difference toward the other side is used; if both
/// fail, DomainError.
inline Matrix jacobian_fd(const EquationSystem& system, std::span<const double> x, double scale) {
  const std::size_t m = system.equation_count();
  const std::size_t n = system.variable_count();
  if (x.size() != n) throw DimensionMismatch("jacobian_fd: point length does not match variable count");

  // Probes run in long double: for linear residuals the rounding in f(x ± h)
  // is what limits a single Newton step, not the truncation error.
  using Ext = long double;
  (void)residual_vector(system, x);  // x itself must lie in every domain
  Matrix jac(m, n);
  std::vector<Ext> probe(x.begin(), x.end());
  for (std::size_t j = 0; j < n; ++j) {
    const Ext xj = x[j];
    const Ext h = scale * std::max(1.0, std::abs(x[j]));
    const Ext hi = xj + h;
    const Ext lo = xj - h;
    for (std::size_t i = 0; i < m; ++i) {
      const Expression& f = system.residuals()[i];
      auto at = [&](Ext v) -> std::optional<Ext> {
        probe[j] = v;
        try {
          return f.evaluate_extended(probe);
        } catch (const DomainError&) {
          return std::nullopt;
        }
      };
      const auto up = at(hi);
      const auto down = at(lo);
      Ext d = 0;
      if (up && down) {
        d = (*up - *down) / (hi - lo);
      } else if (up || down) {
        // One-sided fallback needs the centre value at the same precision.
        const auto mid = at(xj);
        if (!mid) throw DomainError("residual cannot be evaluated in extended precision", i);
        d = up ? (*up - *mid) / (hi - xj) : (*mid - *down) / (xj - lo);
      } else {
        throw DomainError("both difference probes leave the domain for variable " + system.variables()[j], i);
      }
      probe[j] = xj;
      jac(i, j) = static_cast<double>(d);
      if (!std::isfinite(jac(i, j))) throw DomainError("Jacobian entry is not finite", i);
    }
  }
  return jac;
}

/// Newton's method x_{k+1} = x_k + Δx_k with J(x_k) Δx_k = -F(x_k).
///
/// The trace holds ||F(x_k)||₂ for every iterate, starting with x0, and the
/// path the iterates themselves. A singular Jacobian or an iterate outside the
/// residuals' domain ends the run with a failed report.
inline SolveReport newton_solve(const EquationSystem& system, std::span<const double> x0,
                                const NewtonConfig& cfg = {}) {
  cfg.validate();
  if (!system.is_square()) throw NonSquare(system.equation_count(), system.variable_count());
  if (x0.size() != system.variable_count()) throw DimensionMismatch("x0 length does not match variable count");

  Stopwatch clock;
  SolveReport report;
  report.method = Method::Newton;

  Vector x(x0.begin(), x0.end());
  bool small_step = false;
  std::size_t k = 0;
  auto finish = [&](StopReason why, bool ok) {
    report.stop = why;
    report.converged = ok;
    report.iterations = k;
    report.solutions = {x};
    try {
      report.residual_norms = {residual_norm(system, x)};
    } catch (const DomainError&) {
      report.residual_norms = {std::numeric_limits<double>::infinity()};
    }
    report.elapsed = clock.elapsed();
    return report;
  };

  for (;; ++k) {
    Vector r;
    try {
      r = residual_vector(system, x);
    } catch (const DomainError& e) {
      report.failed_at = k;
      report.message = e.what();
      return finish(StopReason::DomainFailure, false);
    }
    const double norm = norm2(r);
    report.trace.push_back({k, norm});
    report.path.push_back(x);

    if (norm < cfg.residual_tolerance) return finish(StopReason::ResidualTolerance, true);
    if (small_step) return finish(StopReason::StepTolerance, true);
    if (k == cfg.max_iterations) return finish(StopReason::MaxIterations, false);

    Vector step;
    try {
      const Matrix jac = jacobian_fd(system, x, cfg.fd_step_scale);
      for (auto& v : r) v = -v;
      step = lin_solve_general(jac, r);
    } catch (const SingularMatrix&) {
      report.failed_at = k + 1;
      report.message = "singular Jacobian at iteration " + std::to_string(k + 1);
      return finish(StopReason::SingularJacobian, false);
    } catch (const DomainError& e) {
      report.failed_at = k + 1;
      report.message = e.what();
      return finish(StopReason::DomainFailure, false);
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += step[i];
    small_step = norm2(step) < cfg.step_tolerance;
  }
}

}  // namespace eqsolve
