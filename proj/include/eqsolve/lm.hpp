#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include "errors.hpp"
#include "expr.hpp"
#include "linalg.hpp"
#include "newton.hpp"
#include "report.hpp"
#include "vector.hpp"

namespace eqsolve {

struct LmConfig {
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  std::size_t max_iterations = 200;
  double step_tolerance = 1e-10;
  double residual_tolerance = 1e-10;
  double lambda_max = 1e12;
  // Damp with λ·diag(JᵀJ) instead of λ·I.
  bool scale_diagonal = false;
  double fd_step_scale = 1e-5;

  void validate() const {
    if (!(lambda_init > 0.0)) throw InvalidConfig("lambda_init must be positive");
    if (!(lambda_up > 1.0)) throw InvalidConfig("lambda_up must exceed 1");
    if (!(lambda_down > 0.0 && lambda_down < 1.0)) throw InvalidConfig("lambda_down must lie in (0, 1)");
    if (!(step_tolerance > 0.0) || !(residual_tolerance > 0.0)) throw InvalidConfig("tolerances must be positive");
    if (!(lambda_max >= lambda_init)) throw InvalidConfig("lambda_max must be at least lambda_init");
    if (max_iterations < 1) throw InvalidConfig("max_iterations must be at least 1");
    if (!(fd_step_scale > 0.0)) throw InvalidConfig("fd_step_scale must be positive");
  }
};

/// ||F(x)||₂².
inline double lm_objective(const EquationSystem& system, std::span<const double> x) {
  return squared_norm(residual_vector(system, x));
}

/// Levenberg-Marquardt minimization of ||F(x)||².
///
/// Each trial solves (JᵀJ + λI) Δx = -Jᵀr. A trial that lowers ||F||² is
/// accepted and λ shrinks by lambda_down; otherwise λ grows by lambda_up and
/// the damped system is re-solved with the same Jacobian. Every trial counts
/// toward max_iterations. A trial point outside the residuals' domain counts
/// as a rejection. The trace records ||F||₂ at x0 and after each accepted step.
inline SolveReport lm_solve(const EquationSystem& system, std::span<const double> x0, const LmConfig& cfg = {}) {
  cfg.validate();
  if (system.equation_count() < system.variable_count())
    throw InvalidConfig("Levenberg-Marquardt needs at least as many equations as unknowns");
  if (x0.size() != system.variable_count()) throw DimensionMismatch("x0 length does not match variable count");

  Stopwatch clock;
  SolveReport report;
  report.method = Method::LM;
  const std::size_t n = system.variable_count();

  Vector x(x0.begin(), x0.end());
  std::size_t trials = 0;
  auto finish = [&](StopReason why, bool ok) {
    report.stop = why;
    report.converged = ok;
    report.iterations = trials;
    report.solutions = {x};
    try {
      report.residual_norms = {residual_norm(system, x)};
    } catch (const DomainError&) {
      report.residual_norms = {std::numeric_limits<double>::infinity()};
    }
    report.elapsed = clock.elapsed();
    return report;
  };

  Vector r;
  try {
    r = residual_vector(system, x);
  } catch (const DomainError& e) {
    report.failed_at = 0;
    report.message = e.what();
    return finish(StopReason::DomainFailure, false);
  }
  double cost = squared_norm(r);
  report.trace.push_back({0, norm2(r)});
  report.path.push_back(x);

  double lambda = cfg.lambda_init;
  std::optional<Matrix> normal;  // JᵀJ at the current x
  Vector gradient;               // Jᵀr at the current x

  for (;;) {
    if (norm2(r) < cfg.residual_tolerance) return finish(StopReason::ResidualTolerance, true);
    if (trials >= cfg.max_iterations) return finish(StopReason::MaxIterations, false);

    if (!normal) {
      try {
        const Matrix jac = jacobian_fd(system, x, cfg.fd_step_scale);
        const Matrix jt = transpose(jac);
        normal = mat_mul(jt, jac);
        gradient = mat_vec(jt, r);
      } catch (const DomainError& e) {
        report.failed_at = trials + 1;
        report.message = e.what();
        return finish(StopReason::DomainFailure, false);
      }
    }

    Matrix damped = *normal;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = cfg.scale_diagonal ? std::max((*normal)(i, i), 1e-12) : 1.0;
      damped(i, i) += lambda * d;
    }
    Vector rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -gradient[i];

    Vector step;
    try {
      step = lin_solve_general(damped, rhs);
    } catch (const SingularMatrix&) {
      report.failed_at = trials + 1;
      report.message = "singular damped system at iteration " + std::to_string(trials + 1);
      return finish(StopReason::SingularJacobian, false);
    }
    ++trials;

    Vector candidate = x;
    for (std::size_t i = 0; i < n; ++i) candidate[i] += step[i];
    std::optional<Vector> r_new;
    try {
      r_new = residual_vector(system, candidate);
    } catch (const DomainError&) {
    }

    if (r_new && squared_norm(*r_new) < cost) {
      x = std::move(candidate);
      r = std::move(*r_new);
      cost = squared_norm(r);
      normal.reset();
      lambda = std::max(lambda * cfg.lambda_down, std::numeric_limits<double>::min());
      report.trace.push_back({trials, norm2(r)});
      report.path.push_back(x);
      if (norm2(r) < cfg.residual_tolerance) return finish(StopReason::ResidualTolerance, true);
      if (norm2(step) < cfg.step_tolerance) return finish(StopReason::StepTolerance, true);
    } else {
      lambda *= cfg.lambda_up;
      if (lambda > cfg.lambda_max) return finish(StopReason::DampingLimit, false);
    }
  }
}

}  // namespace eqsolve
