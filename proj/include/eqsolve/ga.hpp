#pragma once

// Real-coded genetic algorithm for F(x) = 0: minimizes the sum of absolute
// residuals with tournament selection, one-point crossover, uniform additive
// mutation, and elitism.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "report.hpp"
#include "vector.hpp"

namespace eqsolve {

/// Fitness assigned to a chromosome whose residuals cannot be evaluated.
inline constexpr double kDomainPenalty = 1e12;

/// Minimum per-generation improvement of the best fitness that resets the
/// stall counter.
inline constexpr double kStallEpsilon = 1e-12;

struct Chromosome {
  Vector genes;

  friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

using Population = std::vector<Chromosome>;

struct GaConfig {
  std::size_t population_size = 100;
  double crossover_rate = 0.8;
  double mutation_rate = 0.01;  // per gene
  std::size_t max_generations = 100;
  std::size_t tournament_size = 3;
  std::size_t elite_count = 2;
  double init_low = -10.0;
  double init_high = 10.0;
  // Per-variable [low, high] overriding init_low/init_high when non-empty.
  std::vector<std::pair<double, double>> variable_bounds;
  double mutation_delta = 0.5;
  double fitness_threshold = 1e-6;
  std::size_t stall_generations = 30;
  double dedup_radius = 0.5;
  std::uint64_t seed = 1;
  // Worker threads for fitness evaluation; results are identical for any value.
  std::size_t threads = 1;

  double low(std::size_t j) const { return variable_bounds.empty() ? init_low : variable_bounds[j].first; }
  double high(std::size_t j) const { return variable_bounds.empty() ? init_high : variable_bounds[j].second; }

  void validate(std::size_t n) const {
    auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (population_size < 2) throw InvalidConfig("population_size must be at least 2");
    if (!probability(crossover_rate)) throw InvalidConfig("crossover_rate must lie in [0, 1]");
    if (!probability(mutation_rate)) throw InvalidConfig("mutation_rate must lie in [0, 1]");
    if (tournament_size < 2 || tournament_size > population_size)
      throw InvalidConfig("tournament_size must lie in [2, population_size]");
    if (elite_count >= population_size) throw InvalidConfig("elite_count must be below population_size");
    if (!(mutation_delta > 0.0)) throw InvalidConfig("mutation_delta must be positive");
    if (!(fitness_threshold > 0.0)) throw InvalidConfig("fitness_threshold must be positive");
    if (!(dedup_radius >= 0.0)) throw InvalidConfig("dedup_radius must be non-negative");
    if (threads < 1) throw InvalidConfig("threads must be at least 1");
    if (!variable_bounds.empty() && variable_bounds.size() != n)
      throw InvalidConfig("variable_bounds must list one range per variable");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(low(j)) || !std::isfinite(high(j)))
        throw InvalidConfig("initialization bounds must be finite");
      if (low(j) > high(j)) throw InvalidConfig("initialization bounds are inverted");
    }
  }
};

/// Seeded generator with distributions defined here rather than by the
/// standard library, so a seed reproduces the same run on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [low, high]; exactly `low` when the range is empty.
  double uniform(double low, double high) { return low + (high - low) * uniform01(); }

  /// Uniform in the open interval (-delta, delta).
  double symmetric(double delta) {
    for (;;) {
      const double v = delta * (2.0 * uniform01() - 1.0);
      if (v != -delta) return v;
    }
  }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
      const std::uint64_t v = engine_();
      if (v < limit) return static_cast<std::size_t>(v % bound);
    }
  }

  bool chance(double p) { return uniform01() < p; }

private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Operators

inline Population init_population(const GaConfig& cfg, std::size_t n, Rng& rng) {
  if (n < 1) throw InvalidConfig("chromosomes need at least one gene");
  cfg.validate(n);
  Population pop(cfg.population_size);
  for (auto& c : pop) {
    c.genes.resize(n);
    for (std::size_t j = 0; j < n; ++j) c.genes[j] = rng.uniform(cfg.low(j), cfg.high(j));
  }
  return pop;
}

/// Σ|f_i(x)|; kDomainPenalty when any residual is undefined.
inline double fitness(const EquationSystem& system, const Chromosome& c) {
  try {
    return std::min(norm1(residual_vector(system, c.genes)), kDomainPenalty);
  } catch (const DomainError&) {
    return kDomainPenalty;
  }
}

/// Σ f_i(x)²; the least-squares merit, reported alongside fitness.
inline double squared_fitness(const EquationSystem& system, const Chromosome& c) {
  try {
    return std::min(squared_norm(residual_vector(system, c.genes)), kDomainPenalty);
  } catch (const DomainError&) {
    return kDomainPenalty;
  }
}

inline std::vector<double> evaluate_population(const EquationSystem& system, const Population& pop,
                                               std::size_t threads = 1) {
  std::vector<double> fit(pop.size());
  threads = std::clamp<std::size_t>(threads, 1, pop.size());
  if (threads == 1) {
    for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = fitness(system, pop[i]);
    return fit;
  }
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (pop.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(pop.size(), begin + chunk);
      workers.emplace_back([&, begin, end] {
        for (std::size_t i = begin; i < end; ++i) fit[i] = fitness(system, pop[i]);
      });
    }
  }
  return fit;
}

/// Draws tournament_size indices uniformly with replacement and returns the
/// index of the fittest, preferring the lowest index on ties.
inline std::size_t tournament_select_index(std::span<const double> fitnesses, std::size_t tournament_size,
                                           Rng& rng) {
  std::size_t best = rng.index(fitnesses.size());
  for (std::size_t k = 1; k < tournament_size; ++k) {
    const std::size_t i = rng.index(fitnesses.size());
    if (fitnesses[i] < fitnesses[best] || (fitnesses[i] == fitnesses[best] && i < best)) best = i;
  }
  return best;
}

inline const Chromosome& tournament_select(const Population& pop, std::span<const double> fitnesses,
                                           const GaConfig& cfg, Rng& rng) {
  if (pop.empty() || pop.size() != fitnesses.size())
    throw DimensionMismatch("tournament needs a nonempty population with aligned fitnesses");
  return pop[tournament_select_index(fitnesses, cfg.tournament_size, rng)];
}

/// Exchanges the gene tails of two parents at `cut` (genes [cut, n) swap).
inline std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& p1, const Chromosome& p2, std::size_t cut) {
  if (p1.genes.size() != p2.genes.size()) throw DimensionMismatch("crossover parents differ in length");
  Chromosome c1 = p1;
  Chromosome c2 = p2;
  for (std::size_t j = cut; j < p1.genes.size(); ++j) std::swap(c1.genes[j], c2.genes[j]);
  return {std::move(c1), std::move(c2)};
}

/// With probability crossover_rate, one-point crossover at a cut drawn
/// uniformly from {1, ..., n-1}; otherwise copies. A no-op for n = 1.
inline std::pair<Chromosome, Chromosome> crossover_one_point(const Chromosome& p1, const Chromosome& p2,
                                                             const GaConfig& cfg, Rng& rng) {
  if (p1.genes.size() != p2.genes.size()) throw DimensionMismatch("crossover parents differ in length");
  const std::size_t n = p1.genes.size();
  if (!rng.chance(cfg.crossover_rate) || n < 2) return {p1, p2};
  const std::size_t cut = 1 + rng.index(n - 1);
  return crossover_at(p1, p2, cut);
}

/// Each gene, with probability mutation_rate, gains a uniform perturbation in
/// (-delta, delta); the result is clamped to the initialization bounds.
inline Chromosome mutate(Chromosome c, const GaConfig& cfg, Rng& rng) {
  for (std::size_t j = 0; j < c.genes.size(); ++j) {
    if (!rng.chance(cfg.mutation_rate)) continue;
    c.genes[j] = std::clamp(c.genes[j] + rng.symmetric(cfg.mutation_delta), cfg.low(j), cfg.high(j));
  }
  return c;
}

struct Candidate {
  Vector solution;
  double fitness;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Chromosomes with fitness below 100 × fitness_threshold, kept greedily in
/// ascending-fitness order and dropping any within dedup_radius of one kept.
inline std::vector<Candidate> distinct_solutions(const Population& pop, std::span<const double> fitnesses,
                                                 const GaConfig& cfg) {
  if (pop.size() != fitnesses.size()) throw DimensionMismatch("population and fitnesses are not aligned");
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitnesses[a] < fitnesses[b]; });

  const double cutoff = 100.0 * cfg.fitness_threshold;
  std::vector<Candidate> kept;
  for (std::size_t i : order) {
    if (!(fitnesses[i] < cutoff)) break;
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const Candidate& k) {
      return distance2(k.solution, pop[i].genes) < cfg.dedup_radius;
    });
    if (!duplicate) kept.push_back({pop[i].genes, fitnesses[i]});
  }
  return kept;
}

struct GaResult {
  SolveReport report;
  std::vector<Candidate> distinct_solutions;
  std::size_t generations_run = 0;
  std::uint64_t seed_used = 0;
  std::vector<TracePoint> squared_trace;  // Σ f_i² of the best chromosome per generation

  friend bool operator==(const GaResult&, const GaResult&) = default;
};

/// Observer invoked with each generation's population (generation 0 is the
/// initial one) and its fitnesses.
using GenerationObserver = std::function<void(std::size_t, const Population&, std::span<const double>)>;

/// Generational GA. Stops when the best fitness drops below
/// fitness_threshold, after max_generations, or when the best fitness has
/// improved by less than kStallEpsilon for stall_generations generations.
inline GaResult ga_solve(const EquationSystem& system, const GaConfig& cfg,
                         const GenerationObserver& observe = nullptr) {
  const std::size_t n = system.variable_count();
  cfg.validate(n);
  Stopwatch clock;
  Rng rng(cfg.seed);

  Population pop = init_population(cfg, n, rng);
  std::vector<double> fit = evaluate_population(system, pop, cfg.threads);

  GaResult result;
  result.seed_used = cfg.seed;
  SolveReport& report = result.report;
  report.method = Method::GA;

  auto best_index = [&] {
    return static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin());
  };
  auto record = [&](std::size_t generation) {
    const std::size_t b = best_index();
    report.trace.push_back({generation, fit[b]});
    report.path.push_back(pop[b].genes);
    result.squared_trace.push_back({generation, squared_fitness(system, pop[b])});
    if (observe) observe(generation, pop, fit);
  };

  std::size_t generation = 0;
  std::size_t stall = 0;
  double best = fit[best_index()];
  record(0);

  std::vector<std::size_t> order(pop.size());
  for (;;) {
    if (best < cfg.fitness_threshold) {
      report.stop = StopReason::FitnessThreshold;
      break;
    }
    if (generation >= cfg.max_generations) {
      report.stop = StopReason::MaxIterations;
      break;
    }
    if (stall >= cfg.stall_generations) {
      report.stop = StopReason::Stalled;
      break;
    }

    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] < fit[b]; });

    Population next;
    next.reserve(cfg.population_size);
    for (std::size_t e = 0; e < cfg.elite_count; ++e) next.push_back(pop[order[e]]);
    while (next.size() < cfg.population_size) {
      const Chromosome& p1 = tournament_select(pop, fit, cfg, rng);
      const Chromosome& p2 = tournament_select(pop, fit, cfg, rng);
      auto [c1, c2] = crossover_one_point(p1, p2, cfg, rng);
      c1 = mutate(std::move(c1), cfg, rng);
      c2 = mutate(std::move(c2), cfg, rng);
      next.push_back(std::move(c1));
      if (next.size() < cfg.population_size) next.push_back(std::move(c2));
    }
    pop = std::move(next);
    fit = evaluate_population(system, pop, cfg.threads);
    ++generation;

    const double current = fit[best_index()];
    stall = (best - current < kStallEpsilon) ? stall + 1 : 0;
    best = std::min(best, current);
    record(generation);
  }

  result.generations_run = generation;
  result.distinct_solutions = distinct_solutions(pop, fit, cfg);

  report.iterations = generation;
  report.converged = report.stop == StopReason::FitnessThreshold;
  if (result.distinct_solutions.empty()) {
    report.solutions = {pop[best_index()].genes};
  } else {
    for (const auto& c : result.distinct_solutions) report.solutions.push_back(c.solution);
  }
  for (const auto& s : report.solutions) {
    try {
      report.residual_norms.push_back(residual_norm(system, s));
    } catch (const DomainError&) {
      report.residual_norms.push_back(std::numeric_limits<double>::infinity());
    }
  }
  report.elapsed = clock.elapsed();
  return result;
}

}  // namespace eqsolve
