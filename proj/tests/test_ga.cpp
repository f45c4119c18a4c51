#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <eqsolve/bench.hpp>
#include <eqsolve/ga.hpp>

using namespace eqsolve;
using Catch::Approx;

namespace {

const EquationSystem& linear_benchmark() {
  static const EquationSystem s = parse_system("3*x1 + 2*x2 = 5\n4*x1 - x2 = 1");
  return s;
}

GaResult without_time(GaResult r) {
  r.report.elapsed = {};
  return r;
}

}  // namespace

TEST_CASE("init_population", "[ga][init]") {
  GaConfig cfg;
  Rng rng(1);
  const auto pop = init_population(cfg, 2, rng);
  REQUIRE(pop.size() == 100);
  for (const auto& c : pop) {
    REQUIRE(c.genes.size() == 2);
    for (double g : c.genes) REQUIRE((g >= -10.0 && g <= 10.0));
  }

  GaConfig origin;
  origin.init_low = 0.0;
  origin.init_high = 0.0;
  Rng rng0(9);
  for (const auto& c : init_population(origin, 3, rng0)) REQUIRE(c.genes == Vector{0, 0, 0});

  Rng a(123);
  Rng b(123);
  REQUIRE(init_population(cfg, 3, a) == init_population(cfg, 3, b));

  GaConfig ranged;
  ranged.variable_bounds = {{0.0, 1.0}, {-5.0, -4.0}};
  Rng rng2(4);
  for (const auto& c : init_population(ranged, 2, rng2)) {
    REQUIRE((c.genes[0] >= 0.0 && c.genes[0] <= 1.0));
    REQUIRE((c.genes[1] >= -5.0 && c.genes[1] <= -4.0));
  }
}

TEST_CASE("GaConfig validation", "[ga][config]") {
  Rng rng(1);
  auto rejects = [&](auto tweak) {
    GaConfig cfg;
    tweak(cfg);
    REQUIRE_THROWS_AS(init_population(cfg, 2, rng), InvalidConfig);
  };
  rejects([](GaConfig& c) { c.crossover_rate = 1.5; });
  rejects([](GaConfig& c) { c.mutation_rate = -0.1; });
  rejects([](GaConfig& c) { c.tournament_size = 1; });
  rejects([](GaConfig& c) { c.tournament_size = 101; });
  rejects([](GaConfig& c) { c.elite_count = 100; });
  rejects([](GaConfig& c) { c.init_low = 5.0; c.init_high = -5.0; });
  rejects([](GaConfig& c) { c.mutation_delta = 0.0; });
  rejects([](GaConfig& c) { c.variable_bounds = {{0.0, 1.0}}; });
  REQUIRE_THROWS_AS(init_population(GaConfig{}, 0, rng), InvalidConfig);
}

TEST_CASE("fitness", "[ga][fitness]") {
  const auto t1 = find_case("linear-2").system();
  REQUIRE(fitness(t1, {{2, 3, -1}}) == 0.0);
  REQUIRE(fitness(linear_benchmark(), {{0, 0}}) == 6.0);
  REQUIRE(squared_fitness(linear_benchmark(), {{0, 0}}) == 26.0);

  const auto logs = parse_system("ln(x3 + x2) = 1\nx1 = 0");
  REQUIRE(fitness(logs, {{0.5, -1.0, 0.0}}) == kDomainPenalty);
  REQUIRE(kDomainPenalty == 1e12);
  // Any in-domain chromosome wins a tournament against the penalty.
  const double ok = fitness(logs, {{2.0, 2.0, 50.0}});
  REQUIRE(ok < kDomainPenalty);
  Rng rng(5);
  const std::vector<double> fits{kDomainPenalty, ok};
  int penalized = 0;
  for (int i = 0; i < 4000; ++i)
    if (tournament_select_index(fits, 2, rng) == 0) ++penalized;
  // Only the draw (0, 0) can pick the penalized chromosome.
  REQUIRE(std::abs(penalized / 4000.0 - 0.25) < 0.03);
}

TEST_CASE("tournament selection", "[ga][selection]") {
  Population pop{{{1}}, {{2}}, {{3}}, {{4}}, {{5}}};
  const std::vector<double> fits{3.0, 0.5, 2.0, 9.0, 4.0};
  GaConfig cfg;
  cfg.population_size = 5;
  cfg.tournament_size = 5;
  Rng rng(11);

  // Draws are with replacement, so a full-size tournament includes the best
  // with probability 1 - (4/5)^5 and then always returns it.
  std::size_t best_hits = 0;
  for (int i = 0; i < 4000; ++i)
    if (tournament_select(pop, fits, cfg, rng).genes[0] == 2.0) ++best_hits;
  REQUIRE(std::abs(best_hits / 4000.0 - (1 - std::pow(0.8, 5))) < 0.03);

  // Ties go to the lowest index.
  const std::vector<double> tied{1.0, 1.0, 1.0};
  std::size_t picks[3] = {0, 0, 0};
  for (int i = 0; i < 3000; ++i) ++picks[tournament_select_index(tied, 3, rng)];
  REQUIRE(picks[0] > picks[1]);
  REQUIRE(picks[1] > picks[2]);

  REQUIRE_THROWS_AS(tournament_select(Population{}, std::vector<double>{}, cfg, rng), DimensionMismatch);
}

TEST_CASE("tournament frequency matches enumeration", "[ga][selection][property]") {
  const std::vector<double> fits{1, 2, 3, 4};
  Rng rng(2024);
  int best = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i)
    if (tournament_select_index(fits, 2, rng) == 0) ++best;
  // Ordered pairs over 4 items: 16, of which 7 contain index 0.
  REQUIRE(std::abs(best / static_cast<double>(draws) - 7.0 / 16.0) <= 0.02);
}

TEST_CASE("one-point crossover", "[ga][crossover]") {
  const Chromosome p1{{1, 2, 3, 4}};
  const Chromosome p2{{5, 6, 7, 8}};
  const auto [c1, c2] = crossover_at(p1, p2, 2);
  REQUIRE(c1.genes == Vector{1, 2, 7, 8});
  REQUIRE(c2.genes == Vector{5, 6, 3, 4});

  GaConfig cfg;
  cfg.crossover_rate = 1.0;
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto [a, b] = crossover_one_point(p1, p1, cfg, rng);
    REQUIRE(a == p1);
    REQUIRE(b == p1);
  }

  cfg.crossover_rate = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto [a, b] = crossover_one_point(p1, p2, cfg, rng);
    REQUIRE(a == p1);
    REQUIRE(b == p2);
  }

  cfg.crossover_rate = 1.0;
  const auto [s1, s2] = crossover_one_point(Chromosome{{1}}, Chromosome{{2}}, cfg, rng);
  REQUIRE(s1.genes == Vector{1});
  REQUIRE(s2.genes == Vector{2});

  REQUIRE_THROWS_AS(crossover_at(p1, Chromosome{{1}}, 1), DimensionMismatch);
}

TEST_CASE("crossover conserves genes per position", "[ga][crossover][property]") {
  GaConfig cfg;
  cfg.crossover_rate = 0.8;
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.index(6);
    Chromosome p1;
    Chromosome p2;
    for (std::size_t j = 0; j < n; ++j) {
      p1.genes.push_back(rng.uniform(-10, 10));
      p2.genes.push_back(rng.uniform(-10, 10));
    }
    const auto [c1, c2] = crossover_one_point(p1, p2, cfg, rng);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> parents{p1.genes[j], p2.genes[j]};
      std::vector<double> children{c1.genes[j], c2.genes[j]};
      std::sort(parents.begin(), parents.end());
      std::sort(children.begin(), children.end());
      REQUIRE(parents == children);
    }
  }
}

TEST_CASE("mutation", "[ga][mutation]") {
  const Chromosome c{{1.0, -2.0, 3.5}};
  GaConfig cfg;
  Rng rng(77);

  cfg.mutation_rate = 0.0;
  for (int i = 0; i < 50; ++i) REQUIRE(mutate(c, cfg, rng) == c);

  cfg.mutation_rate = 1.0;
  cfg.mutation_delta = 0.5;
  for (int i = 0; i < 200; ++i) {
    const auto m = mutate(c, cfg, rng);
    for (std::size_t j = 0; j < 3; ++j) {
      REQUIRE(std::abs(m.genes[j] - c.genes[j]) < 0.5);
      REQUIRE(m.genes[j] != c.genes[j]);
    }
  }

  // At the upper bound only non-positive moves survive clamping.
  const Chromosome top{{10.0}};
  for (int i = 0; i < 200; ++i) {
    const auto m = mutate(top, cfg, rng);
    REQUIRE(m.genes[0] <= 10.0);
    REQUIRE(m.genes[0] > 9.5);
  }
  cfg.init_low = 10.0;
  cfg.init_high = 10.0;
  for (int i = 0; i < 50; ++i) REQUIRE(mutate(top, cfg, rng).genes[0] == 10.0);
}

TEST_CASE("distinct_solutions", "[ga][dedup]") {
  GaConfig cfg;
  const Population roots{{{1, 2, 3}}, {{2, 0, 4}}, {{0, 4, 2}}};
  const auto kept = distinct_solutions(roots, std::vector{0.0, 0.0, 0.0}, cfg);
  REQUIRE(kept.size() == 3);

  const Population twins{{{4, 3}}, {{4, 3}}};
  REQUIRE(distinct_solutions(twins, std::vector{0.0, 0.0}, cfg).size() == 1);

  const Population near{{{4, 3}}, {{4.2, 3.1}}, {{-3, -4}}};
  const auto merged = distinct_solutions(near, std::vector{1e-5, 1e-6, 2e-6}, cfg);
  REQUIRE(merged.size() == 2);
  REQUIRE(merged[0].solution == Vector{4.2, 3.1});
  REQUIRE(merged[1].solution == Vector{-3, -4});
  REQUIRE(merged[0].fitness <= merged[1].fitness);

  REQUIRE(distinct_solutions(twins, std::vector{1.0, 2.0}, cfg).empty());
  // The cutoff is 100 times the threshold.
  REQUIRE(distinct_solutions(twins, std::vector{0.99e-4, 1e-4}, cfg).size() == 1);
}

TEST_CASE("ga_solve report shape", "[ga][solve]") {
  GaConfig cfg;
  cfg.seed = 7;
  const auto result = ga_solve(linear_benchmark(), cfg);
  const auto& r = result.report;
  REQUIRE(r.method == Method::GA);
  REQUIRE(result.seed_used == 7);
  REQUIRE(r.iterations == result.generations_run);
  REQUIRE(r.trace.size() == result.generations_run + 1);
  REQUIRE(result.squared_trace.size() == r.trace.size());
  REQUIRE_FALSE(r.solutions.empty());
  REQUIRE(r.solutions.size() == r.residual_norms.size());
  for (std::size_t i = 0; i < r.solutions.size(); ++i) REQUIRE(r.residual_norms[i] == residual_norm(linear_benchmark(), r.solutions[i]));
  REQUIRE(r.converged == (r.stop == StopReason::FitnessThreshold));
  REQUIRE(result.generations_run <= cfg.max_generations);
  for (const auto& c : result.distinct_solutions) REQUIRE(residual_norm(linear_benchmark(), c.solution) <= c.fitness);
}

TEST_CASE("elitism keeps the best fitness non-increasing", "[ga][property]") {
  for (const auto& c : registry()) {
    const auto system = c.system();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      GaConfig cfg;
      cfg.seed = seed;
      cfg.max_generations = 40;
      const auto result = ga_solve(system, cfg);
      INFO(c.id << " seed " << seed);
      for (std::size_t g = 1; g < result.report.trace.size(); ++g)
        REQUIRE(result.report.trace[g].value <= result.report.trace[g - 1].value);
    }
  }

  GaConfig tiny;
  tiny.population_size = 3;
  tiny.elite_count = 2;
  tiny.tournament_size = 2;
  tiny.stall_generations = 1000;
  tiny.mutation_rate = 0.5;
  const auto result = ga_solve(find_case("nonlinear-1").system(), tiny);
  REQUIRE(result.generations_run == tiny.max_generations);
  for (std::size_t g = 1; g < result.report.trace.size(); ++g)
    REQUIRE(result.report.trace[g].value <= result.report.trace[g - 1].value);
}

TEST_CASE("seeded runs are bit-identical", "[ga][property]") {
  for (const char* id : {"linear-1", "nonlinear-2", "nonlinear-5"}) {
    GaConfig cfg;
    cfg.seed = 99;
    const auto system = find_case(id).system();
    const auto a = without_time(ga_solve(system, cfg));
    const auto b = without_time(ga_solve(system, cfg));
    REQUIRE(a == b);

    cfg.threads = 4;
    REQUIRE(without_time(ga_solve(system, cfg)) == a);

    cfg.threads = 1;
    cfg.seed = 100;
    REQUIRE_FALSE(without_time(ga_solve(system, cfg)) == a);
  }
}

TEST_CASE("every chromosome stays within bounds", "[ga][property]") {
  GaConfig cfg;
  cfg.mutation_rate = 0.3;
  cfg.mutation_delta = 3.0;
  cfg.init_low = -2.0;
  cfg.init_high = 2.0;
  cfg.max_generations = 60;
  cfg.stall_generations = 1000;
  std::size_t generations = 0;
  const auto observer = [&](std::size_t, const Population& pop, std::span<const double> fit) {
    ++generations;
    REQUIRE(pop.size() == cfg.population_size);
    REQUIRE(fit.size() == pop.size());
    for (const auto& c : pop) {
      REQUIRE(c.genes.size() == 2);
      for (double g : c.genes) REQUIRE((std::isfinite(g) && g >= -2.0 && g <= 2.0));
    }
  };
  const auto result = ga_solve(find_case("nonlinear-1").system(), cfg, observer);
  REQUIRE(generations == result.generations_run + 1);

  cfg.variable_bounds = {{0.0, 5.0}, {-1.0, 1.0}};
  ga_solve(parse_system("x + y = 3\nx - y = 1"), cfg, [&](std::size_t, const Population& pop, std::span<const double>) {
    for (const auto& c : pop) {
      REQUIRE((c.genes[0] >= 0.0 && c.genes[0] <= 5.0));
      REQUIRE((c.genes[1] >= -1.0 && c.genes[1] <= 1.0));
    }
  });
}

TEST_CASE("termination criteria", "[ga][solve]") {
  GaConfig cfg;
  cfg.max_generations = 5;
  cfg.stall_generations = 1000;
  const auto capped = ga_solve(find_case("nonlinear-2").system(), cfg);
  REQUIRE(capped.generations_run == 5);
  REQUIRE(capped.report.stop == StopReason::MaxIterations);
  REQUIRE_FALSE(capped.report.converged);

  GaConfig stall;
  stall.mutation_rate = 0.0;
  stall.crossover_rate = 0.0;
  stall.stall_generations = 4;
  const auto stalled = ga_solve(find_case("nonlinear-2").system(), stall);
  REQUIRE(stalled.report.stop == StopReason::Stalled);
  REQUIRE(stalled.generations_run == 4);

  // Every chromosome of a single-point range is an exact root.
  GaConfig exact;
  exact.variable_bounds = {{4.0, 4.0}, {3.0, 3.0}};
  const auto found = ga_solve(find_case("nonlinear-1").system(), exact);
  REQUIRE(found.report.converged);
  REQUIRE(found.report.stop == StopReason::FitnessThreshold);
  REQUIRE(found.generations_run == 0);
  REQUIRE(found.distinct_solutions.size() == 1);
  REQUIRE(found.report.solutions == std::vector<Vector>{{4, 3}});
}

TEST_CASE("domain penalties keep the search alive", "[ga][solve]") {
  const auto system = parse_system("ln(x + y) = 1\nx - y = 0.5");
  GaConfig cfg;
  cfg.seed = 3;
  const auto result = ga_solve(system, cfg);
  REQUIRE(result.report.trace.back().value < kDomainPenalty);
  REQUIRE(std::isfinite(result.report.trace.back().value));
}
