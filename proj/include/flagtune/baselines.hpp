#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "flagtune/core.hpp"
#include "flagtune/evaluator.hpp"

namespace flagtune {

// Result assembled from everything the evaluator measured in this run:
// best = lowest time over all measurements, earliest on ties.
inline TuningResult make_result(const Evaluator& ev, std::string strategy) {
  const auto best = ev.best();
  if (!best) throw Error("no sequence was measured within the budget");
  const auto baseline = ev.baseline_time();
  if (!baseline) throw Error("result requested before the baseline was measured");
  TuningResult r;
  r.strategy = std::move(strategy);
  r.best_sequence = best->sequence;
  r.measured_time_s = best->time_s;
  r.baseline_time_s = *baseline;
  r.speedup = compute_speedup(*baseline, best->time_s);
  r.evaluations_used = ev.evaluations();
  r.time_c_s = best->at_s;
  r.history = ev.history();
  return r;
}

// Random iterative optimization: distinct random sequences until the budget
// or the search space runs out.
inline TuningResult rio_tune(Evaluator& ev, Rng& rng) {
  const auto n = ev.width();
  while (!ev.exhausted() && ev.cache_size() < space_size(n)) {
    auto s = random_sequence(rng, n);
    if (ev.cached(s)) continue;
    ev.measure(s, "rio");
  }
  return make_result(ev, "rio");
}

struct GaParams {
  std::size_t population = 20;
  std::size_t tournament = 2;
  double crossover_rate = 0.9;
  std::optional<double> mutation_rate;  // unset: 1/n
  std::size_t elitism = 1;
  std::size_t max_generations = 100000;
  // Stop after this many consecutive generations that produced no unmeasured
  // sequence (only cache hits cost nothing, so the budget would never expire).
  std::size_t stall_generations = 200;
  std::vector<Sequence> initial_population;  // empty: random

  void validate(std::size_t n) const {
    if (population < 2) throw ConfigError("ga: population must be at least 2");
    if (tournament < 1) throw ConfigError("ga: tournament must be at least 1");
    if (crossover_rate < 0.0 || crossover_rate > 1.0) throw ConfigError("ga: crossover_rate must be in [0,1]");
    if (mutation_rate && (*mutation_rate < 0.0 || *mutation_rate > 1.0))
      throw ConfigError("ga: mutation_rate must be in [0,1]");
    if (elitism >= population) throw ConfigError("ga: elitism must be smaller than population");
    for (const auto& s : initial_population)
      if (s.size() != n) throw ConfigError("ga: initial individual has wrong width");
    if (!initial_population.empty() && initial_population.size() != population)
      throw ConfigError("ga: initial population size must equal population");
  }
};

// Generational GA on bit strings minimizing measured time: tournament
// selection, uniform crossover, per-bit mutation and elitism.
inline TuningResult ga_tune(Evaluator& ev, const GaParams& params, Rng& rng) {
  const auto n = ev.width();
  params.validate(n);
  const double mutation = params.mutation_rate.value_or(1.0 / static_cast<double>(n));

  struct Individual {
    Sequence genes;
    double fitness;
  };

  // Measures every individual; false when the budget ran out first.
  std::size_t fresh = 0;
  auto evaluate = [&](const std::vector<Sequence>& genes, std::vector<Individual>& into) {
    for (const auto& g : genes) {
      if (!ev.cached(g)) {
        if (ev.exhausted()) return false;
        ++fresh;
      }
      into.push_back({g, ev.measure(g, "ga").exec_time_s});
    }
    return true;
  };

  std::vector<Sequence> genes = params.initial_population;
  while (genes.size() < params.population) genes.push_back(random_sequence(rng, n));
  std::vector<Individual> pop;
  if (!evaluate(genes, pop)) return make_result(ev, "ga");

  auto tournament = [&]() -> const Individual& {
    const Individual* winner = &pop[rng.below(pop.size())];
    for (std::size_t k = 1; k < params.tournament; ++k) {
      const Individual* other = &pop[rng.below(pop.size())];
      if (other->fitness < winner->fitness) winner = other;
    }
    return *winner;
  };

  std::size_t stall = 0;
  for (std::size_t gen = 0; gen < params.max_generations; ++gen) {
    std::stable_sort(pop.begin(), pop.end(), [](const auto& a, const auto& b) { return a.fitness < b.fitness; });
    std::vector<Individual> next(pop.begin(), pop.begin() + static_cast<std::ptrdiff_t>(params.elitism));

    std::vector<Sequence> children;
    while (next.size() + children.size() < params.population) {
      const auto& a = tournament();
      const auto& b = tournament();
      Sequence child = a.genes;
      if (rng.uniform01() < params.crossover_rate)
        for (std::size_t j = 0; j < n; ++j)
          if (rng.coin()) child.set(j, b.genes[j]);
      for (std::size_t j = 0; j < n; ++j)
        if (rng.uniform01() < mutation) child.flip(j);
      children.push_back(std::move(child));
    }

    const auto before = fresh;
    const bool complete = evaluate(children, next);
    pop = std::move(next);
    if (!complete) break;
    stall = fresh == before ? stall + 1 : 0;
    if (stall >= params.stall_generations) break;
  }
  return make_result(ev, "ga");
}

}  // namespace flagtune
