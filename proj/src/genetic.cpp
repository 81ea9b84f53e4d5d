#include "gas_sentinel/errors.hpp"
#include "gas_sentinel/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace gas_sentinel {

void GaParams::validate() const {
  if (population_size < 1) throw ConfigError("GA population size must be >= 1");
  if (generations < 1) throw ConfigError("GA generations must be >= 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw ConfigError("GA crossover rate must lie in [0, 1]");
  }
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
    throw ConfigError("GA mutation rate must lie in [0, 1]");
  }
  if (!(mutation_sigma > 0.0)) throw ConfigError("GA mutation sigma must be > 0");
  if (tournament_size < 2) throw ConfigError("GA tournament size must be >= 2");
  if (elitism_count >= population_size) {
    throw ConfigError("GA elitism count must be smaller than the population");
  }
  if (!(chi_low <= chi_high)) throw ConfigError("GA initial range is empty");
}

TrainingTrace train_ga(const NetworkConfig& config, std::span<const TrainingPattern> patterns,
                       const GaParams& params,
                       std::optional<std::vector<std::vector<double>>> initial_population) {
  params.validate();
  config.validate();
  if (patterns.empty()) throw ArgumentError("training needs at least one pattern");

  const std::size_t q = params.population_size;
  const std::size_t m = config.weight_count();
  std::mt19937_64 rng(params.seed);

  std::vector<std::vector<double>> population;
  if (initial_population) {
    population = std::move(*initial_population);
    if (population.size() != q) throw ShapeError("initial population has the wrong size");
    for (const auto& c : population) {
      if (c.size() != m) throw ShapeError("initial chromosome has the wrong length");
    }
  } else {
    std::uniform_real_distribution<double> init(params.chi_low, params.chi_high);
    population.assign(q, std::vector<double>(m));
    for (auto& c : population) {
      for (double& gene : c) gene = params.chi_low == params.chi_high ? params.chi_low : init(rng);
    }
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, q - 1);
  std::normal_distribution<double> noise(0.0, params.mutation_sigma);

  std::vector<double> fitness(q);
  std::vector<std::size_t> rank(q);
  std::vector<std::vector<double>> next;
  next.reserve(q);

  TrainingTrace trace;
  trace.population = q;
  std::size_t best = 0;

  for (std::size_t gen = 1; gen <= params.generations; ++gen) {
    kernels::population_sse(params.execution, config, population, patterns, fitness);
    trace.sse_evaluations += q;

    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
    best = rank.front();
    trace.sse.push_back(fitness[best]);
    trace.epochs_run = gen;
    if (gen == params.generations) break;

    auto tournament = [&]() -> const std::vector<double>& {
      std::size_t winner = pick(rng);
      for (std::size_t t = 1; t < params.tournament_size; ++t) {
        const std::size_t challenger = pick(rng);
        if (fitness[challenger] < fitness[winner]) winner = challenger;
      }
      return population[winner];
    };

    next.clear();
    for (std::size_t e = 0; e < params.elitism_count; ++e) next.push_back(population[rank[e]]);
    while (next.size() < q) {
      const auto& a = tournament();
      const auto& b = tournament();
      std::vector<double> child = b;
      if (unit(rng) < params.crossover_rate) {
        // Written as b + w (a - b) so identical parents give back the parent exactly.
        const double w = unit(rng);
        for (std::size_t k = 0; k < m; ++k) child[k] = b[k] + w * (a[k] - b[k]);
      }
      if (params.mutation_rate > 0.0) {
        for (double& gene : child) {
          if (unit(rng) < params.mutation_rate) gene += noise(rng);
        }
      }
      next.push_back(std::move(child));
    }
    population.swap(next);
  }

  trace.terminated_by = Termination::budget_exhausted;
  trace.final_network = Network(config, population[best]);
  return trace;
}

}  // namespace gas_sentinel
