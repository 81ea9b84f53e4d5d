#include "gas_sentinel/errors.hpp"
#include "gas_sentinel/trainers.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace gas_sentinel {

void PsoParams::validate() const {
  if (swarm_size < 1) throw ConfigError("PSO swarm size must be >= 1");
  if (iterations < 1) throw ConfigError("PSO iterations must be >= 1");
  if (!(inertia >= 0.0 && inertia <= 1.0)) throw ConfigError("PSO inertia must lie in [0, 1]");
  if (!(cognitive > 0.0) || !(social > 0.0)) {
    throw ConfigError("PSO acceleration constants must be > 0");
  }
  if (!(velocity_clamp > 0.0)) throw ConfigError("PSO velocity clamp must be > 0");
  if (!(chi_low <= chi_high)) throw ConfigError("PSO initial range is empty");
}

TrainingTrace train_pso(const NetworkConfig& config, std::span<const TrainingPattern> patterns,
                        const PsoParams& params, std::optional<SwarmState> initial_swarm) {
  params.validate();
  config.validate();
  if (patterns.empty()) throw ArgumentError("training needs at least one pattern");

  const std::size_t q = params.swarm_size;
  const std::size_t m = config.weight_count();
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SwarmState swarm;
  if (initial_swarm) {
    swarm = std::move(*initial_swarm);
    if (swarm.positions.size() != q || swarm.velocities.size() != q) {
      throw ShapeError("initial swarm has the wrong size");
    }
    for (std::size_t i = 0; i < q; ++i) {
      if (swarm.positions[i].size() != m || swarm.velocities[i].size() != m) {
        throw ShapeError("initial particle has the wrong dimension");
      }
    }
  } else {
    std::uniform_real_distribution<double> init(params.chi_low, params.chi_high);
    swarm.positions.assign(q, std::vector<double>(m));
    swarm.velocities.assign(q, std::vector<double>(m, 0.0));
    for (auto& p : swarm.positions) {
      for (double& x : p) x = params.chi_low == params.chi_high ? params.chi_low : init(rng);
    }
  }

  std::vector<std::vector<double>> personal_best = swarm.positions;
  std::vector<double> personal_best_sse(q, std::numeric_limits<double>::infinity());
  std::vector<double> current(q);
  std::size_t global = 0;

  TrainingTrace trace;
  trace.population = q;

  for (std::size_t it = 1; it <= params.iterations; ++it) {
    kernels::population_sse(params.execution, config, swarm.positions, patterns, current);
    trace.sse_evaluations += q;
    for (std::size_t i = 0; i < q; ++i) {
      if (current[i] < personal_best_sse[i]) {
        personal_best_sse[i] = current[i];
        personal_best[i] = swarm.positions[i];
      }
    }
    global = static_cast<std::size_t>(
        std::min_element(personal_best_sse.begin(), personal_best_sse.end()) -
        personal_best_sse.begin());
    trace.sse.push_back(personal_best_sse[global]);
    trace.epochs_run = it;
    if (it == params.iterations) break;

    const auto& g = personal_best[global];
    for (std::size_t i = 0; i < q; ++i) {
      auto& x = swarm.positions[i];
      auto& v = swarm.velocities[i];
      const auto& p = personal_best[i];
      for (std::size_t k = 0; k < m; ++k) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        double vk = params.inertia * v[k] + params.cognitive * r1 * (p[k] - x[k]) +
                    params.social * r2 * (g[k] - x[k]);
        vk = std::clamp(vk, -params.velocity_clamp, params.velocity_clamp);
        v[k] = vk;
        x[k] += vk;
      }
    }
  }

  trace.terminated_by = Termination::budget_exhausted;
  trace.final_network = Network(config, personal_best[global]);
  return trace;
}

}  // namespace gas_sentinel
