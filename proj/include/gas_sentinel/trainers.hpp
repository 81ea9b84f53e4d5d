#pragma once

// Conjugate-gradient, genetic-algorithm and particle-swarm trainers. All of
// them search the same flat weight vector that backpropagation trains and
// minimise the same full-batch SSE.

#include "gas_sentinel/kernels.hpp"
#include "gas_sentinel/network.hpp"
#include "gas_sentinel/training.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gas_sentinel {

/// Differentiable objective over a flat parameter vector.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dimension() const = 0;
  virtual double value(std::span<const double> x) = 0;
  /// Returns f(x) and writes df/dx into `grad`.
  virtual double value_and_gradient(std::span<const double> x, std::span<double> grad) = 0;
};

/// Full-batch SSE of a network, as a function of its weights.
class SseObjective final : public Objective {
 public:
  SseObjective(NetworkConfig config, std::span<const TrainingPattern> patterns,
               kernels::Execution execution = kernels::Execution::serial);

  std::size_t dimension() const override { return config_.weight_count(); }
  double value(std::span<const double> x) override;
  double value_and_gradient(std::span<const double> x, std::span<double> grad) override;

 private:
  NetworkConfig config_;
  std::span<const TrainingPattern> patterns_;
  kernels::Execution execution_;
};

struct CgParams {
  std::size_t max_iterations = 1000;
  std::size_t restart_interval = 50;
  double target_sse = 0.0;
  /// Stop once this many objective evaluations are spent; 0 = no cap.
  std::uint64_t max_evaluations = 0;
  /// Armijo sufficient-decrease constant.
  double armijo_c = 1e-4;
  /// Cap on step halvings per line search.
  std::size_t max_backtracks = 40;
  /// Gradient infinity norm at or below which the start is stationary.
  double gradient_tolerance = 1e-12;
  kernels::Execution execution = kernels::Execution::serial;

  void validate() const;
};

struct CgResult {
  std::vector<double> x;
  std::vector<double> values;  // objective after each iteration
  std::uint64_t evaluations = 0;
  Termination terminated_by = Termination::budget_exhausted;
};

/// Polak-Ribiere nonlinear conjugate gradient with an Armijo backtracking
/// line search. Each line search starts from the minimiser of a parabola
/// through f(0), f'(0) and one probe point, then halves until the Armijo
/// condition holds. The direction falls back to steepest descent every
/// restart_interval iterations and whenever it stops being a descent
/// direction.
CgResult minimize_cg(Objective& objective, std::vector<double> start, const CgParams& params);

TrainingTrace train_cg(Network network, std::span<const TrainingPattern> patterns,
                       const CgParams& params);

struct GaParams {
  std::size_t population_size = 30;
  std::size_t generations = 500;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;
  double mutation_sigma = 0.1;
  std::size_t tournament_size = 3;
  std::size_t elitism_count = 1;
  double chi_low = -1.5;
  double chi_high = 1.5;
  std::uint64_t seed = 0;
  kernels::Execution execution = kernels::Execution::parallel;

  void validate() const;
};

/// Real-coded GA: tournament selection, arithmetic crossover, additive
/// Gaussian mutation and elitism. Fitness is -SSE. The trace holds the best
/// SSE of each evaluated generation.
///
/// `initial_population`, when given, replaces the uniform draw from
/// [chi_low, chi_high] and must hold population_size vectors.
TrainingTrace train_ga(const NetworkConfig& config, std::span<const TrainingPattern> patterns,
                       const GaParams& params,
                       std::optional<std::vector<std::vector<double>>> initial_population = {});

struct PsoParams {
  std::size_t swarm_size = 30;
  std::size_t iterations = 1000;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  double velocity_clamp = 0.5;
  double chi_low = -1.5;
  double chi_high = 1.5;
  std::uint64_t seed = 0;
  kernels::Execution execution = kernels::Execution::parallel;

  void validate() const;
};

struct SwarmState {
  std::vector<std::vector<double>> positions;
  std::vector<std::vector<double>> velocities;
};

/// Global-best PSO. Velocities start at zero unless `initial_swarm` says
/// otherwise; positions start uniform in [chi_low, chi_high]. The trace
/// holds the global-best SSE after each iteration.
TrainingTrace train_pso(const NetworkConfig& config, std::span<const TrainingPattern> patterns,
                        const PsoParams& params, std::optional<SwarmState> initial_swarm = {});

}  // namespace gas_sentinel
