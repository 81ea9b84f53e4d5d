#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version; the OpenMP versions write per-item results into buffers and
// reduce them in item order, so both produce bit-identical output.

#include "gas_sentinel/network.hpp"

#include <span>
#include <string>
#include <vector>

namespace gas_sentinel::kernels {

enum class Execution { serial, parallel };

std::string to_string(Execution e);

namespace serial {

/// Sum over patterns of the per-pattern descent direction.
void batch_gradient(const NetworkConfig& config, std::span<const double> weights,
                    std::span<const TrainingPattern> patterns, std::span<double> out);

/// SSE of one weight vector over the patterns.
double dataset_sse(const NetworkConfig& config, std::span<const double> weights,
                   std::span<const TrainingPattern> patterns);

/// SSE of every member of a population of weight vectors.
void population_sse(const NetworkConfig& config, std::span<const std::vector<double>> population,
                    std::span<const TrainingPattern> patterns, std::span<double> out);

}  // namespace serial

namespace omp {

void batch_gradient(const NetworkConfig& config, std::span<const double> weights,
                    std::span<const TrainingPattern> patterns, std::span<double> out);

double dataset_sse(const NetworkConfig& config, std::span<const double> weights,
                   std::span<const TrainingPattern> patterns);

void population_sse(const NetworkConfig& config, std::span<const std::vector<double>> population,
                    std::span<const TrainingPattern> patterns, std::span<double> out);

}  // namespace omp

void batch_gradient(Execution e, const NetworkConfig& config, std::span<const double> weights,
                    std::span<const TrainingPattern> patterns, std::span<double> out);
double dataset_sse(Execution e, const NetworkConfig& config, std::span<const double> weights,
                   std::span<const TrainingPattern> patterns);
void population_sse(Execution e, const NetworkConfig& config,
                    std::span<const std::vector<double>> population,
                    std::span<const TrainingPattern> patterns, std::span<double> out);

/// Worker cap from GAS_SENTINEL_WORKERS, else the OpenMP default.
int worker_limit();

}  // namespace gas_sentinel::kernels
