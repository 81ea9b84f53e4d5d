#include "gas_sentinel/kernels.hpp"

#include "gas_sentinel/backprop.hpp"
#include "gas_sentinel/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>

namespace gas_sentinel::kernels {

std::string to_string(Execution e) {
  return e == Execution::serial ? "serial" : "parallel";
}

int worker_limit() {
  if (const char* env = std::getenv("GAS_SENTINEL_WORKERS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<int>(value);
  }
  return std::max(1, omp_get_max_threads());
}

namespace {

void check_gradient_shapes(const NetworkConfig& config, std::span<const double> weights,
                           std::span<const TrainingPattern> patterns, std::span<double> out) {
  if (patterns.empty()) throw ArgumentError("batch gradient needs at least one pattern");
  if (weights.size() != config.weight_count() || out.size() != weights.size()) {
    throw ShapeError("gradient buffer does not match weight count " +
                     std::to_string(config.weight_count()));
  }
}

// Runs `body(i)` for i in [0, n) on up to worker_limit() threads and
// rethrows the first exception on the calling thread.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr failure;
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(worker_limit())
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(gas_sentinel_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

namespace serial {

void batch_gradient(const NetworkConfig& config, std::span<const double> weights,
                    std::span<const TrainingPattern> patterns, std::span<double> out) {
  check_gradient_shapes(config, weights, patterns, out);
  std::fill(out.begin(), out.end(), 0.0);
  BackpropScratch scratch;
  for (const auto& p : patterns) {
    backprop_gradient_into(config, weights, p, scratch, out, /*accumulate=*/true);
  }
}

double dataset_sse(const NetworkConfig& config, std::span<const double> weights,
                   std::span<const TrainingPattern> patterns) {
  return sse(config, weights, patterns);
}

void population_sse(const NetworkConfig& config, std::span<const std::vector<double>> population,
                    std::span<const TrainingPattern> patterns, std::span<double> out) {
  if (out.size() != population.size()) throw ShapeError("population output size mismatch");
  for (std::size_t i = 0; i < population.size(); ++i) {
    out[i] = sse(config, population[i], patterns);
  }
}

}  // namespace serial

namespace omp {

void batch_gradient(const NetworkConfig& config, std::span<const double> weights,
                    std::span<const TrainingPattern> patterns, std::span<double> out) {
  check_gradient_shapes(config, weights, patterns, out);
  const std::size_t m = weights.size();
  std::vector<double> per_pattern(patterns.size() * m);
  std::exception_ptr failure;
  const long count = static_cast<long>(patterns.size());
#pragma omp parallel num_threads(worker_limit())
  {
    BackpropScratch scratch;
#pragma omp for schedule(static)
    for (long p = 0; p < count; ++p) {
      try {
        std::span<double> row(per_pattern.data() + static_cast<std::size_t>(p) * m, m);
        backprop_gradient_into(config, weights, patterns[static_cast<std::size_t>(p)], scratch,
                               row, /*accumulate=*/false);
      } catch (...) {
#pragma omp critical(gas_sentinel_kernel_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  // Reduce in pattern order to match the serial accumulation exactly.
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    const double* row = per_pattern.data() + p * m;
    for (std::size_t k = 0; k < m; ++k) out[k] += row[k];
  }
}

double dataset_sse(const NetworkConfig& config, std::span<const double> weights,
                   std::span<const TrainingPattern> patterns) {
  if (patterns.empty()) throw ArgumentError("sse needs at least one pattern");
  std::vector<double> per_pattern(patterns.size());
  parallel_for(patterns.size(), [&](std::size_t p) {
    thread_local Activations scratch;
    per_pattern[p] = pattern_sse(config, weights, patterns[p], scratch);
  });
  double total = 0.0;
  for (double v : per_pattern) total += v;
  return total;
}

void population_sse(const NetworkConfig& config, std::span<const std::vector<double>> population,
                    std::span<const TrainingPattern> patterns, std::span<double> out) {
  if (out.size() != population.size()) throw ShapeError("population output size mismatch");
  parallel_for(population.size(),
               [&](std::size_t i) { out[i] = sse(config, population[i], patterns); });
}

}  // namespace omp

void batch_gradient(Execution e, const NetworkConfig& config, std::span<const double> weights,
                    std::span<const TrainingPattern> patterns, std::span<double> out) {
  if (e == Execution::parallel) {
    omp::batch_gradient(config, weights, patterns, out);
  } else {
    serial::batch_gradient(config, weights, patterns, out);
  }
}

double dataset_sse(Execution e, const NetworkConfig& config, std::span<const double> weights,
                   std::span<const TrainingPattern> patterns) {
  return e == Execution::parallel ? omp::dataset_sse(config, weights, patterns)
                                  : serial::dataset_sse(config, weights, patterns);
}

void population_sse(Execution e, const NetworkConfig& config,
                    std::span<const std::vector<double>> population,
                    std::span<const TrainingPattern> patterns, std::span<double> out) {
  if (e == Execution::parallel) {
    omp::population_sse(config, population, patterns, out);
  } else {
    serial::population_sse(config, population, patterns, out);
  }
}

}  // namespace gas_sentinel::kernels
