#pragma once

#include "gas_sentinel/kernels.hpp"
#include "gas_sentinel/network.hpp"
#include "gas_sentinel/training.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gas_sentinel {

enum class TrainingMode { sequential, batch };

std::string to_string(TrainingMode mode);
TrainingMode training_mode_from_string(const std::string& text);

struct BpParams {
  double eta = 0.5;   // learning rate
  double beta = 0.1;  // momentum factor
  TrainingMode mode = TrainingMode::batch;
  std::size_t max_epochs = 1000;
  double target_sse = 0.0;
  std::uint64_t seed = 0;  // pattern shuffle seed, sequential mode only
  kernels::Execution execution = kernels::Execution::serial;

  /// eta > 0, beta in [0, 1), max_epochs >= 1, target_sse >= 0.
  void validate() const;
};

/// Per-neuron scratch for one backward pass.
struct BackpropScratch {
  Activations activations;
  std::vector<std::vector<double>> deltas;  // local gradients, per layer
};

/// Mutable state carried across updates of one training run.
struct BackpropWorkspace {
  explicit BackpropWorkspace(const NetworkConfig& config);

  BackpropScratch scratch;
  std::vector<double> errors;           // e_j = t_j - o_j of the last pattern
  std::vector<double> gradient;         // aligned with the flat weight vector
  std::vector<double> previous_update;  // delta W of the last step
};

/// Descent direction for one pattern, -dE_p/dw, with E_p the pattern's SSE.
/// Output deltas are e_j * y_j (1 - y_j) with e_j = t_j - o_j; hidden deltas
/// are y_j (1 - y_j) * sum_k delta_k w_kj. Entry for weight w_ji is
/// delta_j * y_i (y_i = 1 for biases).
std::vector<double> backprop_gradient(const Network& network, const TrainingPattern& pattern);

/// Writes the descent direction into `out`, or adds it when `accumulate`.
/// When `errors` is non-null it receives e_j for the pattern.
void backprop_gradient_into(const NetworkConfig& config, std::span<const double> weights,
                            const TrainingPattern& pattern, BackpropScratch& scratch,
                            std::span<double> out, bool accumulate,
                            std::vector<double>* errors = nullptr);

/// delta W = eta * gradient + beta * previous delta W; W += delta W. The new
/// delta W replaces workspace.previous_update.
void apply_update(Network& network, std::span<const double> gradient,
                  BackpropWorkspace& workspace, const BpParams& params);

/// Backpropagation in sequential (per-pattern, shuffled each epoch) or batch
/// (summed gradient, one update per epoch) mode. Stops once an end-of-epoch
/// SSE is <= target_sse or after max_epochs.
TrainingTrace train_bp(Network network, std::span<const TrainingPattern> patterns,
                       const BpParams& params);

}  // namespace gas_sentinel
