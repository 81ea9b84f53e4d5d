#pragma once

#include "gas_sentinel/network.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gas_sentinel {

enum class Termination {
  target_reached,
  budget_exhausted,
  // CG only: the gradient vanished before any step could be taken.
  stationary_point,
};

std::string to_string(Termination t);
Termination termination_from_string(const std::string& text);

/// Result of any trainer. `sse` holds one entry per epoch / iteration /
/// generation, and the last entry equals sse(final_network, patterns).
struct TrainingTrace {
  std::vector<double> sse;
  std::size_t epochs_run = 0;
  Termination terminated_by = Termination::budget_exhausted;
  std::optional<Network> final_network;
  /// Full-dataset SSE evaluations spent. For population trainers this is
  /// generations * population size.
  std::uint64_t sse_evaluations = 0;
  /// Population or swarm size; 1 for single-point trainers.
  std::size_t population = 1;

  double final_sse() const { return sse.back(); }
  const Network& network() const { return *final_network; }
};

}  // namespace gas_sentinel
