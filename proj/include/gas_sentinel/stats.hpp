#pragma once

#include "gas_sentinel/trainer_spec.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gas_sentinel {

/// Final SSE of a set of independent runs of one trainer.
struct SseSample {
  std::string label;
  std::vector<double> values;

  /// Throws ArgumentError when empty, negative or non-finite.
  void validate() const;
};

enum class KsDecision { indistinguishable, x_succeeds_y, x_precedes_y };

std::string to_string(KsDecision decision);

struct KsOutcome {
  double d_plus = 0.0;   // max (F_X - F_Y)
  double d_minus = 0.0;  // max (F_Y - F_X)
  double d = 0.0;
  double k_alpha = 0.0;
  KsDecision decision = KsDecision::indistinguishable;
};

/// Two-sample Kolmogorov-Smirnov test. The empirical cdfs count values <= t
/// and are compared at every distinct pooled value. When d > k_alpha, X
/// succeeds Y if d_plus >= d_minus, i.e. X is stochastically smaller.
KsOutcome ks_two_sample(const SseSample& x, const SseSample& y, double alpha);

/// Large-sample critical value c(alpha) * sqrt((n + m) / (n m)) for
/// alpha in {0.01, 0.05, 0.10}.
double critical_value(std::size_t n, std::size_t m, double alpha);

/// Final SSE of run_count runs seeded base_seed, base_seed + 1, ... in seed
/// order. Runs go in parallel up to the worker limit, each single-threaded.
/// A failing run's error is rethrown with the seed prefixed, still an
/// ArgumentError when it was one.
SseSample collect_sse_samples(const TrainerSpec& spec, std::span<const TrainingPattern> patterns,
                              std::size_t run_count, std::uint64_t base_seed);

/// Runs `jobs` independent tasks on up to worker_limit() threads. The first
/// exception (lowest index) is rethrown after every task has finished.
void run_indexed(std::size_t jobs, const std::function<void(std::size_t)>& task);

}  // namespace gas_sentinel
