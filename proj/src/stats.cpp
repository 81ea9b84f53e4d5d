#include "gas_sentinel/stats.hpp"

#include "gas_sentinel/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>

namespace gas_sentinel {

void SseSample::validate() const {
  if (values.empty()) throw ArgumentError("SSE sample '" + label + "' is empty");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ArgumentError("SSE sample '" + label + "' holds a negative or non-finite value");
    }
  }
}

std::string to_string(KsDecision decision) {
  switch (decision) {
    case KsDecision::indistinguishable: return "indistinguishable";
    case KsDecision::x_succeeds_y: return "x_succeeds_y";
    case KsDecision::x_precedes_y: return "x_precedes_y";
  }
  return "?";
}

double critical_value(std::size_t n, std::size_t m, double alpha) {
  if (n < 1 || m < 1) throw ArgumentError("KS sample sizes must be >= 1");
  struct Level {
    double alpha;
    double c;
  };
  static constexpr Level kLevels[] = {{0.01, 1.63}, {0.05, 1.36}, {0.10, 1.22}};
  for (const auto& level : kLevels) {
    if (std::abs(alpha - level.alpha) < 1e-12) {
      const double nn = static_cast<double>(n);
      const double mm = static_cast<double>(m);
      return level.c * std::sqrt((nn + mm) / (nn * mm));
    }
  }
  throw ArgumentError("unsupported KS alpha " + format_double(alpha) +
                      " (supported: 0.01, 0.05, 0.10)");
}

KsOutcome ks_two_sample(const SseSample& x, const SseSample& y, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("KS alpha must lie in (0, 1)");
  x.validate();
  y.validate();
  std::vector<double> xs = x.values;
  std::vector<double> ys = y.values;
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  std::vector<double> pooled(xs);
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  const double n = static_cast<double>(xs.size());
  const double m = static_cast<double>(ys.size());
  KsOutcome out;
  for (double t : pooled) {
    const double fx = static_cast<double>(std::upper_bound(xs.begin(), xs.end(), t) - xs.begin()) / n;
    const double fy = static_cast<double>(std::upper_bound(ys.begin(), ys.end(), t) - ys.begin()) / m;
    out.d_plus = std::max(out.d_plus, fx - fy);
    out.d_minus = std::max(out.d_minus, fy - fx);
  }
  out.d = std::max(out.d_plus, out.d_minus);
  out.k_alpha = critical_value(xs.size(), ys.size(), alpha);
  if (out.d <= out.k_alpha) {
    out.decision = KsDecision::indistinguishable;
  } else {
    out.decision = out.d_plus >= out.d_minus ? KsDecision::x_succeeds_y : KsDecision::x_precedes_y;
  }
  return out;
}

void run_indexed(std::size_t jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> failures(jobs);
  const long count = static_cast<long>(jobs);
#pragma omp parallel for schedule(dynamic, 1) num_threads(kernels::worker_limit())
  for (long i = 0; i < count; ++i) {
    try {
      task(static_cast<std::size_t>(i));
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

SseSample collect_sse_samples(const TrainerSpec& spec, std::span<const TrainingPattern> patterns,
                              std::size_t run_count, std::uint64_t base_seed) {
  if (run_count < 1) throw ArgumentError("run count must be >= 1");
  spec.validate();
  TrainerSpec single = spec;
  single.bp.execution = kernels::Execution::serial;
  single.cg.execution = kernels::Execution::serial;
  single.ga.execution = kernels::Execution::serial;
  single.pso.execution = kernels::Execution::serial;

  SseSample sample;
  sample.label = to_string(spec.kind);
  sample.values.assign(run_count, 0.0);
  run_indexed(run_count, [&](std::size_t i) {
    const std::uint64_t seed = base_seed + i;
    try {
      sample.values[i] = run_trainer(single, patterns, seed).final_sse();
    } catch (const ArgumentError& e) {
      throw ArgumentError("run with seed " + std::to_string(seed) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error("run with seed " + std::to_string(seed) + ": " + e.what());
    }
  });
  return sample;
}

}  // namespace gas_sentinel
