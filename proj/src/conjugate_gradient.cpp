#include "gas_sentinel/errors.hpp"
#include "gas_sentinel/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gas_sentinel {

SseObjective::SseObjective(NetworkConfig config, std::span<const TrainingPattern> patterns,
                           kernels::Execution execution)
    : config_(std::move(config)), patterns_(patterns), execution_(execution) {
  config_.validate();
  if (patterns_.empty()) throw ArgumentError("training needs at least one pattern");
}

double SseObjective::value(std::span<const double> x) {
  return kernels::dataset_sse(execution_, config_, x, patterns_);
}

double SseObjective::value_and_gradient(std::span<const double> x, std::span<double> grad) {
  kernels::batch_gradient(execution_, config_, x, patterns_, grad);
  // batch_gradient yields the descent direction; the objective gradient is its negation.
  for (double& g : grad) g = -g;
  return kernels::dataset_sse(execution_, config_, x, patterns_);
}

void CgParams::validate() const {
  if (max_iterations < 1) throw ConfigError("CG max_iterations must be >= 1");
  if (restart_interval < 1) throw ConfigError("CG restart_interval must be >= 1");
  if (!(target_sse >= 0.0)) throw ConfigError("CG target SSE must be >= 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ConfigError("Armijo constant must lie in (0, 1)");
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void step(std::span<const double> x, std::span<const double> d, double alpha,
          std::vector<double>& out) {
  out.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + alpha * d[i];
}

}  // namespace

CgResult minimize_cg(Objective& objective, std::vector<double> start, const CgParams& params) {
  params.validate();
  const std::size_t n = objective.dimension();
  if (start.size() != n) throw ShapeError("CG start point has wrong dimension");

  CgResult result;
  auto budget_left = [&](std::uint64_t needed) {
    return params.max_evaluations == 0 || result.evaluations + needed <= params.max_evaluations;
  };

  std::vector<double> x = std::move(start);
  std::vector<double> g(n), g_trial(n), d(n), x_trial(n), x_probe(n);
  if (!budget_left(1)) throw ConfigError("CG evaluation budget too small to start");
  double f = objective.value_and_gradient(x, g);
  ++result.evaluations;

  if (inf_norm(g) <= params.gradient_tolerance) {
    result.values.push_back(f);
    result.terminated_by = Termination::stationary_point;
    result.x = std::move(x);
    return result;
  }

  std::vector<double> g_prev(n);
  double last_alpha = 0.0;
  result.terminated_by = Termination::budget_exhausted;

  for (std::size_t it = 0; it < params.max_iterations; ++it) {
    // Search direction.
    bool steepest = (it % params.restart_interval) == 0;
    if (!steepest) {
      const double denom = dot(g_prev, g_prev);
      double beta = 0.0;
      if (denom > 0.0) {
        double num = 0.0;
        for (std::size_t i = 0; i < n; ++i) num += g[i] * (g[i] - g_prev[i]);
        beta = num / denom;
      }
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i] + beta * d[i];
      if (dot(g, d) >= 0.0) steepest = true;
    }
    if (steepest) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    }

    const double slope = dot(g, d);
    if (!(slope < 0.0)) {
      result.terminated_by = Termination::stationary_point;
      break;
    }

    // Trial step from a parabola through f(0), f'(0) and f(probe).
    const double d_norm = inf_norm(d);
    double probe = last_alpha > 0.0 ? last_alpha : std::min(1.0, 1.0 / d_norm);
    if (!budget_left(2)) break;
    step(x, d, probe, x_probe);
    const double f_probe = objective.value(x_probe);
    ++result.evaluations;
    const double curvature = (f_probe - f - slope * probe) / (probe * probe);
    double alpha = curvature > 0.0 ? -slope / (2.0 * curvature) : 2.0 * probe;
    if (!std::isfinite(alpha) || alpha <= 0.0) alpha = probe;

    bool accepted = false;
    double f_trial = 0.0;
    for (std::size_t bt = 0; bt <= params.max_backtracks; ++bt) {
      if (!budget_left(1)) break;
      step(x, d, alpha, x_trial);
      f_trial = objective.value_and_gradient(x_trial, g_trial);
      ++result.evaluations;
      if (std::isfinite(f_trial) && f_trial <= f + params.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!budget_left(1)) break;
      // No sufficient decrease even along steepest descent: treat as converged.
      result.terminated_by = Termination::stationary_point;
      if (result.values.empty()) result.values.push_back(f);
      break;
    }

    last_alpha = alpha;
    g_prev.swap(g);
    g.swap(g_trial);
    x.swap(x_trial);
    f = f_trial;
    result.values.push_back(f);

    if (f <= params.target_sse) {
      result.terminated_by = Termination::target_reached;
      break;
    }
    if (inf_norm(g) <= params.gradient_tolerance) {
      result.terminated_by = Termination::stationary_point;
      break;
    }
  }

  if (result.values.empty()) result.values.push_back(f);
  result.x = std::move(x);
  return result;
}

TrainingTrace train_cg(Network network, std::span<const TrainingPattern> patterns,
                       const CgParams& params) {
  if (patterns.empty()) throw ArgumentError("training needs at least one pattern");
  SseObjective objective(network.config(), patterns, params.execution);
  const std::span<const double> w = network.weights();
  CgResult r = minimize_cg(objective, std::vector<double>(w.begin(), w.end()), params);

  TrainingTrace trace;
  trace.sse = std::move(r.values);
  trace.epochs_run = trace.sse.size();
  trace.terminated_by = r.terminated_by;
  trace.sse_evaluations = r.evaluations;
  trace.final_network = Network(network.config(), std::move(r.x));
  return trace;
}

}  // namespace gas_sentinel
