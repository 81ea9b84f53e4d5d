#include "gas_sentinel/backprop.hpp"

#include "gas_sentinel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace gas_sentinel {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::target_reached: return "target_reached";
    case Termination::budget_exhausted: return "budget_exhausted";
    case Termination::stationary_point: return "stationary_point";
  }
  return "unknown";
}

Termination termination_from_string(const std::string& text) {
  if (text == "target_reached") return Termination::target_reached;
  if (text == "budget_exhausted") return Termination::budget_exhausted;
  if (text == "stationary_point") return Termination::stationary_point;
  throw ParseError("unknown termination '" + text + "'");
}

std::string to_string(TrainingMode mode) {
  return mode == TrainingMode::batch ? "batch" : "sequential";
}

TrainingMode training_mode_from_string(const std::string& text) {
  if (text == "batch") return TrainingMode::batch;
  if (text == "sequential" || text == "seq") return TrainingMode::sequential;
  throw ArgumentError("unknown training mode '" + text + "' (expected batch or sequential)");
}

void BpParams::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("learning rate must be > 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(target_sse >= 0.0)) throw ConfigError("target SSE must be >= 0");
}

BackpropWorkspace::BackpropWorkspace(const NetworkConfig& config)
    : errors(config.output_size(), 0.0),
      gradient(config.weight_count(), 0.0),
      previous_update(config.weight_count(), 0.0) {}

void backprop_gradient_into(const NetworkConfig& config, std::span<const double> weights,
                            const TrainingPattern& pattern, BackpropScratch& scratch,
                            std::span<double> out, bool accumulate,
                            std::vector<double>* errors) {
  const auto& sizes = config.layer_sizes;
  if (config.output_size() != kGasCount || config.input_size() != kGasCount) {
    throw ShapeError("network " + config.to_string() + " does not match 5-gas patterns");
  }
  if (out.size() != config.weight_count()) {
    throw ShapeError("gradient buffer has " + std::to_string(out.size()) + " entries, expected " +
                     std::to_string(config.weight_count()));
  }
  forward_into(config, weights, pattern.input, scratch.activations);
  const auto& y = scratch.activations.post;
  const std::size_t last = sizes.size() - 1;

  auto& deltas = scratch.deltas;
  deltas.resize(sizes.size());
  for (std::size_t l = 1; l < sizes.size(); ++l) deltas[l].resize(sizes[l]);

  if (errors) errors->resize(kGasCount);
  for (std::size_t j = 0; j < sizes[last]; ++j) {
    const double out_j = y[last][j];
    const double e = pattern.target[j] - out_j;
    if (errors) (*errors)[j] = e;
    deltas[last][j] = e * out_j * (1.0 - out_j);
  }

  for (std::size_t l = last - 1; l >= 1; --l) {
    const std::size_t n_here = sizes[l];
    const std::size_t n_next = sizes[l + 1];
    const double* w_next = weights.data() + config.layer_offset(l + 1);
    for (std::size_t j = 0; j < n_here; ++j) {
      double back = 0.0;
      for (std::size_t k = 0; k < n_next; ++k) back += deltas[l + 1][k] * w_next[k * (n_here + 1) + j];
      deltas[l][j] = y[l][j] * (1.0 - y[l][j]) * back;
    }
  }

  double* g = out.data();
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    const std::size_t n_in = sizes[l - 1];
    for (std::size_t j = 0; j < sizes[l]; ++j) {
      const double d = deltas[l][j];
      if (accumulate) {
        for (std::size_t i = 0; i < n_in; ++i) g[i] += d * y[l - 1][i];
        g[n_in] += d;
      } else {
        for (std::size_t i = 0; i < n_in; ++i) g[i] = d * y[l - 1][i];
        g[n_in] = d;
      }
      g += n_in + 1;
    }
  }
}

std::vector<double> backprop_gradient(const Network& network, const TrainingPattern& pattern) {
  std::vector<double> out(network.weight_count());
  BackpropScratch scratch;
  backprop_gradient_into(network.config(), network.weights(), pattern, scratch, out, false);
  return out;
}

void apply_update(Network& network, std::span<const double> gradient,
                  BackpropWorkspace& workspace, const BpParams& params) {
  auto w = network.mutable_weights();
  auto& prev = workspace.previous_update;
  if (gradient.size() != w.size() || prev.size() != w.size()) {
    throw ShapeError("update vectors do not match weight count " + std::to_string(w.size()));
  }
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double delta = params.eta * gradient[k] + params.beta * prev[k];
    w[k] += delta;
    prev[k] = delta;
  }
}

namespace {

void check_finite(const Network& network, std::size_t epoch) {
  for (double w : network.weights()) {
    if (!std::isfinite(w)) {
      throw RangeError("weights became non-finite at epoch " + std::to_string(epoch));
    }
  }
}

}  // namespace

TrainingTrace train_bp(Network network, std::span<const TrainingPattern> patterns,
                       const BpParams& params) {
  params.validate();
  if (patterns.empty()) throw ArgumentError("training needs at least one pattern");

  const NetworkConfig config = network.config();
  BackpropWorkspace ws(config);
  std::mt19937_64 rng(params.seed);
  std::vector<std::size_t> order(patterns.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainingTrace trace;
  trace.sse.reserve(std::min<std::size_t>(params.max_epochs, 1u << 16));
  trace.terminated_by = Termination::budget_exhausted;

  for (std::size_t epoch = 1; epoch <= params.max_epochs; ++epoch) {
    if (params.mode == TrainingMode::batch) {
      kernels::batch_gradient(params.execution, config, network.weights(), patterns, ws.gradient);
      apply_update(network, ws.gradient, ws, params);
    } else {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t idx : order) {
        backprop_gradient_into(config, network.weights(), patterns[idx], ws.scratch, ws.gradient,
                               false, &ws.errors);
        apply_update(network, ws.gradient, ws, params);
      }
    }
    check_finite(network, epoch);

    const double e = kernels::dataset_sse(params.execution, config, network.weights(), patterns);
    trace.sse.push_back(e);
    ++trace.sse_evaluations;
    trace.epochs_run = epoch;
    if (e <= params.target_sse) {
      trace.terminated_by = Termination::target_reached;
      break;
    }
  }
  trace.final_network = std::move(network);
  return trace;
}

}  // namespace gas_sentinel
