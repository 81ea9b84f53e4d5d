#include "gas_sentinel/network.hpp"

#include "gas_sentinel/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace gas_sentinel {

void NetworkConfig::validate() const {
  if (layer_sizes.size() < 3) {
    throw ConfigError("network needs at least 3 layers (input, hidden, output), got " +
                      std::to_string(layer_sizes.size()));
  }
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    if (layer_sizes[i] == 0) {
      throw ConfigError("layer " + std::to_string(i) + " has zero width");
    }
  }
}

std::size_t NetworkConfig::weight_count() const {
  std::size_t total = 0;
  for (std::size_t l = 1; l < layer_sizes.size(); ++l) {
    total += (layer_sizes[l - 1] + 1) * layer_sizes[l];
  }
  return total;
}

std::size_t NetworkConfig::layer_offset(std::size_t layer) const {
  std::size_t offset = 0;
  for (std::size_t l = 1; l < layer; ++l) {
    offset += (layer_sizes[l - 1] + 1) * layer_sizes[l];
  }
  return offset;
}

NetworkConfig NetworkConfig::uniform(std::size_t hidden_width, std::size_t hidden_layers) {
  NetworkConfig config;
  config.layer_sizes.push_back(kGasCount);
  for (std::size_t i = 0; i < hidden_layers; ++i) config.layer_sizes.push_back(hidden_width);
  config.layer_sizes.push_back(kGasCount);
  config.validate();
  return config;
}

std::string NetworkConfig::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    if (i > 0) out += '-';
    out += std::to_string(layer_sizes[i]);
  }
  return out;
}

NetworkConfig NetworkConfig::parse(const std::string& text) {
  NetworkConfig config;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find_first_of("-,x", pos);
    const std::string token = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
      throw ConfigError("cannot parse layer sizes '" + text + "'");
    }
    config.layer_sizes.push_back(value);
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  config.validate();
  return config;
}

Network::Network(NetworkConfig config, std::vector<double> weights)
    : config_(std::move(config)), weights_(std::move(weights)) {
  config_.validate();
  if (weights_.size() != config_.weight_count()) {
    throw ShapeError("network " + config_.to_string() + " needs " +
                     std::to_string(config_.weight_count()) + " weights, got " +
                     std::to_string(weights_.size()));
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i])) {
      throw RangeError("weight " + std::to_string(i) + " is not finite");
    }
  }
}

void TrainingPattern::validate() const {
  for (std::size_t i = 0; i < kGasCount; ++i) {
    if (!(input[i] >= 0.0 && input[i] <= 1.0)) {
      throw RangeError("pattern input " + std::to_string(i) + " outside [0, 1]");
    }
    if (!(target[i] >= 0.0 && target[i] <= 1.0)) {
      throw RangeError("pattern target " + std::to_string(i) + " outside [0, 1]");
    }
  }
}

double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

Network init_weights(const NetworkConfig& config, double chi_low, double chi_high,
                     std::uint64_t seed) {
  config.validate();
  if (!(chi_low <= chi_high) || !std::isfinite(chi_low) || !std::isfinite(chi_high)) {
    throw ConfigError("initial weight range [" + format_double(chi_low) + ", " +
                      format_double(chi_high) + "] is empty");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> weights(config.weight_count());
  if (chi_low == chi_high) {
    std::fill(weights.begin(), weights.end(), chi_low);
  } else {
    std::uniform_real_distribution<double> draw(chi_low, chi_high);
    for (double& w : weights) w = draw(rng);
  }
  return Network(config, std::move(weights));
}

void forward_into(const NetworkConfig& config, std::span<const double> weights,
                  std::span<const double> input, Activations& out) {
  const auto& sizes = config.layer_sizes;
  if (input.size() != sizes.front()) {
    throw ShapeError("input has " + std::to_string(input.size()) + " entries, network expects " +
                     std::to_string(sizes.front()));
  }
  if (weights.size() != config.weight_count()) {
    throw ShapeError("weight vector has " + std::to_string(weights.size()) + " entries, " +
                     config.to_string() + " needs " + std::to_string(config.weight_count()));
  }
  const std::size_t layers = sizes.size();
  out.pre.resize(layers);
  out.post.resize(layers);
  out.pre[0].assign(input.begin(), input.end());
  out.post[0].assign(input.begin(), input.end());

  const double* w = weights.data();
  for (std::size_t l = 1; l < layers; ++l) {
    const std::size_t n_in = sizes[l - 1];
    const std::size_t n_out = sizes[l];
    const std::vector<double>& src = out.post[l - 1];
    out.pre[l].resize(n_out);
    out.post[l].resize(n_out);
    for (std::size_t j = 0; j < n_out; ++j) {
      double v = w[n_in];
      for (std::size_t i = 0; i < n_in; ++i) v += w[i] * src[i];
      out.pre[l][j] = v;
      out.post[l][j] = sigmoid(v);
      w += n_in + 1;
    }
  }
}

void forward_into(const Network& network, std::span<const double> input, Activations& out) {
  forward_into(network.config(), network.weights(), input, out);
}

Activations forward(const Network& network, std::span<const double> input) {
  Activations out;
  forward_into(network, input, out);
  return out;
}

double pattern_sse(const NetworkConfig& config, std::span<const double> weights,
                   const TrainingPattern& pattern, Activations& scratch) {
  if (config.output_size() != kGasCount || config.input_size() != kGasCount) {
    throw ShapeError("network " + config.to_string() + " does not match 5-gas patterns");
  }
  forward_into(config, weights, pattern.input, scratch);
  const auto output = scratch.output();
  double sum = 0.0;
  for (std::size_t i = 0; i < kGasCount; ++i) {
    const double d = output[i] - pattern.target[i];
    sum += d * d;
  }
  return 0.5 * sum;
}

double pattern_sse(const Network& network, const TrainingPattern& pattern,
                   Activations& scratch) {
  return pattern_sse(network.config(), network.weights(), pattern, scratch);
}

double sse(const NetworkConfig& config, std::span<const double> weights,
           std::span<const TrainingPattern> patterns) {
  if (patterns.empty()) throw ArgumentError("sse needs at least one pattern");
  Activations scratch;
  double total = 0.0;
  for (const auto& p : patterns) total += pattern_sse(config, weights, p, scratch);
  return total;
}

double sse(const Network& network, std::span<const TrainingPattern> patterns) {
  return sse(network.config(), network.weights(), patterns);
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_model(std::ostream& out, const Network& network) {
  out << kModelHeader << '\n';
  const auto& sizes = network.config().layer_sizes;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0) out << ' ';
    out << sizes[i];
  }
  out << '\n';
  for (double w : network.weights()) out << format_double(w) << '\n';
}

Network read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kModelHeader) {
    throw ParseError("model line 1: expected header '" + std::string(kModelHeader) + "'");
  }
  if (!std::getline(in, line)) throw ParseError("model line 2: missing layer sizes");
  NetworkConfig config;
  {
    std::istringstream sizes(line);
    std::size_t s = 0;
    while (sizes >> s) config.layer_sizes.push_back(s);
    if (!sizes.eof()) throw ParseError("model line 2: malformed layer sizes");
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("model line 2: ") + e.what());
  }
  std::vector<double> weights;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double w = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), w);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw ParseError("model line " + std::to_string(line_no) + ": bad weight '" + line + "'");
    }
    weights.push_back(w);
  }
  if (weights.size() != config.weight_count()) {
    throw ParseError("model has " + std::to_string(weights.size()) + " weights, configuration " +
                     config.to_string() + " needs " + std::to_string(config.weight_count()));
  }
  return Network(std::move(config), std::move(weights));
}

void save_model(const std::string& path, const Network& network) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_model(out, network);
  if (!out) throw IoError("write to '" + path + "' failed");
}

Network load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path + "'");
  return read_model(in);
}

}  // namespace gas_sentinel
