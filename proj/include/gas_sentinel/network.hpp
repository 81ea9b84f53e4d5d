#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gas_sentinel {

inline constexpr std::size_t kGasCount = 5;
using Vec5 = std::array<double, kGasCount>;

/// Layer widths from input to output. The application uses 5 inputs and
/// 5 outputs, but the type accepts any positive widths.
struct NetworkConfig {
  std::vector<std::size_t> layer_sizes;

  /// Throws ConfigError unless there are >= 3 layers, all of width >= 1.
  void validate() const;

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return layer_sizes.size(); }

  /// Sum over adjacent layer pairs of (size_in + 1) * size_out.
  std::size_t weight_count() const;

  /// Offset of the first weight feeding layer `layer` (1-based over
  /// non-input layers).
  std::size_t layer_offset(std::size_t layer) const;

  /// 5-h-...-h-5 with `hidden_layers` hidden layers of equal width.
  static NetworkConfig uniform(std::size_t hidden_width, std::size_t hidden_layers = 1);

  /// Renders as "5-4-5".
  std::string to_string() const;

  /// Parses "5-4-5" or "5,4,5".
  static NetworkConfig parse(const std::string& text);

  bool operator==(const NetworkConfig&) const = default;
};

/// Multilayer perceptron with logistic-sigmoid hidden and output units.
///
/// Weights live in one flat vector, ordered layer-major, then by destination
/// neuron; each destination neuron stores its incoming weights in source
/// order followed by its bias. Every trainer shares this representation.
class Network {
 public:
  /// Throws ConfigError on an invalid config, ShapeError on a weight-count
  /// mismatch and RangeError on non-finite weights.
  Network(NetworkConfig config, std::vector<double> weights);

  const NetworkConfig& config() const { return config_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t weight_count() const { return weights_.size(); }

  /// Direct write access for trainers. Callers keep the values finite.
  std::span<double> mutable_weights() { return weights_; }

  bool operator==(const Network&) const = default;

 private:
  NetworkConfig config_;
  std::vector<double> weights_;
};

/// One normalized input/target pair. Both vectors hold values in [0, 1].
struct TrainingPattern {
  Vec5 input{};
  Vec5 target{};

  /// Throws RangeError if any entry falls outside [0, 1] or is not finite.
  void validate() const;
};

/// Pre-activations (v) and post-activations (y) for every layer. Layer 0
/// holds the raw input in both.
struct Activations {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;

  std::span<const double> output() const { return post.back(); }
};

double sigmoid(double v);

/// Uniform i.i.d. draw of every weight from [chi_low, chi_high].
Network init_weights(const NetworkConfig& config, double chi_low, double chi_high,
                     std::uint64_t seed);

Activations forward(const Network& network, std::span<const double> input);

/// Same as forward() but reuses the buffers in `out`.
void forward_into(const Network& network, std::span<const double> input, Activations& out);

/// Forward pass over a raw weight vector laid out for `config`.
void forward_into(const NetworkConfig& config, std::span<const double> weights,
                  std::span<const double> input, Activations& out);

/// 1/2 * sum over patterns and outputs of (output - target)^2.
double sse(const Network& network, std::span<const TrainingPattern> patterns);

/// SSE of a raw weight vector laid out for `config`. Summation runs in
/// pattern order so every caller gets bit-identical results.
double sse(const NetworkConfig& config, std::span<const double> weights,
           std::span<const TrainingPattern> patterns);

/// Squared-error contribution of a single pattern, 1/2 * sum_i (o_i - t_i)^2.
double pattern_sse(const Network& network, const TrainingPattern& pattern,
                   Activations& scratch);
double pattern_sse(const NetworkConfig& config, std::span<const double> weights,
                   const TrainingPattern& pattern, Activations& scratch);

// Text model format: "gas-sentinel-model v1", a line of layer sizes, then one
// weight per line with round-trip precision.
inline constexpr const char* kModelHeader = "gas-sentinel-model v1";

void write_model(std::ostream& out, const Network& network);
Network read_model(std::istream& in);
void save_model(const std::string& path, const Network& network);
Network load_model(const std::string& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace gas_sentinel
