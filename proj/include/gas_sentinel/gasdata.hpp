#pragma once

#include "gas_sentinel/network.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gas_sentinel {

/// Gas components in canonical vector order.
enum class GasId { NH3 = 0, CO = 1, H2S = 2, CO2 = 3, CH4 = 4 };

inline constexpr std::array<GasId, kGasCount> kAllGases = {GasId::NH3, GasId::CO, GasId::H2S,
                                                           GasId::CO2, GasId::CH4};

std::string_view gas_name(GasId gas);
inline std::size_t index_of(GasId gas) { return static_cast<std::size_t>(gas); }

using Matrix5 = std::array<Vec5, kGasCount>;

struct MixtureSample {
  Vec5 ppm{};

  /// Throws RangeError on negative or non-finite concentrations.
  void validate() const;
};

/// Linear-with-cap cross-sensitivity model:
///   response_i = min(cap, sum_j S[i][j] * ppm_j / reference_ppm_j)
/// Row i is sensor i, column j is gas j.
class SensorModel {
 public:
  /// Throws ConfigError unless every entry is finite and >= 0, each sensor is
  /// strictly most sensitive to its own gas, reference ppm > 0 and cap > 0.
  SensorModel(Matrix5 sensitivity, Vec5 reference_ppm, double response_cap = 1.0);

  const Matrix5& sensitivity() const { return sensitivity_; }
  const Vec5& reference_ppm() const { return reference_ppm_; }
  double response_cap() const { return response_cap_; }

  /// Noise-free response.
  Vec5 respond(const MixtureSample& mixture) const;

 private:
  Matrix5 sensitivity_;
  Vec5 reference_ppm_;
  double response_cap_;
};

struct FixtureRow {
  MixtureSample mixture;
  Vec5 response{};
};

struct FitOptions {
  Vec5 reference_ppm = {50.0, 100.0, 100.0, 100.0, 2000.0};
  double response_cap = 1.0;
  /// Smallest gap kept between a sensor's own-gas sensitivity and any other.
  double dominance_margin = 1e-6;
  /// Weight of a ridge term that picks the minimum-norm solution when the
  /// fixture cannot separate some gases. 0 turns a rank-deficient fixture
  /// into a FitError.
  double min_norm_weight = 0.0;
  /// Per-sensor RMSE over the fixture above which the fit is rejected.
  double max_rmse = 0.02;
};

/// Least-squares fit of each sensor row under the model's constraints
/// (non-negative entries, own-gas sensitivity dominant). Each row is a
/// 5-variable convex QP solved exactly by active-set enumeration.
///
/// Throws FitError naming the sensor on fewer than 5 rows, a constant
/// sensor response, a rank-deficient design (when min_norm_weight is 0) or a
/// residual above max_rmse.
SensorModel fit_sensitivity_matrix(std::span<const FixtureRow> fixture, const FitOptions& options = {});

/// Five measured rows of mixture ppm and sensor response (dR/R0).
std::vector<FixtureRow> table1_fixture();

/// Model calibrated on table1_fixture(). That fixture holds NH3 and CO
/// constant, so their split is settled by the minimum-norm tie-break.
SensorModel table1_sensor_model();

/// Adds N(0, noise_sigma) per sensor after the cap, then clamps at 0.
Vec5 simulate_response(const SensorModel& model, const MixtureSample& mixture, double noise_sigma,
                       std::uint64_t seed);
Vec5 simulate_response(const SensorModel& model, const MixtureSample& mixture, double noise_sigma,
                       std::mt19937_64& rng);

/// Three strictly increasing ppm levels per gas.
using GasLevels = std::array<std::vector<double>, kGasCount>;

GasLevels default_levels();
void validate_levels(const GasLevels& levels);

inline constexpr double kDefaultTargetScale = 5000.0;
inline constexpr double kDefaultNoiseSigma = 0.005;

struct DatasetSample {
  MixtureSample mixture;
  Vec5 response{};
};

/// Generation parameters recorded alongside a dataset.
struct GenerationInfo {
  GasLevels levels{};
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
};

struct Dataset {
  std::vector<DatasetSample> samples;
  double input_scale = 1.0;
  double target_scale = kDefaultTargetScale;
  std::optional<GenerationInfo> generation;

  std::size_t size() const { return samples.size(); }

  /// Normalized input/target pairs in sample order.
  std::vector<TrainingPattern> patterns() const;
};

/// Default target scale for a set of concentrations: 5000 ppm, raised to the
/// largest concentration when that exceeds it so targets stay in [0, 1].
double default_target_scale(double max_ppm);

/// Cartesian product of the levels (NH3 slowest, CH4 fastest), 3^5 = 243
/// samples. input_scale is the largest response in the dataset.
Dataset generate_grid(const GasLevels& levels, const SensorModel& model, double noise_sigma,
                      std::uint64_t seed, std::optional<double> target_scale = {});

Vec5 normalize_input(const Vec5& response, double input_scale);
Vec5 normalize_target(const Vec5& ppm, double target_scale);

/// Multiplies by target_scale and rounds to kPpmResolution, so
/// denormalize_output(normalize_target(x)) == x for integer ppm.
Vec5 denormalize_output(const Vec5& y, double target_scale);
inline constexpr double kPpmResolution = 1e-6;

/// Seeded shuffle, then the first round(fraction * n) samples train.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed);

/// First `count` samples, scales unchanged.
Dataset take_prefix(const Dataset& dataset, std::size_t count);

// CSV with header nh3_ppm,...,ch4_ppm,r_nh3,...,r_ch4 plus a JSON sidecar at
// <path>.meta.json holding scales and generation parameters.
inline constexpr const char* kDatasetHeader =
    "nh3_ppm,co_ppm,h2s_ppm,co2_ppm,ch4_ppm,r_nh3,r_co,r_h2s,r_co2,r_ch4";

std::string metadata_path(const std::string& dataset_path);
void write_dataset(const std::string& path, const Dataset& dataset);
/// Reads the CSV and, when present, its sidecar. Without a sidecar the
/// scales follow the generation defaults.
Dataset read_dataset(const std::string& path);

std::string dataset_csv(const Dataset& dataset);
Dataset parse_dataset_csv(const std::string& text, const std::string& origin);

}  // namespace gas_sentinel
