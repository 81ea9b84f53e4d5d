#pragma once

// Experiment plumbing behind the command-line tool: reproducible training
// runs, parameter sweeps and trainer comparisons.

#include "gas_sentinel/gasdata.hpp"
#include "gas_sentinel/stats.hpp"
#include "gas_sentinel/trainer_spec.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gas_sentinel {

/// Which samples a run trains and tests on.
struct DataSelection {
  double train_fraction = 0.8;
  std::uint64_t split_seed = 0;
  /// Train on the first `volume` samples of the training split; 0 = all.
  std::size_t volume = 0;
};

struct PreparedData {
  std::vector<TrainingPattern> train;
  std::vector<TrainingPattern> test;
};

PreparedData prepare_data(const Dataset& dataset, const DataSelection& selection);

struct RunRequest {
  TrainerSpec spec;
  std::uint64_t seed = 0;
  DataSelection data;
};

struct BenchmarkReport {
  std::size_t p = 0;  // training patterns
  std::size_t m = 0;  // weights
  std::size_t n = 0;  // epochs, iterations or generations run
  std::size_t q = 1;  // population size
  std::uint64_t sse_evaluations = 0;
  double wall_seconds = 0.0;
};

inline constexpr const char* kMomentumConvention = "delta_w = eta * g + beta * previous_delta_w";
inline constexpr const char* kActivation = "logistic sigmoid";

struct RunRecord {
  std::string dataset;
  RunRequest request;
  std::vector<double> trace;
  Termination terminated_by = Termination::budget_exhausted;
  double train_sse = 0.0;
  double test_sse = 0.0;
  BenchmarkReport bench;
  std::string momentum_convention = kMomentumConvention;
  std::string activation = kActivation;
};

struct RunResult {
  RunRecord record;
  Network network;
};

RunResult execute_run(const RunRequest& request, const Dataset& dataset,
                      const std::string& dataset_label);

/// Re-runs a record's request on the dataset it names.
RunResult replay(const RunRecord& record);

std::string run_record_json(const RunRecord& record);
RunRecord parse_run_record(const std::string& text, const std::string& origin);
std::string run_record_path(const std::string& model_path);
void save_run_record(const std::string& path, const RunRecord& record);
RunRecord load_run_record(const std::string& path);

/// Normalisation scales stored next to a model at <model>.meta.json.
struct ModelScales {
  double input_scale = 1.0;
  double target_scale = kDefaultTargetScale;
};

std::string model_scales_path(const std::string& model_path);
void save_model_scales(const std::string& model_path, const ModelScales& scales);
std::optional<ModelScales> load_model_scales(const std::string& model_path);

/// Normalise -> forward -> denormalise -> interpret, rendered as a table.
struct Prediction {
  Vec5 output{};
  Vec5 ppm{};
};
Prediction predict(const Network& network, const Vec5& response, const ModelScales& scales);

enum class SweepAxis { mode, hidden_nodes, hidden_layers, chi_range, learning_rate, momentum, volume };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& text);

/// Base settings of every sweep: batch BP, 5-5-5, eta 0.5, beta 0.1,
/// chi [-1.5, 1.5], 1000 epochs, 50 training samples.
RunRequest default_sweep_request();

struct SweepSpec {
  SweepAxis axis = SweepAxis::hidden_nodes;
  /// Axis values as text: mode names, integers, reals, or for chi_range
  /// either "a" (meaning [-a, a]) or "lo:hi".
  std::vector<std::string> values;
  std::size_t repeats = 5;
  RunRequest base = default_sweep_request();
};

struct SweepRow {
  std::string value;
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  Termination terminated_by = Termination::budget_exhausted;
  double final_sse = 0.0;
  std::vector<double> trace;
};

/// One request per (value, repeat), seeds base.seed + repeat. Every request
/// is validated before any run starts.
std::vector<RunRequest> expand_sweep(const SweepSpec& spec, const Dataset& dataset);
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const Dataset& dataset);
/// Columns axis,value,seed,epochs_run,terminated_by,final_sse,trace with the
/// trace ';'-separated.
std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows);

inline constexpr std::uint64_t kDefaultCompareBudget = 15000;

struct CompareSpec {
  /// The first trainer is X in every comparison.
  std::vector<TrainerKind> trainers = {TrainerKind::bp, TrainerKind::cg, TrainerKind::ga,
                                       TrainerKind::pso};
  std::size_t runs = 20;
  double alpha = 0.05;
  std::uint64_t budget = kDefaultCompareBudget;
  RunRequest base = default_sweep_request();
};

struct CompareResult {
  std::vector<SseSample> samples;
  /// outcomes[k] compares samples[0] with samples[k + 1].
  std::vector<KsOutcome> outcomes;
};

CompareResult run_compare(const CompareSpec& spec, const Dataset& dataset);
std::string render_compare(const CompareSpec& spec, const CompareResult& result);

}  // namespace gas_sentinel
