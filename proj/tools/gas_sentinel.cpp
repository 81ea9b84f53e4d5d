// gas-sentinel: generate data, train, predict, sweep, compare and bench.

#include "gas_sentinel/errors.hpp"
#include "gas_sentinel/experiment.hpp"
#include "gas_sentinel/safety.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace gas_sentinel;

namespace {

constexpr int kExitArgument = 1;
constexpr int kExitRuntime = 2;

// Training flags shared by train, sweep, compare and bench.
struct TrainFlags {
  std::string trainer = "bp";
  std::optional<double> eta;
  std::optional<double> beta;
  std::optional<std::string> mode;
  std::optional<std::string> layers;
  std::optional<std::string> chi;
  std::optional<std::size_t> epochs;
  std::optional<double> target_sse;
  std::uint64_t seed = 0;
  std::optional<std::size_t> volume;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.8;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool with_trainer = true) {
  if (with_trainer) cmd->add_option("--trainer", f.trainer, "bp, cg, ga or pso")->capture_default_str();
  cmd->add_option("--eta", f.eta, "BP learning rate");
  cmd->add_option("--beta", f.beta, "BP momentum factor");
  cmd->add_option("--mode", f.mode, "BP mode: batch or sequential");
  cmd->add_option("--layers", f.layers, "layer sizes, e.g. 5-5-5");
  cmd->add_option("--chi", f.chi, "initial weight range: a for [-a, a], or lo:hi");
  cmd->add_option("--epochs", f.epochs,
                  "BP epochs, CG iterations, GA generations or PSO iterations");
  cmd->add_option("--target-sse", f.target_sse, "stop BP or CG once SSE reaches this value");
  cmd->add_option("--seed", f.seed, "run seed")->capture_default_str();
  cmd->add_option("--volume", f.volume, "train on the first N samples of the training split");
  cmd->add_option("--split-seed", f.split_seed, "train/test shuffle seed")->capture_default_str();
  cmd->add_option("--train-fraction", f.train_fraction, "share of samples used for training")
      ->capture_default_str();
}

std::pair<double, double> parse_chi(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const double a = std::stod(text);
      return {-a, a};
    }
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ArgumentError("bad --chi value '" + text + "'");
  }
}

RunRequest build_request(const TrainFlags& f, RunRequest r) {
  r.spec.kind = trainer_kind_from_string(f.trainer);
  if (f.eta) r.spec.bp.eta = *f.eta;
  if (f.beta) r.spec.bp.beta = *f.beta;
  if (f.mode) r.spec.bp.mode = training_mode_from_string(*f.mode);
  if (f.layers) r.spec.config = NetworkConfig::parse(*f.layers);
  if (f.chi) std::tie(r.spec.chi_low, r.spec.chi_high) = parse_chi(*f.chi);
  if (f.epochs) {
    r.spec.bp.max_epochs = *f.epochs;
    r.spec.cg.max_iterations = *f.epochs;
    r.spec.ga.generations = *f.epochs;
    r.spec.pso.iterations = *f.epochs;
  }
  if (f.target_sse) {
    r.spec.bp.target_sse = *f.target_sse;
    r.spec.cg.target_sse = *f.target_sse;
  }
  r.seed = f.seed;
  if (f.volume) r.data.volume = *f.volume;
  r.data.split_seed = f.split_seed;
  r.data.train_fraction = f.train_fraction;
  r.spec.validate();
  return r;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string model_text(const Network& network) {
  std::ostringstream out;
  write_model(out, network);
  return out.str();
}

Vec5 to_vec5(const std::vector<double>& v, const char* flag) {
  if (v.size() != kGasCount) {
    throw ArgumentError(std::string(flag) + " needs exactly 5 comma-separated values");
  }
  Vec5 out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

GasLevels parse_levels(const std::string& text) {
  GasLevels levels;
  std::stringstream groups(text);
  std::string group;
  std::size_t g = 0;
  while (std::getline(groups, group, ';')) {
    if (g >= kGasCount) throw ArgumentError("--levels needs 5 ';'-separated groups");
    std::stringstream items(group);
    std::string item;
    while (std::getline(items, item, ',')) {
      try {
        levels[g].push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ArgumentError("bad level '" + item + "'");
      }
    }
    ++g;
  }
  if (g != kGasCount) throw ArgumentError("--levels needs 5 ';'-separated groups");
  return levels;
}

void print_bench(const BenchmarkReport& b, const std::string& label) {
  std::printf("%-9s p=%zu m=%zu n=%zu q=%zu sse_evaluations=%llu wall_time=%.6fs\n", label.c_str(),
              b.p, b.m, b.n, b.q, static_cast<unsigned long long>(b.sse_evaluations),
              b.wall_seconds);
}

void set_execution(TrainerSpec& spec, kernels::Execution e) {
  spec.bp.execution = e;
  spec.cg.execution = e;
  spec.ga.execution = e;
  spec.pso.execution = e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manhole gas detection with a multilayer perceptron"};
  app.require_subcommand(1);

  // generate
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  double gen_noise = kDefaultNoiseSigma;
  std::optional<std::string> gen_levels;
  std::optional<double> gen_target_scale;
  auto* generate = app.add_subcommand("generate", "write a synthetic 243-sample dataset");
  generate->add_option("--out", gen_out, "dataset CSV path")->required();
  generate->add_option("--seed", gen_seed, "noise seed")->capture_default_str();
  generate->add_option("--noise", gen_noise, "sensor noise sigma")->capture_default_str();
  generate->add_option("--levels", gen_levels, "per-gas levels, e.g. 50,100,200;100,200,400;...");
  generate->add_option("--target-scale", gen_target_scale, "ppm that normalises to 1");

  // train
  TrainFlags train_flags;
  std::string train_dataset;
  std::string train_model;
  std::optional<std::string> train_replay;
  auto* train = app.add_subcommand("train", "train a network and write model + run record");
  train->add_option("--dataset", train_dataset, "dataset CSV");
  train->add_option("--model", train_model, "model output path")->required();
  train->add_option("--replay", train_replay, "re-run a stored run record and check its trace");
  add_train_flags(train, train_flags);

  // predict
  std::string pred_model;
  std::vector<double> pred_response;
  std::vector<double> pred_ppm;
  std::optional<double> pred_input_scale;
  std::optional<double> pred_target_scale;
  auto* predict_cmd = app.add_subcommand("predict", "estimate concentrations and safety verdicts");
  predict_cmd->add_option("--model", pred_model, "model path")->required();
  auto* response_opt = predict_cmd->add_option("--response", pred_response, "5 sensor responses")
                           ->delimiter(',');
  auto* ppm_opt = predict_cmd->add_option("--ppm", pred_ppm,
                                          "5 concentrations, simulated through the sensor model")
                      ->delimiter(',');
  response_opt->excludes(ppm_opt);
  predict_cmd->add_option("--input-scale", pred_input_scale, "override the model's input scale");
  predict_cmd->add_option("--target-scale", pred_target_scale, "override the model's target scale");

  // sweep
  TrainFlags sweep_flags;
  std::string sweep_dataset;
  std::string sweep_axis;
  std::vector<std::string> sweep_values;
  std::size_t sweep_repeats = 5;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "vary one BP setting and record every run");
  sweep->add_option("--dataset", sweep_dataset, "dataset CSV")->required();
  sweep->add_option("--axis", sweep_axis,
                    "mode, hidden_nodes, hidden_layers, chi_range, learning_rate, momentum, volume")
      ->required();
  sweep->add_option("--values", sweep_values, "comma-separated axis values")
      ->delimiter(',')
      ->required();
  sweep->add_option("--repeats", sweep_repeats, "runs per axis value")->capture_default_str();
  sweep->add_option("--out", sweep_out, "CSV output path")->required();
  add_train_flags(sweep, sweep_flags, false);

  // compare
  TrainFlags cmp_flags;
  std::string cmp_dataset;
  std::vector<std::string> cmp_trainers = {"bp", "cg", "ga", "pso"};
  std::size_t cmp_runs = 20;
  double cmp_alpha = 0.05;
  std::uint64_t cmp_budget = kDefaultCompareBudget;
  std::optional<std::string> cmp_out;
  auto* compare = app.add_subcommand("compare", "KS-test BP against other trainers");
  compare->add_option("--dataset", cmp_dataset, "dataset CSV")->required();
  compare->add_option("--trainers", cmp_trainers, "trainers, the first is compared with the rest")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--repeats", cmp_runs, "runs per trainer")->capture_default_str();
  compare->add_option("--alpha", cmp_alpha, "significance level: 0.01, 0.05 or 0.10")
      ->capture_default_str();
  compare->add_option("--budget", cmp_budget, "SSE evaluations per run")->capture_default_str();
  compare->add_option("--out", cmp_out, "also write the report here");
  add_train_flags(compare, cmp_flags, false);

  // bench
  TrainFlags bench_flags;
  std::string bench_dataset;
  auto* bench = app.add_subcommand("bench", "time one run with serial and OpenMP kernels");
  bench->add_option("--dataset", bench_dataset, "dataset CSV")->required();
  add_train_flags(bench, bench_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitArgument;
  }

  try {
    if (*generate) {
      const GasLevels levels = gen_levels ? parse_levels(*gen_levels) : default_levels();
      const Dataset ds =
          generate_grid(levels, table1_sensor_model(), gen_noise, gen_seed, gen_target_scale);
      write_dataset(gen_out, ds);
      std::printf("wrote %zu samples to %s (input scale %s, target scale %s)\n", ds.size(),
                  gen_out.c_str(), format_double(ds.input_scale).c_str(),
                  format_double(ds.target_scale).c_str());
    } else if (*train) {
      RunResult result = [&] {
        if (train_replay) {
          const RunRecord stored = load_run_record(*train_replay);
          RunResult replayed = replay(stored);
          if (replayed.record.trace != stored.trace) {
            throw Error("replay of '" + *train_replay + "' produced a different SSE trace");
          }
          std::printf("replay: SSE trace matches (%zu entries)\n", stored.trace.size());
          return replayed;
        }
        if (train_dataset.empty()) throw ArgumentError("train needs --dataset or --replay");
        const RunRequest request = build_request(train_flags, default_sweep_request());
        return execute_run(request, read_dataset(train_dataset), train_dataset);
      }();
      const Dataset ds = read_dataset(result.record.dataset);
      save_model(train_model, result.network);
      save_model_scales(train_model, {ds.input_scale, ds.target_scale});
      save_run_record(run_record_path(train_model), result.record);
      std::printf("trainer: %s, terminated by %s after %zu\n",
                  to_string(result.record.request.spec.kind).c_str(),
                  to_string(result.record.terminated_by).c_str(), result.record.bench.n);
      std::printf("train SSE: %s\n", format_double(result.record.train_sse).c_str());
      std::printf("test SSE: %s\n", format_double(result.record.test_sse).c_str());
      print_bench(result.record.bench, "bench:");
    } else if (*predict_cmd) {
      const Network network = load_model(pred_model);
      std::optional<ModelScales> scales = load_model_scales(pred_model);
      if (!scales && !(pred_input_scale && pred_target_scale)) {
        throw ArgumentError("no scales found at '" + model_scales_path(pred_model) +
                            "'; pass --input-scale and --target-scale");
      }
      ModelScales s = scales.value_or(ModelScales{});
      if (pred_input_scale) s.input_scale = *pred_input_scale;
      if (pred_target_scale) s.target_scale = *pred_target_scale;
      Vec5 response{};
      if (!pred_response.empty()) {
        response = to_vec5(pred_response, "--response");
      } else if (!pred_ppm.empty()) {
        response = table1_sensor_model().respond(MixtureSample{to_vec5(pred_ppm, "--ppm")});
      } else {
        throw ArgumentError("predict needs --response or --ppm");
      }
      const Prediction p = predict(network, response, s);
      std::fputs(render_report(interpret(p.ppm), p.output).c_str(), stdout);
    } else if (*sweep) {
      SweepSpec spec;
      spec.axis = sweep_axis_from_string(sweep_axis);
      spec.values = sweep_values;
      spec.repeats = sweep_repeats;
      spec.base = build_request(sweep_flags, default_sweep_request());
      const auto rows = run_sweep(spec, read_dataset(sweep_dataset));
      write_file(sweep_out, sweep_csv(spec.axis, rows));
      std::printf("wrote %zu rows to %s\n", rows.size(), sweep_out.c_str());
    } else if (*compare) {
      CompareSpec spec;
      spec.trainers.clear();
      for (const auto& t : cmp_trainers) spec.trainers.push_back(trainer_kind_from_string(t));
      spec.runs = cmp_runs;
      spec.alpha = cmp_alpha;
      spec.budget = cmp_budget;
      spec.base = build_request(cmp_flags, default_sweep_request());
      const CompareResult result = run_compare(spec, read_dataset(cmp_dataset));
      const std::string report = render_compare(spec, result);
      std::fputs(report.c_str(), stdout);
      if (cmp_out) write_file(*cmp_out, report);
    } else if (*bench) {
      const Dataset ds = read_dataset(bench_dataset);
      RunRequest request = build_request(bench_flags, RunRequest{});
      set_execution(request.spec, kernels::Execution::serial);
      const RunResult serial = execute_run(request, ds, bench_dataset);
      set_execution(request.spec, kernels::Execution::parallel);
      const RunResult parallel = execute_run(request, ds, bench_dataset);
      std::printf("workers: %d\n", kernels::worker_limit());
      print_bench(serial.record.bench, "serial");
      print_bench(parallel.record.bench, "parallel");
      const bool same = serial.record.trace == parallel.record.trace &&
                        model_text(serial.network) == model_text(parallel.network);
      std::printf("identical results: %s\n", same ? "yes" : "no");
      if (!same) return kExitRuntime;
    }
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitArgument;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
