#include "gas_sentinel/experiment.hpp"

#include "gas_sentinel/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace gas_sentinel {

using nlohmann::json;

PreparedData prepare_data(const Dataset& dataset, const DataSelection& selection) {
  auto [train, test] = split_dataset(dataset, selection.train_fraction, selection.split_seed);
  if (selection.volume > 0) train = take_prefix(train, selection.volume);
  if (train.size() == 0) throw ArgumentError("training split is empty");
  return {train.patterns(), test.patterns()};
}

RunResult execute_run(const RunRequest& request, const Dataset& dataset,
                      const std::string& dataset_label) {
  request.spec.validate();
  const PreparedData data = prepare_data(dataset, request.data);

  const auto start = std::chrono::steady_clock::now();
  TrainingTrace trace = run_trainer(request.spec, data.train, request.seed);
  const auto stop = std::chrono::steady_clock::now();

  RunRecord record;
  record.dataset = dataset_label;
  record.request = request;
  record.trace = trace.sse;
  record.terminated_by = trace.terminated_by;
  record.train_sse = trace.final_sse();
  record.test_sse = data.test.empty() ? std::numeric_limits<double>::quiet_NaN()
                                      : sse(trace.network(), data.test);
  record.bench.p = data.train.size();
  record.bench.m = request.spec.config.weight_count();
  record.bench.n = trace.epochs_run;
  record.bench.q = trace.population;
  record.bench.sse_evaluations = trace.sse_evaluations;
  record.bench.wall_seconds = std::chrono::duration<double>(stop - start).count();
  return {std::move(record), *trace.final_network};
}

RunResult replay(const RunRecord& record) {
  const Dataset dataset = read_dataset(record.dataset);
  return execute_run(record.request, dataset, record.dataset);
}

namespace {

json spec_json(const TrainerSpec& s) {
  return {
      {"trainer", to_string(s.kind)},
      {"layers", s.config.to_string()},
      {"chi", {s.chi_low, s.chi_high}},
      {"bp",
       {{"eta", s.bp.eta},
        {"beta", s.bp.beta},
        {"mode", to_string(s.bp.mode)},
        {"max_epochs", s.bp.max_epochs},
        {"target_sse", s.bp.target_sse},
        {"execution", kernels::to_string(s.bp.execution)}}},
      {"cg",
       {{"max_iterations", s.cg.max_iterations},
        {"restart_interval", s.cg.restart_interval},
        {"target_sse", s.cg.target_sse},
        {"max_evaluations", s.cg.max_evaluations},
        {"armijo_c", s.cg.armijo_c},
        {"max_backtracks", s.cg.max_backtracks},
        {"gradient_tolerance", s.cg.gradient_tolerance},
        {"execution", kernels::to_string(s.cg.execution)}}},
      {"ga",
       {{"population_size", s.ga.population_size},
        {"generations", s.ga.generations},
        {"crossover_rate", s.ga.crossover_rate},
        {"mutation_rate", s.ga.mutation_rate},
        {"mutation_sigma", s.ga.mutation_sigma},
        {"tournament_size", s.ga.tournament_size},
        {"elitism_count", s.ga.elitism_count},
        {"execution", kernels::to_string(s.ga.execution)}}},
      {"pso",
       {{"swarm_size", s.pso.swarm_size},
        {"iterations", s.pso.iterations},
        {"inertia", s.pso.inertia},
        {"cognitive", s.pso.cognitive},
        {"social", s.pso.social},
        {"velocity_clamp", s.pso.velocity_clamp},
        {"execution", kernels::to_string(s.pso.execution)}}},
  };
}

kernels::Execution execution_from_string(const std::string& text) {
  if (text == "serial") return kernels::Execution::serial;
  if (text == "parallel") return kernels::Execution::parallel;
  throw ParseError("unknown execution '" + text + "'");
}

TrainerSpec spec_from_json(const json& j) {
  TrainerSpec s;
  s.kind = trainer_kind_from_string(j.at("trainer").get<std::string>());
  s.config = NetworkConfig::parse(j.at("layers").get<std::string>());
  s.chi_low = j.at("chi").at(0).get<double>();
  s.chi_high = j.at("chi").at(1).get<double>();
  const json& bp = j.at("bp");
  s.bp.eta = bp.at("eta").get<double>();
  s.bp.beta = bp.at("beta").get<double>();
  s.bp.mode = training_mode_from_string(bp.at("mode").get<std::string>());
  s.bp.max_epochs = bp.at("max_epochs").get<std::size_t>();
  s.bp.target_sse = bp.at("target_sse").get<double>();
  s.bp.execution = execution_from_string(bp.at("execution").get<std::string>());
  const json& cg = j.at("cg");
  s.cg.max_iterations = cg.at("max_iterations").get<std::size_t>();
  s.cg.restart_interval = cg.at("restart_interval").get<std::size_t>();
  s.cg.target_sse = cg.at("target_sse").get<double>();
  s.cg.max_evaluations = cg.at("max_evaluations").get<std::uint64_t>();
  s.cg.armijo_c = cg.at("armijo_c").get<double>();
  s.cg.max_backtracks = cg.at("max_backtracks").get<std::size_t>();
  s.cg.gradient_tolerance = cg.at("gradient_tolerance").get<double>();
  s.cg.execution = execution_from_string(cg.at("execution").get<std::string>());
  const json& ga = j.at("ga");
  s.ga.population_size = ga.at("population_size").get<std::size_t>();
  s.ga.generations = ga.at("generations").get<std::size_t>();
  s.ga.crossover_rate = ga.at("crossover_rate").get<double>();
  s.ga.mutation_rate = ga.at("mutation_rate").get<double>();
  s.ga.mutation_sigma = ga.at("mutation_sigma").get<double>();
  s.ga.tournament_size = ga.at("tournament_size").get<std::size_t>();
  s.ga.elitism_count = ga.at("elitism_count").get<std::size_t>();
  s.ga.execution = execution_from_string(ga.at("execution").get<std::string>());
  const json& pso = j.at("pso");
  s.pso.swarm_size = pso.at("swarm_size").get<std::size_t>();
  s.pso.iterations = pso.at("iterations").get<std::size_t>();
  s.pso.inertia = pso.at("inertia").get<double>();
  s.pso.cognitive = pso.at("cognitive").get<double>();
  s.pso.social = pso.at("social").get<double>();
  s.pso.velocity_clamp = pso.at("velocity_clamp").get<double>();
  s.pso.execution = execution_from_string(pso.at("execution").get<std::string>());
  return s;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

std::string run_record_json(const RunRecord& r) {
  json j;
  j["format"] = "gas-sentinel-run v1";
  j["dataset"] = r.dataset;
  j["seed"] = r.request.seed;
  j["data"] = {{"train_fraction", r.request.data.train_fraction},
               {"split_seed", r.request.data.split_seed},
               {"volume", r.request.data.volume}};
  j["spec"] = spec_json(r.request.spec);
  j["trace"] = r.trace;
  j["terminated_by"] = to_string(r.terminated_by);
  j["train_sse"] = r.train_sse;
  j["test_sse"] = number_or_null(r.test_sse);
  j["benchmark"] = {{"p", r.bench.p},
                    {"m", r.bench.m},
                    {"n", r.bench.n},
                    {"q", r.bench.q},
                    {"sse_evaluations", r.bench.sse_evaluations},
                    {"wall_seconds", r.bench.wall_seconds}};
  j["metadata"] = {{"momentum_convention", r.momentum_convention},
                   {"activation", r.activation}};
  return j.dump(2) + "\n";
}

RunRecord parse_run_record(const std::string& text, const std::string& origin) {
  try {
    const json j = json::parse(text);
    RunRecord r;
    r.dataset = j.at("dataset").get<std::string>();
    r.request.seed = j.at("seed").get<std::uint64_t>();
    r.request.data.train_fraction = j.at("data").at("train_fraction").get<double>();
    r.request.data.split_seed = j.at("data").at("split_seed").get<std::uint64_t>();
    r.request.data.volume = j.at("data").at("volume").get<std::size_t>();
    r.request.spec = spec_from_json(j.at("spec"));
    r.trace = j.at("trace").get<std::vector<double>>();
    r.terminated_by = termination_from_string(j.at("terminated_by").get<std::string>());
    r.train_sse = j.at("train_sse").get<double>();
    r.test_sse = number_from(j.at("test_sse"));
    const json& b = j.at("benchmark");
    r.bench.p = b.at("p").get<std::size_t>();
    r.bench.m = b.at("m").get<std::size_t>();
    r.bench.n = b.at("n").get<std::size_t>();
    r.bench.q = b.at("q").get<std::size_t>();
    r.bench.sse_evaluations = b.at("sse_evaluations").get<std::uint64_t>();
    r.bench.wall_seconds = b.at("wall_seconds").get<double>();
    r.momentum_convention = j.at("metadata").at("momentum_convention").get<std::string>();
    r.activation = j.at("metadata").at("activation").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  } catch (const ArgumentError& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

std::string run_record_path(const std::string& model_path) { return model_path + ".run.json"; }

void save_run_record(const std::string& path, const RunRecord& record) {
  write_text(path, run_record_json(record));
}

RunRecord load_run_record(const std::string& path) {
  return parse_run_record(read_text(path), path);
}

std::string model_scales_path(const std::string& model_path) { return model_path + ".meta.json"; }

void save_model_scales(const std::string& model_path, const ModelScales& scales) {
  const json j = {{"input_scale", scales.input_scale}, {"target_scale", scales.target_scale}};
  write_text(model_scales_path(model_path), j.dump(2) + "\n");
}

std::optional<ModelScales> load_model_scales(const std::string& model_path) {
  const std::string path = model_scales_path(model_path);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    const json j = json::parse(read_text(path));
    ModelScales s{j.at("input_scale").get<double>(), j.at("target_scale").get<double>()};
    if (!(s.input_scale > 0.0) || !(s.target_scale > 0.0)) {
      throw ParseError(path + ": scales must be > 0");
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Prediction predict(const Network& network, const Vec5& response, const ModelScales& scales) {
  if (network.config().input_size() != kGasCount || network.config().output_size() != kGasCount) {
    throw ShapeError("prediction needs a network with 5 inputs and 5 outputs");
  }
  const Vec5 x = normalize_input(response, scales.input_scale);
  const Activations a = forward(network, x);
  Prediction p;
  const auto out = a.output();
  std::copy(out.begin(), out.end(), p.output.begin());
  p.ppm = denormalize_output(p.output, scales.target_scale);
  return p;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::mode: return "mode";
    case SweepAxis::hidden_nodes: return "hidden_nodes";
    case SweepAxis::hidden_layers: return "hidden_layers";
    case SweepAxis::chi_range: return "chi_range";
    case SweepAxis::learning_rate: return "learning_rate";
    case SweepAxis::momentum: return "momentum";
    case SweepAxis::volume: return "volume";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(const std::string& text) {
  for (auto axis : {SweepAxis::mode, SweepAxis::hidden_nodes, SweepAxis::hidden_layers,
                    SweepAxis::chi_range, SweepAxis::learning_rate, SweepAxis::momentum,
                    SweepAxis::volume}) {
    if (text == to_string(axis)) return axis;
  }
  throw ArgumentError("unknown sweep axis '" + text +
                      "' (expected mode, hidden_nodes, hidden_layers, chi_range, learning_rate, "
                      "momentum or volume)");
}

RunRequest default_sweep_request() {
  RunRequest r;
  r.spec.kind = TrainerKind::bp;
  r.spec.config = NetworkConfig::uniform(5);
  r.spec.chi_low = -1.5;
  r.spec.chi_high = 1.5;
  r.spec.bp.eta = 0.5;
  r.spec.bp.beta = 0.1;
  r.spec.bp.mode = TrainingMode::batch;
  r.spec.bp.max_epochs = 1000;
  r.data.volume = 50;
  return r;
}

namespace {

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ArgumentError("bad " + what + " '" + text + "'");
  return v;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  const double v = parse_real(text, what);
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw ArgumentError(what + " must be a positive integer, got '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

void apply_axis(RunRequest& r, SweepAxis axis, const std::string& value) {
  switch (axis) {
    case SweepAxis::mode: r.spec.bp.mode = training_mode_from_string(value); break;
    case SweepAxis::hidden_nodes: {
      auto sizes = r.spec.config.layer_sizes;
      for (std::size_t k = 1; k + 1 < sizes.size(); ++k) sizes[k] = parse_count(value, "hidden_nodes");
      r.spec.config = NetworkConfig{sizes};
      break;
    }
    case SweepAxis::hidden_layers: {
      const std::size_t width = r.spec.config.layer_sizes.size() > 2
                                    ? r.spec.config.layer_sizes[1]
                                    : kGasCount;
      r.spec.config = NetworkConfig::uniform(width, parse_count(value, "hidden_layers"));
      break;
    }
    case SweepAxis::chi_range: {
      const auto colon = value.find(':');
      if (colon == std::string::npos) {
        const double a = parse_real(value, "chi range");
        if (!(a >= 0.0)) throw ArgumentError("symmetric chi range needs a >= 0");
        r.spec.chi_low = -a;
        r.spec.chi_high = a;
      } else {
        r.spec.chi_low = parse_real(value.substr(0, colon), "chi range");
        r.spec.chi_high = parse_real(value.substr(colon + 1), "chi range");
      }
      break;
    }
    case SweepAxis::learning_rate: r.spec.bp.eta = parse_real(value, "learning rate"); break;
    case SweepAxis::momentum: r.spec.bp.beta = parse_real(value, "momentum"); break;
    case SweepAxis::volume: r.data.volume = parse_count(value, "volume"); break;
  }
}

}  // namespace

std::vector<RunRequest> expand_sweep(const SweepSpec& spec, const Dataset& dataset) {
  if (spec.values.empty()) throw ArgumentError("sweep needs at least one axis value");
  if (spec.repeats < 1) throw ArgumentError("sweep repeats must be >= 1");
  std::set<std::string> seen;
  for (const auto& v : spec.values) {
    if (!seen.insert(v).second) throw ArgumentError("duplicate sweep value '" + v + "'");
  }
  const std::size_t train_size = static_cast<std::size_t>(
      std::lround(spec.base.data.train_fraction * static_cast<double>(dataset.size())));

  std::vector<RunRequest> out;
  for (const auto& v : spec.values) {
    for (std::size_t rep = 0; rep < spec.repeats; ++rep) {
      RunRequest r = spec.base;
      apply_axis(r, spec.axis, v);
      r.seed = spec.base.seed + rep;
      try {
        r.spec.validate();
      } catch (const ArgumentError& e) {
        throw ArgumentError("sweep value '" + v + "': " + e.what());
      }
      if (r.data.volume > train_size) {
        throw ArgumentError("sweep value '" + v + "': volume " + std::to_string(r.data.volume) +
                            " exceeds the " + std::to_string(train_size) + "-sample training split");
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const Dataset& dataset) {
  std::vector<RunRequest> requests = expand_sweep(spec, dataset);
  std::vector<SweepRow> rows(requests.size());
  run_indexed(requests.size(), [&](std::size_t i) {
    RunRequest r = requests[i];
    r.spec.bp.execution = kernels::Execution::serial;
    r.spec.cg.execution = kernels::Execution::serial;
    r.spec.ga.execution = kernels::Execution::serial;
    r.spec.pso.execution = kernels::Execution::serial;
    const PreparedData data = prepare_data(dataset, r.data);
    const TrainingTrace t = run_trainer(r.spec, data.train, r.seed);
    SweepRow& row = rows[i];
    row.value = spec.values[i / spec.repeats];
    row.seed = r.seed;
    row.epochs_run = t.epochs_run;
    row.terminated_by = t.terminated_by;
    row.final_sse = t.final_sse();
    row.trace = t.sse;
  });
  return rows;
}

std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::string out = "axis,value,seed,epochs_run,terminated_by,final_sse,trace\n";
  for (const auto& row : rows) {
    out += to_string(axis) + ',' + row.value + ',' + std::to_string(row.seed) + ',' +
           std::to_string(row.epochs_run) + ',' + to_string(row.terminated_by) + ',' +
           format_double(row.final_sse) + ',';
    for (std::size_t k = 0; k < row.trace.size(); ++k) {
      if (k) out += ';';
      out += format_double(row.trace[k]);
    }
    out += '\n';
  }
  return out;
}

CompareResult run_compare(const CompareSpec& spec, const Dataset& dataset) {
  if (spec.trainers.size() < 2) throw ArgumentError("compare needs at least two trainers");
  if (spec.runs < 1) throw ArgumentError("compare needs at least one run per trainer");
  critical_value(spec.runs, spec.runs, spec.alpha);

  std::vector<TrainerSpec> specs;
  for (TrainerKind kind : spec.trainers) {
    TrainerSpec s = spec.base.spec;
    s.kind = kind;
    specs.push_back(with_evaluation_budget(s, spec.budget));
    specs.back().validate();
  }
  const PreparedData data = prepare_data(dataset, spec.base.data);

  CompareResult result;
  for (const auto& s : specs) {
    result.samples.push_back(collect_sse_samples(s, data.train, spec.runs, spec.base.seed));
  }
  for (std::size_t k = 1; k < result.samples.size(); ++k) {
    result.outcomes.push_back(ks_two_sample(result.samples[0], result.samples[k], spec.alpha));
  }
  return result;
}

std::string render_compare(const CompareSpec& spec, const CompareResult& result) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "KS test, alpha = %g, %zu runs per trainer, budget %llu SSE evaluations\n",
                spec.alpha, spec.runs, static_cast<unsigned long long>(spec.budget));
  out += buf;

  std::snprintf(buf, sizeof buf, "%-10s", "");
  out += buf;
  for (std::size_t k = 1; k < result.samples.size(); ++k) {
    const std::string head = result.samples[0].label + " vs " + result.samples[k].label;
    std::snprintf(buf, sizeof buf, "%20s", head.c_str());
    out += buf;
  }
  out += '\n';

  const auto row = [&](const char* name, auto field) {
    std::snprintf(buf, sizeof buf, "%-10s", name);
    out += buf;
    for (const auto& o : result.outcomes) {
      std::snprintf(buf, sizeof buf, "%20.4f", field(o));
      out += buf;
    }
    out += '\n';
  };
  row("D+", [](const KsOutcome& o) { return o.d_plus; });
  row("D-", [](const KsOutcome& o) { return o.d_minus; });
  row("D", [](const KsOutcome& o) { return o.d; });
  row("K_alpha", [](const KsOutcome& o) { return o.k_alpha; });
  std::snprintf(buf, sizeof buf, "%-10s", "decision");
  out += buf;
  for (const auto& o : result.outcomes) {
    const char* label = o.decision == KsDecision::indistinguishable ? "X ~ Y"
                        : o.decision == KsDecision::x_succeeds_y    ? "X > Y"
                                                                    : "X < Y";
    std::snprintf(buf, sizeof buf, "%20s", label);
    out += buf;
  }
  out += "\n\nmedian final SSE\n";
  for (const auto& s : result.samples) {
    std::vector<double> v = s.values;
    std::sort(v.begin(), v.end());
    const double median = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    std::snprintf(buf, sizeof buf, "  %-8s %.6g\n", s.label.c_str(), median);
    out += buf;
  }
  return out;
}

}  // namespace gas_sentinel
