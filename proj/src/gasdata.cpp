#include "gas_sentinel/gasdata.hpp"

#include "gas_sentinel/errors.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace gas_sentinel {

std::string_view gas_name(GasId gas) {
  switch (gas) {
    case GasId::NH3: return "NH3";
    case GasId::CO: return "CO";
    case GasId::H2S: return "H2S";
    case GasId::CO2: return "CO2";
    case GasId::CH4: return "CH4";
  }
  return "?";
}

void MixtureSample::validate() const {
  for (std::size_t j = 0; j < kGasCount; ++j) {
    if (!(ppm[j] >= 0.0) || !std::isfinite(ppm[j])) {
      throw RangeError(std::string(gas_name(kAllGases[j])) + " concentration must be >= 0");
    }
  }
}

SensorModel::SensorModel(Matrix5 sensitivity, Vec5 reference_ppm, double response_cap)
    : sensitivity_(sensitivity), reference_ppm_(reference_ppm), response_cap_(response_cap) {
  for (std::size_t i = 0; i < kGasCount; ++i) {
    const auto sensor = gas_name(kAllGases[i]);
    if (!(reference_ppm_[i] > 0.0)) {
      throw ConfigError("reference ppm for " + std::string(sensor) + " must be > 0");
    }
    for (std::size_t j = 0; j < kGasCount; ++j) {
      const double s = sensitivity_[i][j];
      if (!std::isfinite(s) || s < 0.0) {
        throw ConfigError("sensitivity of sensor " + std::string(sensor) + " to " +
                          std::string(gas_name(kAllGases[j])) + " must be finite and >= 0");
      }
      if (j != i && !(sensitivity_[i][i] > s)) {
        throw ConfigError("sensor " + std::string(sensor) + " is not most sensitive to its own gas");
      }
    }
  }
  if (!(response_cap_ > 0.0)) throw ConfigError("response cap must be > 0");
}

Vec5 SensorModel::respond(const MixtureSample& mixture) const {
  mixture.validate();
  Vec5 out{};
  for (std::size_t i = 0; i < kGasCount; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < kGasCount; ++j) {
      r += sensitivity_[i][j] * (mixture.ppm[j] / reference_ppm_[j]);
    }
    out[i] = std::min(response_cap_, r);
  }
  return out;
}

namespace {

struct Constraint {
  Eigen::Matrix<double, 5, 1> a;  // a . s >= b
  double b;
};

// min 1/2 s'Hs - c's subject to a_k . s >= b_k, by enumerating active sets.
// Every strictly convex QP optimum is the KKT point of its own active set,
// so the feasible candidate with the lowest objective is the optimum.
std::optional<Eigen::Matrix<double, 5, 1>> solve_small_qp(const Eigen::Matrix<double, 5, 5>& H,
                                                          const Eigen::Matrix<double, 5, 1>& c,
                                                          const std::vector<Constraint>& cons) {
  const std::size_t k_total = cons.size();
  std::optional<Eigen::Matrix<double, 5, 1>> best;
  double best_obj = std::numeric_limits<double>::infinity();
  constexpr double kFeasTol = 1e-12;

  for (std::uint32_t mask = 0; mask < (1u << k_total); ++mask) {
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < k_total; ++k) {
      if (mask & (1u << k)) active.push_back(k);
    }
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    kkt.topLeftCorner(5, 5) = H;
    rhs.head(5) = c;
    for (std::size_t r = 0; r < active.size(); ++r) {
      const Eigen::Index row = 5 + static_cast<Eigen::Index>(r);
      kkt.block(row, 0, 1, 5) = cons[active[r]].a.transpose();
      kkt.block(0, row, 5, 1) = -cons[active[r]].a;
      rhs(row) = cons[active[r]].b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::Matrix<double, 5, 1> s = sol.head(5);
    bool feasible = true;
    for (const auto& con : cons) {
      if (con.a.dot(s) < con.b - kFeasTol) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    const double obj = 0.5 * s.dot(H * s) - c.dot(s);
    if (obj < best_obj - 1e-15) {
      best_obj = obj;
      best = s;
    }
  }
  return best;
}

std::string sensor_label(std::size_t i) {
  return "sensor row " + std::to_string(i) + " (" + std::string(gas_name(kAllGases[i])) + ")";
}

}  // namespace

SensorModel fit_sensitivity_matrix(std::span<const FixtureRow> fixture, const FitOptions& options) {
  if (fixture.size() < kGasCount) {
    throw FitError("fixture needs at least 5 rows, got " + std::to_string(fixture.size()));
  }
  for (double c : options.reference_ppm) {
    if (!(c > 0.0)) throw FitError("reference ppm must be > 0");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(fixture.size());
  Eigen::MatrixXd design(rows, 5);
  Eigen::MatrixXd responses(rows, 5);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = fixture[static_cast<std::size_t>(r)];
    row.mixture.validate();
    for (Eigen::Index j = 0; j < 5; ++j) {
      design(r, j) = row.mixture.ppm[static_cast<std::size_t>(j)] /
                     options.reference_ppm[static_cast<std::size_t>(j)];
      responses(r, j) = row.response[static_cast<std::size_t>(j)];
    }
  }

  for (Eigen::Index i = 0; i < 5; ++i) {
    const double lo = responses.col(i).minCoeff();
    const double hi = responses.col(i).maxCoeff();
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
      throw FitError(sensor_label(static_cast<std::size_t>(i)) +
                     ": response is constant over the fixture, design is degenerate");
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 5 && options.min_norm_weight <= 0.0) {
    throw FitError(sensor_label(0) + ": fixture design has rank " + std::to_string(qr.rank()) +
                   " < 5; the fixture cannot separate every gas");
  }

  const Eigen::Matrix<double, 5, 5> H =
      design.transpose() * design +
      options.min_norm_weight * Eigen::Matrix<double, 5, 5>::Identity();

  Matrix5 sensitivity{};
  for (std::size_t i = 0; i < kGasCount; ++i) {
    const Eigen::Matrix<double, 5, 1> c = design.transpose() * responses.col(static_cast<Eigen::Index>(i));
    std::vector<Constraint> cons;
    for (std::size_t j = 0; j < kGasCount; ++j) {
      Constraint nonneg{Eigen::Matrix<double, 5, 1>::Zero(), 0.0};
      nonneg.a(static_cast<Eigen::Index>(j)) = 1.0;
      cons.push_back(nonneg);
    }
    for (std::size_t j = 0; j < kGasCount; ++j) {
      if (j == i) continue;
      Constraint dom{Eigen::Matrix<double, 5, 1>::Zero(), options.dominance_margin};
      dom.a(static_cast<Eigen::Index>(i)) = 1.0;
      dom.a(static_cast<Eigen::Index>(j)) = -1.0;
      cons.push_back(dom);
    }
    const auto s = solve_small_qp(H, c, cons);
    if (!s) throw FitError(sensor_label(i) + ": constrained least squares has no solution");
    for (std::size_t j = 0; j < kGasCount; ++j) {
      sensitivity[i][j] = std::max(0.0, (*s)(static_cast<Eigen::Index>(j)));
    }

    double sq = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      double pred = 0.0;
      for (std::size_t j = 0; j < kGasCount; ++j) {
        pred += sensitivity[i][j] * design(r, static_cast<Eigen::Index>(j));
      }
      pred = std::min(options.response_cap, pred);
      const double d = pred - responses(r, static_cast<Eigen::Index>(i));
      sq += d * d;
    }
    const double rmse = std::sqrt(sq / static_cast<double>(rows));
    if (rmse > options.max_rmse) {
      throw FitError(sensor_label(i) + ": fixture RMSE " + format_double(rmse) + " exceeds " +
                     format_double(options.max_rmse));
    }
  }
  try {
    return SensorModel(sensitivity, options.reference_ppm, options.response_cap);
  } catch (const ConfigError& e) {
    throw FitError(std::string("fitted model is invalid: ") + e.what());
  }
}

std::vector<FixtureRow> table1_fixture() {
  return {
      {{{50, 100, 100, 100, 2000}}, {0.053, 0.096, 0.065, 0.037, 0.121}},
      {{{50, 100, 100, 100, 5000}}, {0.081, 0.108, 0.074, 0.044, 0.263}},
      {{{50, 100, 100, 200, 2000}}, {0.096, 0.119, 0.092, 0.067, 0.125}},
      {{{50, 100, 200, 200, 5000}}, {0.121, 0.130, 0.129, 0.079, 0.274}},
      {{{50, 100, 200, 400, 2000}}, {0.145, 0.153, 0.139, 0.086, 0.123}},
  };
}

SensorModel table1_sensor_model() {
  FitOptions options;
  options.min_norm_weight = 1e-8;
  const auto fixture = table1_fixture();
  return fit_sensitivity_matrix(fixture, options);
}

Vec5 simulate_response(const SensorModel& model, const MixtureSample& mixture, double noise_sigma,
                       std::mt19937_64& rng) {
  if (!(noise_sigma >= 0.0)) throw ArgumentError("noise sigma must be >= 0");
  Vec5 out = model.respond(mixture);
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (double& r : out) r = std::max(0.0, r + noise(rng));
  }
  return out;
}

Vec5 simulate_response(const SensorModel& model, const MixtureSample& mixture, double noise_sigma,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return simulate_response(model, mixture, noise_sigma, rng);
}

GasLevels default_levels() {
  return {{{50, 100, 200}, {100, 200, 400}, {100, 200, 400}, {100, 200, 400}, {2000, 5000, 10000}}};
}

void validate_levels(const GasLevels& levels) {
  for (std::size_t j = 0; j < kGasCount; ++j) {
    const auto name = std::string(gas_name(kAllGases[j]));
    const auto& l = levels[j];
    if (l.size() != 3) {
      throw ArgumentError(name + " needs exactly 3 levels, got " + std::to_string(l.size()));
    }
    for (std::size_t k = 0; k < l.size(); ++k) {
      if (!(l[k] > 0.0) || !std::isfinite(l[k])) {
        throw ArgumentError(name + " levels must be positive");
      }
      if (k > 0 && !(l[k] > l[k - 1])) {
        throw ArgumentError(name + " levels must be strictly increasing");
      }
    }
  }
}

std::vector<TrainingPattern> Dataset::patterns() const {
  std::vector<TrainingPattern> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    TrainingPattern p{normalize_input(s.response, input_scale),
                      normalize_target(s.mixture.ppm, target_scale)};
    out.push_back(p);
  }
  return out;
}

double default_target_scale(double max_ppm) { return std::max(kDefaultTargetScale, max_ppm); }

Dataset generate_grid(const GasLevels& levels, const SensorModel& model, double noise_sigma,
                      std::uint64_t seed, std::optional<double> target_scale) {
  validate_levels(levels);
  if (!(noise_sigma >= 0.0)) throw ArgumentError("noise sigma must be >= 0");
  std::mt19937_64 rng(seed);

  Dataset ds;
  ds.samples.reserve(243);
  double max_ppm = 0.0;
  for (double a : levels[0])
    for (double b : levels[1])
      for (double c : levels[2])
        for (double d : levels[3])
          for (double e : levels[4]) {
            DatasetSample s;
            s.mixture.ppm = {a, b, c, d, e};
            s.response = simulate_response(model, s.mixture, noise_sigma, rng);
            for (double p : s.mixture.ppm) max_ppm = std::max(max_ppm, p);
            ds.samples.push_back(s);
          }

  double max_response = 0.0;
  for (const auto& s : ds.samples) {
    for (double r : s.response) max_response = std::max(max_response, r);
  }
  if (!(max_response > 0.0)) throw ArgumentError("generated dataset has no non-zero response");
  ds.input_scale = max_response;
  ds.target_scale = target_scale ? *target_scale : default_target_scale(max_ppm);
  if (ds.target_scale < max_ppm) {
    throw RangeError("target scale " + format_double(ds.target_scale) +
                     " is below the largest concentration " + format_double(max_ppm));
  }
  ds.generation = GenerationInfo{levels, seed, noise_sigma};
  return ds;
}

Vec5 normalize_input(const Vec5& response, double input_scale) {
  if (!(input_scale > 0.0)) throw ArgumentError("input scale must be > 0");
  Vec5 out{};
  for (std::size_t i = 0; i < kGasCount; ++i) {
    if (!(response[i] >= 0.0) || response[i] > input_scale) {
      throw RangeError("response " + format_double(response[i]) + " of sensor " +
                       std::string(gas_name(kAllGases[i])) + " lies outside [0, input scale " +
                       format_double(input_scale) + "]");
    }
    out[i] = response[i] / input_scale;
  }
  return out;
}

Vec5 normalize_target(const Vec5& ppm, double target_scale) {
  if (!(target_scale > 0.0)) throw ArgumentError("target scale must be > 0");
  Vec5 out{};
  for (std::size_t i = 0; i < kGasCount; ++i) {
    if (!(ppm[i] >= 0.0) || ppm[i] > target_scale) {
      throw RangeError(std::string(gas_name(kAllGases[i])) + " concentration " +
                       format_double(ppm[i]) + " exceeds target scale " +
                       format_double(target_scale));
    }
    out[i] = ppm[i] / target_scale;
  }
  return out;
}

Vec5 denormalize_output(const Vec5& y, double target_scale) {
  if (!(target_scale > 0.0)) throw ArgumentError("target scale must be > 0");
  Vec5 out{};
  for (std::size_t i = 0; i < kGasCount; ++i) {
    // Dividing by the reciprocal of the resolution keeps integers exact.
    out[i] = std::round(y[i] * target_scale / kPpmResolution) / (1.0 / kPpmResolution);
  }
  return out;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::lround(train_fraction * static_cast<double>(dataset.size())));

  Dataset train = dataset;
  Dataset test = dataset;
  train.samples.clear();
  test.samples.clear();
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_train ? train : test).samples.push_back(dataset.samples[order[k]]);
  }
  return {std::move(train), std::move(test)};
}

Dataset take_prefix(const Dataset& dataset, std::size_t count) {
  if (count == 0 || count > dataset.size()) {
    throw ArgumentError("training volume " + std::to_string(count) + " must lie in [1, " +
                        std::to_string(dataset.size()) + "]");
  }
  Dataset out = dataset;
  out.samples.resize(count);
  return out;
}

std::string metadata_path(const std::string& dataset_path) { return dataset_path + ".meta.json"; }

std::string dataset_csv(const Dataset& dataset) {
  std::string out = kDatasetHeader;
  out += '\n';
  for (const auto& s : dataset.samples) {
    for (std::size_t j = 0; j < kGasCount; ++j) {
      out += format_double(s.mixture.ppm[j]);
      out += ',';
    }
    for (std::size_t j = 0; j < kGasCount; ++j) {
      out += format_double(s.response[j]);
      out += j + 1 < kGasCount ? ',' : '\n';
    }
  }
  return out;
}

namespace {

nlohmann::json metadata_json(const Dataset& dataset) {
  nlohmann::json meta;
  meta["format"] = "gas-sentinel-dataset v1";
  meta["samples"] = dataset.size();
  meta["input_scale"] = dataset.input_scale;
  meta["target_scale"] = dataset.target_scale;
  if (dataset.generation) {
    nlohmann::json levels;
    for (std::size_t j = 0; j < kGasCount; ++j) {
      levels[std::string(gas_name(kAllGases[j]))] = dataset.generation->levels[j];
    }
    meta["levels"] = levels;
    meta["seed"] = dataset.generation->seed;
    meta["noise_sigma"] = dataset.generation->noise_sigma;
  }
  return meta;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

double parse_number(std::string_view field, const std::string& origin, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(origin + ":" + std::to_string(line) + ": bad number '" + std::string(field) +
                     "'");
  }
  return v;
}

}  // namespace

void write_dataset(const std::string& path, const Dataset& dataset) {
  write_text(path, dataset_csv(dataset));
  write_text(metadata_path(path), metadata_json(dataset).dump(2) + "\n");
}

Dataset parse_dataset_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(origin + ":1: empty dataset file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDatasetHeader) {
    throw ParseError(origin + ":1: expected header '" + std::string(kDatasetHeader) + "'");
  }
  Dataset ds;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 2 * kGasCount) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected 10 fields, got " +
                       std::to_string(fields.size()));
    }
    DatasetSample s;
    for (std::size_t j = 0; j < kGasCount; ++j) {
      s.mixture.ppm[j] = parse_number(fields[j], origin, line_no);
      s.response[j] = parse_number(fields[kGasCount + j], origin, line_no);
      if (s.mixture.ppm[j] < 0.0 || s.response[j] < 0.0) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ": negative value");
      }
    }
    ds.samples.push_back(s);
  }
  if (ds.samples.empty()) throw ParseError(origin + ": dataset has no samples");
  double max_ppm = 0.0;
  double max_response = 0.0;
  for (const auto& s : ds.samples) {
    for (double p : s.mixture.ppm) max_ppm = std::max(max_ppm, p);
    for (double r : s.response) max_response = std::max(max_response, r);
  }
  ds.input_scale = max_response > 0.0 ? max_response : 1.0;
  ds.target_scale = default_target_scale(max_ppm);
  return ds;
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  Dataset ds = parse_dataset_csv(buffer.str(), path);

  const std::string meta_path = metadata_path(path);
  if (std::filesystem::exists(meta_path)) {
    std::ifstream meta_in(meta_path, std::ios::binary);
    nlohmann::json meta;
    try {
      meta_in >> meta;
      ds.input_scale = meta.at("input_scale").get<double>();
      ds.target_scale = meta.at("target_scale").get<double>();
      if (meta.contains("levels")) {
        GenerationInfo info;
        for (std::size_t j = 0; j < kGasCount; ++j) {
          info.levels[j] =
              meta.at("levels").at(std::string(gas_name(kAllGases[j]))).get<std::vector<double>>();
        }
        info.seed = meta.at("seed").get<std::uint64_t>();
        info.noise_sigma = meta.at("noise_sigma").get<double>();
        ds.generation = info;
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(meta_path + ": " + e.what());
    }
    if (!(ds.input_scale > 0.0) || !(ds.target_scale > 0.0)) {
      throw ParseError(meta_path + ": scales must be > 0");
    }
  }
  return ds;
}

}  // namespace gas_sentinel
