#pragma once

// Reference implementations used as test oracles. They are written
// independently of the library: weights are addressed through explicit
// (layer, destination, source) indices and arithmetic runs in long double.

#include "gas_sentinel/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using gas_sentinel::NetworkConfig;
using gas_sentinel::TrainingPattern;
using gas_sentinel::Vec5;

inline std::size_t count_connections(const std::vector<std::size_t>& sizes) {
  std::size_t count = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    for (std::size_t dst = 0; dst < sizes[l]; ++dst) {
      for (std::size_t src = 0; src < sizes[l - 1]; ++src) ++count;
      ++count;  // bias
    }
  }
  return count;
}

// Index of weight from `src` (== sizes[l-1] for the bias) into `dst` of layer l.
inline std::size_t weight_index(const std::vector<std::size_t>& sizes, std::size_t l,
                                std::size_t dst, std::size_t src) {
  std::size_t offset = 0;
  for (std::size_t k = 1; k < l; ++k) offset += (sizes[k - 1] + 1) * sizes[k];
  return offset + dst * (sizes[l - 1] + 1) + src;
}

inline std::vector<long double> forward(const std::vector<std::size_t>& sizes,
                                        const std::vector<double>& w,
                                        const std::vector<long double>& input) {
  std::vector<long double> y = input;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    std::vector<long double> next(sizes[l]);
    for (std::size_t dst = 0; dst < sizes[l]; ++dst) {
      long double v = w[weight_index(sizes, l, dst, sizes[l - 1])];
      for (std::size_t src = 0; src < sizes[l - 1]; ++src) {
        v += static_cast<long double>(w[weight_index(sizes, l, dst, src)]) * y[src];
      }
      next[dst] = 1.0L / (1.0L + std::exp(-v));
    }
    y = std::move(next);
  }
  return y;
}

inline long double pattern_sse(const std::vector<std::size_t>& sizes, const std::vector<double>& w,
                               const TrainingPattern& p) {
  const auto out = forward(sizes, w, {p.input.begin(), p.input.end()});
  long double s = 0.0L;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const long double d = out[i] - p.target[i];
    s += d * d;
  }
  return 0.5L * s;
}

// Central finite difference of the pattern SSE with respect to every weight.
inline std::vector<double> finite_difference(const std::vector<std::size_t>& sizes,
                                             std::vector<double> w, const TrainingPattern& p,
                                             double step) {
  std::vector<double> out(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double orig = w[k];
    w[k] = orig + step;
    const long double up = pattern_sse(sizes, w, p);
    w[k] = orig - step;
    const long double down = pattern_sse(sizes, w, p);
    w[k] = orig;
    out[k] = static_cast<double>((up - down) / (2.0L * step));
  }
  return out;
}

inline bool gradient_close(double analytic, double numeric, double rel = 1e-6, double abs = 1e-8) {
  const double diff = std::abs(analytic - numeric);
  return diff <= abs || diff <= rel * std::max(std::abs(analytic), std::abs(numeric));
}

// Empirical cdf distances by brute force: count at every pooled point.
struct Distances {
  double d_plus = 0.0;
  double d_minus = 0.0;
};

inline Distances ks_brute_force(const std::vector<double>& x, const std::vector<double>& y) {
  Distances d;
  std::vector<double> pooled(x);
  pooled.insert(pooled.end(), y.begin(), y.end());
  for (double t : pooled) {
    double cx = 0.0;
    double cy = 0.0;
    for (double v : x) cx += v <= t ? 1.0 : 0.0;
    for (double v : y) cy += v <= t ? 1.0 : 0.0;
    const double fx = cx / static_cast<double>(x.size());
    const double fy = cy / static_cast<double>(y.size());
    d.d_plus = std::max(d.d_plus, fx - fy);
    d.d_minus = std::max(d.d_minus, fy - fx);
  }
  return d;
}

inline TrainingPattern random_pattern(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TrainingPattern p;
  for (auto& v : p.input) v = unit(rng);
  for (auto& v : p.target) v = unit(rng);
  return p;
}

inline std::vector<TrainingPattern> random_patterns(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TrainingPattern> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_pattern(rng));
  return out;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gas_sentinel_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
