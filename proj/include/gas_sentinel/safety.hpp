#pragma once

#include "gas_sentinel/gasdata.hpp"

#include <array>
#include <string>

namespace gas_sentinel {

struct SafetyBand {
  GasId gas = GasId::NH3;
  double low_ppm = 0.0;
  double high_ppm = 0.0;

  /// Throws ConfigError unless 0 < low < high.
  void validate() const;
};

using SafetyBands = std::array<SafetyBand, kGasCount>;

/// NH3 25-40, CO 35-100, H2S 50-100, CO2 5000-8000, CH4 5000-10000 ppm.
SafetyBands default_bands();

enum class Verdict { safe, warning, unsafe };

std::string to_string(Verdict verdict);

struct GasReading {
  double ppm = 0.0;
  SafetyBand band;
  Verdict verdict = Verdict::safe;
};

struct SafetyReport {
  std::array<GasReading, kGasCount> readings{};
  bool alarm = false;
};

/// safe below the band, warning inside it (edges included), unsafe above.
/// The alarm is raised when any gas is unsafe.
Verdict classify(double ppm, const SafetyBand& band);
SafetyReport interpret(const Vec5& ppm, const SafetyBands& bands = default_bands());

/// Table of gas, network output, ppm, band and verdict, plus the alarm line.
std::string render_report(const SafetyReport& report, const Vec5& network_output);

}  // namespace gas_sentinel
