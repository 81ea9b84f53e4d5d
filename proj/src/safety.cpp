#include "gas_sentinel/safety.hpp"

#include "gas_sentinel/errors.hpp"

#include <cmath>
#include <cstdio>

namespace gas_sentinel {

void SafetyBand::validate() const {
  if (!(low_ppm > 0.0 && high_ppm > low_ppm)) {
    throw ConfigError("safety band for " + std::string(gas_name(gas)) +
                      " needs 0 < low < high");
  }
}

SafetyBands default_bands() {
  return {{{GasId::NH3, 25.0, 40.0},
           {GasId::CO, 35.0, 100.0},
           {GasId::H2S, 50.0, 100.0},
           {GasId::CO2, 5000.0, 8000.0},
           {GasId::CH4, 5000.0, 10000.0}}};
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::safe: return "Safe";
    case Verdict::warning: return "Warning";
    case Verdict::unsafe: return "Unsafe";
  }
  return "?";
}

Verdict classify(double ppm, const SafetyBand& band) {
  if (ppm < band.low_ppm) return Verdict::safe;
  if (ppm <= band.high_ppm) return Verdict::warning;
  return Verdict::unsafe;
}

SafetyReport interpret(const Vec5& ppm, const SafetyBands& bands) {
  SafetyReport report;
  for (std::size_t i = 0; i < kGasCount; ++i) {
    bands[i].validate();
    if (bands[i].gas != kAllGases[i]) throw ConfigError("safety bands are out of gas order");
    if (!(ppm[i] >= 0.0) || !std::isfinite(ppm[i])) {
      throw RangeError(std::string(gas_name(kAllGases[i])) + " ppm must be >= 0");
    }
    auto& r = report.readings[i];
    r.ppm = ppm[i];
    r.band = bands[i];
    r.verdict = classify(ppm[i], bands[i]);
    report.alarm = report.alarm || r.verdict == Verdict::unsafe;
  }
  return report;
}

std::string render_report(const SafetyReport& report, const Vec5& network_output) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-5s %10s %14s %17s  %s\n", "gas", "output", "ppm", "band",
                "verdict");
  out += line;
  for (std::size_t i = 0; i < kGasCount; ++i) {
    const auto& r = report.readings[i];
    char band[40];
    std::snprintf(band, sizeof band, "%g-%g", r.band.low_ppm, r.band.high_ppm);
    std::snprintf(line, sizeof line, "%-5s %10.4f %14.6g %17s  %s\n",
                  std::string(gas_name(kAllGases[i])).c_str(), network_output[i], r.ppm, band,
                  to_string(r.verdict).c_str());
    out += line;
  }
  out += report.alarm ? "alarm: RAISED\n" : "alarm: none\n";
  return out;
}

}  // namespace gas_sentinel
