#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "divfuse/error.hpp"

namespace divfuse {

enum class ClassLabel { Healthy, Arrhythmia };

inline const char* to_string(ClassLabel label) {
  return label == ClassLabel::Healthy ? "healthy" : "arrhythmia";
}

inline ClassLabel class_label_from_string(const std::string& s) {
  if (s == "healthy") return ClassLabel::Healthy;
  if (s == "arrhythmia") return ClassLabel::Arrhythmia;
  fail(errc::parse_error, "unknown class label '" + s + "'");
}

// One multi-lead recording. Signal is stored lead-major: leads x samples.
struct Record {
  std::string id;
  std::vector<double> signal; // row-major, leads x samples
  std::size_t leads = 0;
  std::size_t samples = 0;
  double rate = 0.0; // Hz
  ClassLabel label = ClassLabel::Healthy;

  double at(std::size_t lead, std::size_t sample) const {
    return signal[lead * samples + sample];
  }

  std::vector<double> lead_vector(std::size_t lead) const {
    if (lead >= leads) fail(errc::invalid_manifest, "lead index out of range");
    return {signal.begin() + static_cast<std::ptrdiff_t>(lead * samples),
            signal.begin() + static_cast<std::ptrdiff_t>((lead + 1) * samples)};
  }

  void validate() const {
    if (!(rate > 0.0)) fail(errc::invalid_rate, "rate must be > 0");
    if (leads < 1) fail(errc::invalid_spec, "record needs at least one lead");
    if (samples < 2) fail(errc::invalid_spec, "record needs at least two samples");
    if (signal.size() != leads * samples)
      fail(errc::invalid_spec, "signal size does not match leads x samples");
    for (double v : signal)
      if (!std::isfinite(v)) fail(errc::non_finite_value, "non-finite amplitude");
  }
};

} // namespace divfuse
