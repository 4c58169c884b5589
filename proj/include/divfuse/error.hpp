#pragma once

#include <stdexcept>
#include <string>

namespace divfuse {

// Error categories, one per failure mode named in the module contracts.
enum class errc {
  missing_file,
  parse_error,
  invalid_manifest,
  non_finite_value,
  empty_file,
  unsupported_format,
  header_data_mismatch,
  missing_data_file,
  invalid_spec,
  empty_signal,
  invalid_rate,
  no_peaks_found,
  peak_out_of_range,
  degenerate_signal,
  too_short,
  all_rows_dropped,
  too_few_samples,
  degenerate_sample,
  non_finite_loss,
  single_class_input,
  empty_features,
  width_mismatch,
  insufficient_rows,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::missing_file: return "MissingFile";
    case errc::parse_error: return "ParseError";
    case errc::invalid_manifest: return "InvalidManifest";
    case errc::non_finite_value: return "NonFiniteValue";
    case errc::empty_file: return "EmptyFile";
    case errc::unsupported_format: return "UnsupportedFormat";
    case errc::header_data_mismatch: return "HeaderDataMismatch";
    case errc::missing_data_file: return "MissingDataFile";
    case errc::invalid_spec: return "InvalidSpec";
    case errc::empty_signal: return "EmptySignal";
    case errc::invalid_rate: return "InvalidRate";
    case errc::no_peaks_found: return "NoPeaksFound";
    case errc::peak_out_of_range: return "PeakOutOfRange";
    case errc::degenerate_signal: return "DegenerateSignal";
    case errc::too_short: return "TooShort";
    case errc::all_rows_dropped: return "AllRowsDropped";
    case errc::too_few_samples: return "TooFewSamples";
    case errc::degenerate_sample: return "DegenerateSample";
    case errc::non_finite_loss: return "NonFiniteLoss";
    case errc::single_class_input: return "SingleClassInput";
    case errc::empty_features: return "EmptyFeatures";
    case errc::width_mismatch: return "WidthMismatch";
    case errc::insufficient_rows: return "InsufficientRows";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
public:
  Error(errc code, std::string detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code) {}

  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& detail) {
  throw Error(code, detail);
}

} // namespace divfuse
