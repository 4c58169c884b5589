#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "divfuse/error.hpp"
#include "divfuse/fft.hpp"
#include "divfuse/record.hpp"

namespace divfuse {

struct PreprocConfig {
  double target_rate = 500.0;    // Hz
  double denoise_theta = 0.05;   // fraction of the max spectral magnitude
  std::size_t window_len = 500;  // samples per beat window
  double peak_refractory = 0.25; // seconds

  void validate() const {
    if (!(target_rate > 0.0)) fail(errc::invalid_rate, "target_rate must be > 0");
    if (!(denoise_theta >= 0.0 && denoise_theta < 1.0))
      fail(errc::invalid_spec, "denoise_theta must be in [0, 1)");
    if (window_len < 2) fail(errc::invalid_spec, "window_len must be >= 2");
    if (!(peak_refractory >= 0.0)) fail(errc::invalid_spec, "peak_refractory must be >= 0");
  }
};

// One fixed-length window cut around a detected beat.
struct BeatWindow {
  std::vector<double> values;
  std::string source_id;
  std::size_t peak_index = 0;
};

// Fourier-domain resampling: keep (or zero-pad) the low half of the spectrum
// and invert at the new length. Exact identity when the rates match.
inline std::vector<double> resample(const std::vector<double>& signal, double from_rate,
                                    double to_rate) {
  if (signal.empty()) fail(errc::empty_signal, "resample of empty signal");
  if (!(from_rate > 0.0) || !(to_rate > 0.0)) fail(errc::invalid_rate, "rates must be > 0");
  if (signal.size() < 2) fail(errc::empty_signal, "resample needs at least 2 samples");
  if (from_rate == to_rate) return signal;

  const std::size_t n = signal.size();
  const std::size_t m = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * to_rate / from_rate));
  if (m < 1) fail(errc::invalid_rate, "target length rounds to zero");

  auto spectrum = fft_real(signal);
  std::vector<cplx> out_spec(m, cplx(0.0, 0.0));
  const std::size_t k = std::min(n, m);
  const std::size_t nyq = k / 2 + 1;
  for (std::size_t i = 0; i < nyq && i < m; ++i) out_spec[i] = spectrum[i];
  const std::size_t neg = k - nyq; // negative-frequency bins to copy
  for (std::size_t i = 1; i <= neg; ++i) out_spec[m - i] = spectrum[n - i];
  if (k % 2 == 0) {
    if (m < n) {
      // fold the two old bins that alias onto the new Nyquist
      out_spec[k / 2] = spectrum[k / 2] + spectrum[n - k / 2];
    } else if (m > n) {
      // split the old Nyquist bin between its two images
      out_spec[k / 2] *= 0.5;
      out_spec[m - k / 2] = out_spec[k / 2];
    }
  }
  auto out = ifft_real(std::move(out_spec));
  const double scale = static_cast<double>(m) / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

// Zero every spectral coefficient whose magnitude falls below
// theta * max non-DC magnitude; the DC term is always kept.
inline std::vector<double> fft_denoise(const std::vector<double>& signal, double theta) {
  if (signal.empty()) fail(errc::empty_signal, "denoise of empty signal");
  if (signal.size() < 2) fail(errc::empty_signal, "denoise needs at least 2 samples");
  if (!(theta >= 0.0 && theta < 1.0)) fail(errc::invalid_spec, "theta must be in [0, 1)");

  auto spectrum = fft_real(signal);
  double max_mag = 0.0;
  for (std::size_t k = 1; k < spectrum.size(); ++k)
    max_mag = std::max(max_mag, std::abs(spectrum[k]));
  const double cutoff = theta * max_mag;
  for (std::size_t k = 1; k < spectrum.size(); ++k)
    if (std::abs(spectrum[k]) < cutoff) spectrum[k] = cplx(0.0, 0.0);
  return ifft_real(std::move(spectrum));
}

namespace detail {

// Squared-derivative energy envelope smoothed by a ~120 ms moving average,
// edge windows averaged over their in-range part.
inline std::vector<double> detection_envelope(const std::vector<double>& signal, double rate) {
  const std::size_t n = signal.size();
  std::vector<double> energy(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = signal[i + 1] - signal[i];
    energy[i] = d * d;
  }
  const std::size_t half =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.060 * rate)));
  std::vector<double> prefix(energy.size() + 1, 0.0);
  for (std::size_t i = 0; i < energy.size(); ++i) prefix[i + 1] = prefix[i] + energy[i];
  std::vector<double> env(energy.size());
  for (std::size_t i = 0; i < energy.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(energy.size(), i + half + 1);
    env[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return env;
}

} // namespace detail

// Local maxima of the detection envelope above half its RMS, with plateau
// centers, thinned left to right by the refractory interval.
inline std::vector<std::size_t> detect_r_peaks(const std::vector<double>& signal, double rate,
                                               double refractory) {
  if (!(rate > 0.0)) fail(errc::invalid_rate, "rate must be > 0");
  if (signal.size() < 4) fail(errc::no_peaks_found, "signal too short");

  // a dynamic range many orders below the signal level is acquisition
  // flatness, not structure (transform round-trips leave ~1e-13 relative fuzz)
  const auto [min_it, max_it] = std::minmax_element(signal.begin(), signal.end());
  const double level = std::max({std::abs(*min_it), std::abs(*max_it), 1e-300});
  if (*max_it - *min_it <= 1e-10 * level) fail(errc::no_peaks_found, "flat signal");

  const auto env = detail::detection_envelope(signal, rate);
  double ms = 0.0;
  for (double e : env) ms += e * e;
  ms /= static_cast<double>(env.size());
  const double rms = std::sqrt(ms);
  if (!(rms > 0.0)) fail(errc::no_peaks_found, "flat signal");
  const double threshold = 0.5 * rms;

  std::vector<std::size_t> candidates;
  std::size_t i = 0;
  while (i < env.size()) {
    if (env[i] < threshold) {
      ++i;
      continue;
    }
    // plateau [i, j] of equal values; a maximum must fall on both sides
    std::size_t j = i;
    while (j + 1 < env.size() && env[j + 1] == env[i]) ++j;
    const bool left_ok = i == 0 || env[i - 1] < env[i];
    const bool right_ok = j + 1 == env.size() || env[j + 1] < env[i];
    if (left_ok && right_ok) candidates.push_back(i + (j - i) / 2);
    i = j + 1;
  }
  if (candidates.empty()) fail(errc::no_peaks_found, "no envelope maxima above threshold");

  const auto min_gap = static_cast<std::size_t>(std::llround(refractory * rate));
  std::vector<std::size_t> peaks;
  for (std::size_t c : candidates) {
    if (peaks.empty() || c - peaks.back() >= std::max<std::size_t>(min_gap, 1)) {
      peaks.push_back(c);
    }
  }
  return peaks;
}

// Cut a window of exactly window_len samples centered on the peak
// (window_len/2 before, the rest after), zero-padded at the signal edges.
inline BeatWindow extract_window(const std::vector<double>& signal, std::size_t peak,
                                 std::size_t window_len) {
  if (window_len < 2) fail(errc::invalid_spec, "window_len must be >= 2");
  if (peak >= signal.size()) fail(errc::peak_out_of_range, std::to_string(peak));
  BeatWindow window;
  window.peak_index = peak;
  window.values.assign(window_len, 0.0);
  const std::ptrdiff_t start =
      static_cast<std::ptrdiff_t>(peak) - static_cast<std::ptrdiff_t>(window_len / 2);
  for (std::size_t i = 0; i < window_len; ++i) {
    const std::ptrdiff_t src = start + static_cast<std::ptrdiff_t>(i);
    if (src >= 0 && src < static_cast<std::ptrdiff_t>(signal.size()))
      window.values[i] = signal[static_cast<std::size_t>(src)];
  }
  return window;
}

// Full per-record chain: resample the selected lead to the target rate,
// denoise, detect beats, and cut one window around the median detected peak.
inline BeatWindow preprocess_record(const Record& record, const PreprocConfig& config,
                                    std::size_t lead) {
  config.validate();
  record.validate();
  if (lead >= record.leads) fail(errc::invalid_manifest, "lead index out of range");

  const auto raw = record.lead_vector(lead);
  const auto resampled = resample(raw, record.rate, config.target_rate);
  const auto clean = fft_denoise(resampled, config.denoise_theta);
  const auto peaks = detect_r_peaks(clean, config.target_rate, config.peak_refractory);
  const std::size_t median_peak = peaks[peaks.size() / 2];
  BeatWindow window = extract_window(clean, median_peak, config.window_len);
  window.source_id = record.id;
  return window;
}

} // namespace divfuse
