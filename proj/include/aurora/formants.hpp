#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aurora/error.hpp"

namespace aurora {

/// Invalid AnalysisConfig field; field() is the config key.
class ConfigError : public PreconditionError {
 public:
  ConfigError(std::string field, const std::string& what)
      : PreconditionError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct AnalysisConfig {
  double sample_rate = 16000.0;
  std::size_t frame_size = 400;  // samples
  std::size_t hop_size = 160;    // samples
  std::size_t lpc_order = 18;
  double preemphasis = 0.97;
  double threshold_db = -40.0;  // dBFS, full-scale sine = 0
  std::size_t max_formants = 4;
  double max_bandwidth_hz = 400.0;
  std::size_t n_fft = 512;  // envelope resolution, power of two >= 256

  /// 25 ms frames, 10 ms hop, order 2 + sr/1000, n_fft the next power of two
  /// at or above the frame size (minimum 512).
  static AnalysisConfig for_sample_rate(double sample_rate);

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

struct Formant {
  double freq_hz = 0.0;
  double bandwidth_hz = 0.0;

  friend bool operator==(const Formant&, const Formant&) = default;
};

struct FormantFrame {
  double t_ms = 0.0;  // frame centre
  double rms_db = 0.0;
  bool voiced = false;
  std::vector<Formant> formants;    // ascending frequency
  std::vector<double> envelope_db;  // n_fft / 2 + 1 bins from 0 to Nyquist

  friend bool operator==(const FormantFrame&, const FormantFrame&) = default;
};

/// Floor used for the level of silent frames and empty spectra.
inline constexpr double kSilenceDb = -200.0;

/// y[n] = x[n] - a x[n-1], y[0] = x[0].
std::vector<double> preemphasize(std::span<const double> frame, double a);

std::vector<double> hamming_window(std::size_t n);

/// RMS level in dBFS with a full-scale sine at 0 dB (AES17): 20 log10(rms * sqrt 2).
double rms_dbfs(std::span<const double> frame);

/// Prediction polynomial A(z) = 1 - sum_k a[k-1] z^-k.
struct LpcResult {
  std::vector<double> a;
  std::vector<double> reflection;
  double gain = 0.0;   // residual prediction-error energy
  bool valid = false;  // false for an all-zero frame (flat-spectrum sentinel)
};

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag);

/// Levinson-Durbin recursion on the autocorrelation sequence r[0..p].
LpcResult levinson_durbin(std::span<const double> r);

/// Autocorrelation-method LPC of an already windowed frame.
LpcResult lpc_coefficients(std::span<const double> windowed, std::size_t order);

/// Complex-conjugate root pairs of A(z) turned into (frequency, bandwidth),
/// filtered to 90 Hz .. sr/2 - 50 Hz and bandwidth <= max_bandwidth_hz,
/// ascending, at most max_formants. nullopt if root finding fails.
std::optional<std::vector<Formant>> formants_from_lpc(std::span<const double> a, double sample_rate,
                                                      std::size_t max_formants = 4,
                                                      double max_bandwidth_hz = 400.0);

/// 20 log10(sqrt(gain) / |A(e^jw)|) at n_fft/2 + 1 frequencies from 0 to Nyquist.
std::vector<double> lpc_envelope(std::span<const double> a, double gain, std::size_t n_fft);

/// Per-hop formant analysis. Stateful only in its sample buffer; feed blocks of
/// any size and collect the frames they complete.
class FormantTracker {
 public:
  explicit FormantTracker(AnalysisConfig config);

  const AnalysisConfig& config() const noexcept { return config_; }

  void push(std::span<const float> samples, std::vector<FormantFrame>& out);
  std::vector<FormantFrame> push(std::span<const float> samples);

  /// Analyses one frame. If root finding fails the frame carries no formants
  /// and `root_failure` (when given) is set.
  FormantFrame analyze(std::span<const double> frame, double t_ms, bool* root_failure = nullptr) const;

  /// Frames skipped because polynomial root finding failed.
  std::uint64_t dropped_frames() const noexcept { return dropped_; }
  std::uint64_t frames_emitted() const noexcept { return next_frame_; }

 private:
  AnalysisConfig config_;
  std::vector<double> window_;
  std::vector<double> buffer_;
  std::uint64_t next_frame_ = 0;
  std::uint64_t dropped_ = 0;
};

/// Offline tracking of a whole signal; only complete frames are analysed.
std::vector<FormantFrame> track(std::span<const float> samples, const AnalysisConfig& config);

/// Test and demo source: impulse train at f0 through a glottal low-pass, a
/// cascade of two-pole resonators and lip radiation. Peak-normalised to `peak`.
struct VowelSegment {
  std::vector<Formant> resonances;
  double duration_s = 1.0;
};

std::vector<float> synthesize_vowels(std::span<const VowelSegment> segments, double sample_rate,
                                     double f0_hz = 120.0, double peak = 0.5);
std::vector<float> synthesize_vowel(std::span<const Formant> resonances, double sample_rate,
                                    double duration_s, double f0_hz = 120.0, double peak = 0.5);

}  // namespace aurora
