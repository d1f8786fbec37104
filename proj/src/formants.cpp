#include "aurora/formants.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace aurora {

namespace {

bool is_power_of_two(std::size_t n) { return n && (n & (n - 1)) == 0; }

double to_db(double amplitude) {
  return amplitude > 0.0 ? std::max(kSilenceDb, 20.0 * std::log10(amplitude)) : kSilenceDb;
}

}  // namespace

AnalysisConfig AnalysisConfig::for_sample_rate(double sample_rate) {
  AnalysisConfig c;
  c.sample_rate = sample_rate;
  c.frame_size = static_cast<std::size_t>(std::lround(0.025 * sample_rate));
  c.hop_size = static_cast<std::size_t>(std::lround(0.010 * sample_rate));
  c.lpc_order = 2 + static_cast<std::size_t>(std::lround(sample_rate / 1000.0));
  c.n_fft = 512;
  while (c.n_fft < c.frame_size) c.n_fft *= 2;
  return c;
}

void AnalysisConfig::validate() const {
  if (!(sample_rate >= 1000.0) || !(sample_rate <= 384000.0))
    throw ConfigError("sample_rate", "must be between 1000 and 384000 Hz");
  if (lpc_order < 2) throw ConfigError("lpc_order", "must be at least 2");
  if (lpc_order > 64) throw ConfigError("lpc_order", "must be at most 64");
  if (frame_size < lpc_order + 1) throw ConfigError("frame_size", "must be at least lpc_order + 1");
  if (hop_size < 1) throw ConfigError("hop_size", "must be at least 1");
  if (hop_size > frame_size) throw ConfigError("hop_size", "must not exceed frame_size");
  if (!(preemphasis >= 0.0 && preemphasis < 1.0)) throw ConfigError("preemphasis", "must be in [0, 1)");
  if (!std::isfinite(threshold_db)) throw ConfigError("threshold_db", "must be finite");
  if (max_formants < 1) throw ConfigError("max_formants", "must be at least 1");
  if (!(max_bandwidth_hz > 0.0)) throw ConfigError("max_bandwidth_hz", "must be positive");
  if (!is_power_of_two(n_fft) || n_fft < 256) throw ConfigError("n_fft", "must be a power of two >= 256");
}

std::vector<double> preemphasize(std::span<const double> frame, double a) {
  std::vector<double> y(frame.size());
  if (frame.empty()) return y;
  y[0] = frame[0];
  for (std::size_t n = 1; n < frame.size(); ++n) y[n] = frame[n] - a * frame[n - 1];
  return y;
}

std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
  return w;
}

double rms_dbfs(std::span<const double> frame) {
  if (frame.empty()) return kSilenceDb;
  double sum = 0.0;
  for (double v : frame) sum += v * v;
  return to_db(std::sqrt(2.0 * sum / static_cast<double>(frame.size())));
}

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag && lag < x.size(); ++lag) {
    double s = 0.0;
    for (std::size_t n = lag; n < x.size(); ++n) s += x[n] * x[n - lag];
    r[lag] = s;
  }
  return r;
}

LpcResult levinson_durbin(std::span<const double> r) {
  const std::size_t p = r.empty() ? 0 : r.size() - 1;
  LpcResult res;
  res.a.assign(p, 0.0);
  res.reflection.assign(p, 0.0);
  if (r.empty() || !(r[0] > 0.0)) return res;  // silent frame: flat sentinel

  std::vector<double> prev(p, 0.0);
  double err = r[0];
  for (std::size_t i = 1; i <= p; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc -= res.a[j - 1] * r[i - j];
    const double k = acc / err;
    // Numerically singular autocorrelation: keep the stable lower-order predictor.
    if (!(std::abs(k) < 1.0)) break;
    prev = res.a;
    res.a[i - 1] = k;
    for (std::size_t j = 1; j < i; ++j) res.a[j - 1] = prev[j - 1] - k * prev[i - j - 1];
    res.reflection[i - 1] = k;
    err *= 1.0 - k * k;
  }
  res.gain = err;
  res.valid = true;
  return res;
}

LpcResult lpc_coefficients(std::span<const double> windowed, std::size_t order) {
  if (order >= windowed.size()) throw PreconditionError("lpc order must be smaller than the frame length");
  const auto r = autocorrelation(windowed, order);
  return levinson_durbin(r);
}

std::optional<std::vector<Formant>> formants_from_lpc(std::span<const double> a, double sample_rate,
                                                      std::size_t max_formants, double max_bandwidth_hz) {
  std::vector<Formant> out;
  std::size_t p = a.size();
  while (p > 0 && a[p - 1] == 0.0) --p;  // trailing zeros only add roots at the origin
  if (p == 0) return out;

  // Companion matrix of z^p - a1 z^(p-1) - ... - ap.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t k = 0; k < p; ++k) companion(0, static_cast<Eigen::Index>(k)) = a[k];
  for (std::size_t k = 1; k < p; ++k) companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k) - 1) = 1.0;
  // Already upper Hessenberg, so the Schur iteration can start directly.
  Eigen::RealSchur<Eigen::MatrixXd> schur(static_cast<Eigen::Index>(p));
  schur.computeFromHessenberg(companion, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)), false);
  if (schur.info() != Eigen::Success) return std::nullopt;
  const Eigen::MatrixXd& t = schur.matrixT();

  std::vector<std::complex<double>> roots;
  roots.reserve(p);
  for (Eigen::Index i = 0; i < t.rows();) {
    if (i + 1 < t.rows() && t(i + 1, i) != 0.0) {
      // 2x2 block: eigenvalues of [[a b] [c d]].
      const double a = t(i, i), b = t(i, i + 1), c = t(i + 1, i), d = t(i + 1, i + 1);
      const double half = 0.5 * (a + d), disc = 0.25 * (a - d) * (a - d) + b * c;
      if (disc < 0.0) {
        roots.emplace_back(half, std::sqrt(-disc));
      } else {
        roots.emplace_back(half + std::sqrt(disc), 0.0);
        roots.emplace_back(half - std::sqrt(disc), 0.0);
      }
      i += 2;
    } else {
      roots.emplace_back(t(i, i), 0.0);
      ++i;
    }
  }

  const double nyquist = sample_rate / 2.0;
  for (const auto& z : roots) {
    if (!(z.imag() > 0.0)) continue;
    const double freq = std::arg(z) * sample_rate / (2.0 * std::numbers::pi);
    const double bw = -(sample_rate / std::numbers::pi) * std::log(std::abs(z));
    if (freq < 90.0 || freq > nyquist - 50.0) continue;
    if (!(bw > 0.0) || bw > max_bandwidth_hz) continue;
    out.push_back({freq, bw});
  }
  std::sort(out.begin(), out.end(), [](const Formant& x, const Formant& y) { return x.freq_hz < y.freq_hz; });
  if (out.size() > max_formants) out.resize(max_formants);
  return out;
}

std::vector<double> lpc_envelope(std::span<const double> a, double gain, std::size_t n_fft) {
  if (!is_power_of_two(n_fft) || n_fft < 256) throw PreconditionError("n_fft must be a power of two >= 256");
  const std::size_t bins = n_fft / 2 + 1;
  std::vector<double> env(bins, kSilenceDb);
  if (!(gain > 0.0)) return env;
  const double g = std::sqrt(gain);
  // A(e^jw) on the FFT grid from the zero-padded predictor polynomial.
  std::vector<double> poly(n_fft, 0.0);
  poly[0] = 1.0;
  for (std::size_t i = 0; i < a.size() && i + 1 < n_fft; ++i) poly[i + 1] = -a[i];
  std::vector<std::complex<double>> spec;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  fft.fwd(spec, poly);
  for (std::size_t k = 0; k < bins; ++k) {
    const double mag = std::abs(spec[k]);
    env[k] = mag > 0.0 ? to_db(g / mag) : -kSilenceDb;
  }
  return env;
}

FormantTracker::FormantTracker(AnalysisConfig config) : config_(config) {
  config_.validate();
  window_ = hamming_window(config_.frame_size);
  buffer_.reserve(2 * config_.frame_size);
}

FormantFrame FormantTracker::analyze(std::span<const double> frame, double t_ms, bool* root_failure) const {
  FormantFrame f;
  f.t_ms = t_ms;
  f.rms_db = rms_dbfs(frame);
  if (root_failure) *root_failure = false;

  std::vector<double> x = preemphasize(frame, config_.preemphasis);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= window_[i];
  const LpcResult lpc = lpc_coefficients(x, config_.lpc_order);
  f.envelope_db = lpc_envelope(lpc.a, lpc.gain, config_.n_fft);

  f.voiced = lpc.valid && f.rms_db >= config_.threshold_db;
  if (!f.voiced) return f;
  auto formants = formants_from_lpc(lpc.a, config_.sample_rate, config_.max_formants, config_.max_bandwidth_hz);
  if (!formants) {
    if (root_failure) *root_failure = true;
    return f;
  }
  f.formants = std::move(*formants);
  return f;
}

void FormantTracker::push(std::span<const float> samples, std::vector<FormantFrame>& out) {
  buffer_.insert(buffer_.end(), samples.begin(), samples.end());
  const std::size_t n = config_.frame_size, hop = config_.hop_size;
  std::size_t start = 0;
  while (buffer_.size() - start >= n) {
    const double centre = static_cast<double>(next_frame_ * hop) + 0.5 * static_cast<double>(n);
    bool failed = false;
    FormantFrame f = analyze(std::span<const double>(buffer_.data() + start, n),
                             1000.0 * centre / config_.sample_rate, &failed);
    ++next_frame_;
    start += hop;
    if (failed)
      ++dropped_;
    else
      out.push_back(std::move(f));
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(start));
}

std::vector<FormantFrame> FormantTracker::push(std::span<const float> samples) {
  std::vector<FormantFrame> out;
  push(samples, out);
  return out;
}

std::vector<FormantFrame> track(std::span<const float> samples, const AnalysisConfig& config) {
  FormantTracker tracker(config);
  return tracker.push(samples);
}

namespace {

// Two-pole resonator with unity gain at DC.
struct Resonator {
  double a = 1.0, b = 0.0, c = 0.0;
  double y1 = 0.0, y2 = 0.0;

  void set(double freq, double bw, double sr) {
    c = -std::exp(-2.0 * std::numbers::pi * bw / sr);
    b = 2.0 * std::exp(-std::numbers::pi * bw / sr) * std::cos(2.0 * std::numbers::pi * freq / sr);
    a = 1.0 - b - c;
  }
  double step(double x) {
    const double y = a * x + b * y1 + c * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

}  // namespace

std::vector<float> synthesize_vowels(std::span<const VowelSegment> segments, double sample_rate, double f0_hz,
                                     double peak) {
  std::vector<double> y;
  Resonator glottal;
  glottal.set(0.0, 100.0, sample_rate);
  std::vector<Resonator> tract;
  double phase = 1.0, prev = 0.0;
  for (const auto& seg : segments) {
    tract.resize(seg.resonances.size());
    for (std::size_t i = 0; i < tract.size(); ++i)
      tract[i].set(seg.resonances[i].freq_hz, seg.resonances[i].bandwidth_hz, sample_rate);
    const auto n = static_cast<std::size_t>(std::lround(seg.duration_s * sample_rate));
    for (std::size_t i = 0; i < n; ++i) {
      double x = 0.0;
      phase += f0_hz / sample_rate;
      if (phase >= 1.0) {
        phase -= 1.0;
        x = 1.0;
      }
      double v = glottal.step(x);
      for (auto& r : tract) v = r.step(v);
      y.push_back(v - prev);  // lip radiation
      prev = v;
    }
  }
  double maxabs = 0.0;
  for (double v : y) maxabs = std::max(maxabs, std::abs(v));
  std::vector<float> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = static_cast<float>(maxabs > 0.0 ? peak * y[i] / maxabs : 0.0);
  return out;
}

std::vector<float> synthesize_vowel(std::span<const Formant> resonances, double sample_rate, double duration_s,
                                    double f0_hz, double peak) {
  const VowelSegment seg{{resonances.begin(), resonances.end()}, duration_s};
  return synthesize_vowels(std::span<const VowelSegment>(&seg, 1), sample_rate, f0_hz, peak);
}

}  // namespace aurora
