#include "aurora/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <thread>

#include "aurora/bundle.hpp"
#include "aurora/corpus.hpp"
#include "aurora/export.hpp"
#include "aurora/formants.hpp"
#include "aurora/frame_csv.hpp"
#include "aurora/inversion.hpp"
#include "aurora/lut.hpp"
#include "aurora/service.hpp"
#include "aurora/synth.hpp"
#include "aurora/wav.hpp"

namespace aurora {

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string("cannot open ") + what + " " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error("write failed: " + path);
}

/// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, std::ostream& out, std::string_view text) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_file(path, text);
}

// Optional overrides for AnalysisConfig, shared by `track` and `serve`.
struct ConfigFlags {
  std::optional<double> sample_rate;
  std::optional<std::size_t> frame_size, hop_size, lpc_order, max_formants, n_fft;
  std::optional<double> preemphasis, threshold_db, max_bandwidth_hz;

  void add_to(CLI::App* app, bool with_sample_rate) {
    if (with_sample_rate) app->add_option("--sample_rate,--sample-rate", sample_rate, "Capture sample rate in Hz");
    app->add_option("--frame_size,--frame-size", frame_size, "Analysis frame length in samples (default 25 ms)");
    app->add_option("--hop_size,--hop-size", hop_size, "Hop between frames in samples (default 10 ms)");
    app->add_option("--lpc_order,--lpc-order", lpc_order, "LPC order (default 2 + sample rate / 1000)");
    app->add_option("--preemphasis", preemphasis, "Pre-emphasis coefficient in [0, 1)");
    app->add_option("--threshold_db,--threshold-db", threshold_db, "Voicing gate in dBFS RMS");
    app->add_option("--max_formants,--max-formants", max_formants, "Formants reported per frame, 1..4");
    app->add_option("--max_bandwidth_hz,--max-bandwidth-hz", max_bandwidth_hz, "Widest accepted formant bandwidth");
    app->add_option("--n_fft,--n-fft", n_fft, "Envelope FFT size, power of two >= 256");
  }

  AnalysisConfig resolve(double default_rate) const {
    AnalysisConfig c = AnalysisConfig::for_sample_rate(sample_rate.value_or(default_rate));
    if (frame_size) c.frame_size = *frame_size;
    if (hop_size) c.hop_size = *hop_size;
    if (lpc_order) c.lpc_order = *lpc_order;
    if (preemphasis) c.preemphasis = *preemphasis;
    if (threshold_db) c.threshold_db = *threshold_db;
    if (max_formants) c.max_formants = *max_formants;
    if (max_bandwidth_hz) c.max_bandwidth_hz = *max_bandwidth_hz;
    if (n_fft) c.n_fft = *n_fft;
    c.validate();
    return c;
  }
};

struct RangeFlags {
  std::optional<double> f1_lo, f1_hi, f2_lo, f2_hi;

  void add_to(CLI::App* app) {
    app->add_option("--f1-lo", f1_lo, "Lowest F1 in Hz (default: model 5th percentile)");
    app->add_option("--f1-hi", f1_hi, "Highest F1 in Hz (default: model 95th percentile)");
    app->add_option("--f2-lo", f2_lo, "Lowest F2 in Hz (default: model 5th percentile)");
    app->add_option("--f2-hi", f2_hi, "Highest F2 in Hz (default: model 95th percentile)");
  }
};

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string corpus, out;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const std::string bytes = read_file(a.corpus, "corpus file");
  std::istringstream in(bytes);
  const Corpus corpus = parse_corpus(in);
  TrainingReport report;
  const ModelBundle bundle = train_model(corpus, bytes, &report);
  save_bundle(a.out, bundle);

  if (!report.gpa_converged) err << "warning: Procrustes alignment did not converge\n";
  out << "tokens: " << bundle.regression.n_train << "\n";
  out << "gpa_iterations: " << report.gpa_iterations << "\n";
  const auto ratios = bundle.pca.variance_ratios();
  double cumulative = 0.0;
  out << "component,variance_explained_pct,cumulative_pct\n";
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    cumulative += ratios[k];
    out << "PC" << k + 1 << "," << fixed(100.0 * ratios[k], 4) << "," << fixed(100.0 * cumulative, 4) << "\n";
  }
  out << "target,r_squared\n";
  for (std::size_t t = 0; t < kTargetCount; ++t)
    out << kTargetNames[t] << "," << fixed(bundle.regression.r_squared[t], 7) << "\n";
  out << "f1_range_hz: " << fixed(bundle.regression.f1_range.low, 1) << " - "
      << fixed(bundle.regression.f1_range.high, 1) << "\n";
  out << "f2_range_hz: " << fixed(bundle.regression.f2_range.low, 1) << " - "
      << fixed(bundle.regression.f2_range.high, 1) << "\n";
  err << "wrote " << a.out << "\n";
  return kExitOk;
}

struct InvertArgs {
  std::string model, out, format = "csv";
  double f1 = 0.0, f2 = 0.0;
};

int cmd_invert(const InvertArgs& a, std::ostream& out, std::ostream& err) {
  const ModelBundle bundle = load_bundle(a.model);
  const TongueContour c = invert(bundle, a.f1, a.f2);
  if (c.extrapolated)
    err << "warning: (" << a.f1 << ", " << a.f2 << ") Hz lies outside the training range F1 "
        << bundle.regression.f1_range.low << "-" << bundle.regression.f1_range.high << ", F2 "
        << bundle.regression.f2_range.low << "-" << bundle.regression.f2_range.high
        << " Hz; the contour is extrapolated\n";
  if (a.format == "svg") {
    emit(a.out, out, contour_svg(c));
  } else {
    std::ostringstream s;
    write_contour_csv(s, c);
    emit(a.out, out, s.str());
  }
  return kExitOk;
}

struct GridArgs {
  std::string model, svg, csv;
  std::size_t steps = 4;
  RangeFlags ranges;
};

int cmd_grid(const GridArgs& a, std::ostream& out, std::ostream&) {
  const ModelBundle bundle = load_bundle(a.model);
  const auto& r = bundle.regression;
  const ContourGrid g = grid_predict(bundle, a.ranges.f1_lo.value_or(r.f1_range.low),
                                     a.ranges.f1_hi.value_or(r.f1_range.high), a.ranges.f2_lo.value_or(r.f2_range.low),
                                     a.ranges.f2_hi.value_or(r.f2_range.high), a.steps);
  if (!a.svg.empty()) write_file(a.svg, grid_svg(g));
  if (!a.csv.empty() || a.svg.empty()) {
    std::ostringstream s;
    write_grid_csv(s, g);
    emit(a.csv, out, s.str());
  }
  return kExitOk;
}

struct EvalArgs {
  std::string model, corpus, svg;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const ModelBundle bundle = load_bundle(a.model);
  const Corpus raw = load_corpus(a.corpus);
  const Corpus centered = raw.centered() ? raw : center_by_speaker(raw);
  const auto evals = evaluate_item_means(bundle, centered);
  out << "item,n_tokens,mean_f1_hz,mean_f2_hz,rmsd_mm,max_knot_mm\n";
  double worst = 0.0;
  for (const auto& e : evals) {
    const double max_knot = *std::max_element(e.knot_distance_mm.begin(), e.knot_distance_mm.end());
    worst = std::max(worst, e.rmsd_mm);
    out << e.item << "," << e.n_tokens << "," << fixed(e.mean_f1_hz, 1) << "," << fixed(e.mean_f2_hz, 1) << ","
        << fixed(e.rmsd_mm, 5) << "," << fixed(max_knot, 5) << "\n";
  }
  if (!a.svg.empty()) {
    write_file(a.svg, evaluation_svg(evals));
    err << "wrote " << a.svg << "\n";
  }
  err << "items: " << evals.size() << ", worst rmsd " << fixed(worst, 5) << " mm\n";
  return kExitOk;
}

struct LutArgs {
  std::string model, out;
  double step = 10.0;
  std::size_t max_cells = kLutDefaultCellCap;
  RangeFlags ranges;
};

int cmd_lut(const LutArgs& a, std::ostream& out, std::ostream& err) {
  const ModelBundle bundle = load_bundle(a.model);
  LutRanges r = default_lut_ranges(bundle, a.step);
  if (a.ranges.f1_lo) r.f1_lo = *a.ranges.f1_lo;
  if (a.ranges.f1_hi) r.f1_hi = *a.ranges.f1_hi;
  if (a.ranges.f2_lo) r.f2_lo = *a.ranges.f2_lo;
  if (a.ranges.f2_hi) r.f2_hi = *a.ranges.f2_hi;
  const auto t0 = std::chrono::steady_clock::now();
  const LookupTable lut = compile_lut(bundle, r, a.max_cells);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_lut(a.out, lut);
  const auto& h = lut.header();
  out << "grid: " << h.f1.count << " x " << h.f2.count << "\n";
  out << "f1_hz: " << h.f1.lo << " - " << h.f1.hi << " step " << h.f1.step << "\n";
  out << "f2_hz: " << h.f2.lo << " - " << h.f2.hi << " step " << h.f2.step << "\n";
  out << "digest: " << digest_to_hex(h.model_digest) << "\n";
  err << "compiled " << lut.cells() << " contours in " << fixed(secs, 2) << " s, wrote " << a.out << "\n";
  return kExitOk;
}

struct InspectArgs {
  std::string lut;
};

int cmd_inspect(const InspectArgs& a, std::ostream& out, std::ostream&) {
  const LutHeader h = inspect_lut(a.lut);
  out << "version: " << h.version << "\n";
  out << "grid: " << h.f1.count << " x " << h.f2.count << "\n";
  out << "f1_hz: " << h.f1.lo << " - " << h.f1.hi << " step " << h.f1.step << "\n";
  out << "f2_hz: " << h.f2.lo << " - " << h.f2.hi << " step " << h.f2.step << "\n";
  out << "points: " << h.points_per_contour << "\n";
  out << "digest: " << digest_to_hex(h.model_digest) << "\n";
  return kExitOk;
}

struct TrackArgs {
  std::string wav, out;
  ConfigFlags config;
};

int cmd_track(const TrackArgs& a, std::ostream& out, std::ostream& err) {
  const WavAudio audio = read_wav(a.wav);
  ConfigFlags flags = a.config;
  flags.sample_rate = audio.sample_rate;
  const AnalysisConfig cfg = flags.resolve(audio.sample_rate);
  const auto frames = track(audio.samples, cfg);
  std::ostringstream s;
  write_frame_csv(s, frames);
  emit(a.out, out, s.str());
  const auto voiced = std::count_if(frames.begin(), frames.end(), [](const FormantFrame& f) { return f.voiced; });
  err << frames.size() << " frames, " << voiced << " voiced\n";
  return kExitOk;
}

struct SynthArgs {
  std::string out, truth;
  std::size_t speakers = 40, reps = 5;
  double noise_mm = 0.5, offset_mm = 5.0, jitter_hz = 0.0;
  bool follow_map = false;
  std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a, std::ostream&, std::ostream& err) {
  SynthSpec spec;
  spec.n_speakers = a.speakers;
  spec.tokens_per_item = a.reps;
  spec.noise_sd_mm = a.noise_mm;
  spec.speaker_offset_sd_mm = a.offset_mm;
  spec.formant_jitter_sd_hz = a.jitter_hz;
  if (a.follow_map || a.jitter_hz > 0.0) spec.forward_map = default_forward_map();
  const SynthResult r = synth_corpus(spec, a.seed);
  save_corpus(a.out, r.corpus);

  const std::string truth_path = a.truth.empty() ? a.out + ".truth.json" : a.truth;
  nlohmann::json truth;
  truth["seed"] = a.seed;
  truth["spec"] = {{"speakers", a.speakers},       {"reps", a.reps},          {"noise_mm", a.noise_mm},
                   {"offset_mm", a.offset_mm},     {"jitter_hz", a.jitter_hz}, {"forward_map", spec.forward_map.has_value()}};
  nlohmann::json offsets = nlohmann::json::object();
  const auto speakers = r.corpus.speakers();
  for (std::size_t i = 0; i < speakers.size() && i < r.truth.speaker_offsets.size(); ++i)
    offsets[speakers[i]] = {r.truth.speaker_offsets[i].x, r.truth.speaker_offsets[i].y};
  truth["speaker_offsets_mm"] = std::move(offsets);
  nlohmann::json clean = nlohmann::json::array();
  for (const auto& k : r.truth.clean_knots) clean.push_back(flatten(k));
  truth["clean_knots_mm"] = std::move(clean);
  write_file(truth_path, truth.dump(1) + "\n");
  err << "wrote " << r.corpus.records().size() << " tokens to " << a.out << ", ground truth to " << truth_path << "\n";
  return kExitOk;
}

struct VowelArgs {
  std::string out;
  std::vector<double> formants;
  std::vector<double> bandwidths;
  double duration_s = 1.0, sample_rate = 16000.0, f0_hz = 120.0, peak = 0.5;
  bool silence = false;
};

int cmd_vowel(const VowelArgs& a, std::ostream&, std::ostream& err) {
  std::vector<float> samples;
  if (a.silence) {
    samples.assign(static_cast<std::size_t>(a.duration_s * a.sample_rate), 0.0f);
  } else {
    if (a.formants.empty()) throw PreconditionError("--formants is required unless --silence is given");
    std::vector<Formant> res;
    for (std::size_t i = 0; i < a.formants.size(); ++i) {
      const double bw = i < a.bandwidths.size() ? a.bandwidths[i] : 60.0 + 20.0 * static_cast<double>(i);
      res.push_back({a.formants[i], bw});
    }
    samples = synthesize_vowel(res, a.sample_rate, a.duration_s, a.f0_hz, a.peak);
  }
  write_wav(a.out, samples, a.sample_rate);
  err << "wrote " << samples.size() << " samples to " << a.out << "\n";
  return kExitOk;
}

struct ServeArgs {
  std::string model, lut, device = "synth:bard", address = "127.0.0.1", static_dir;
  unsigned short port = 8765;
  double run_for_s = 0.0;
  std::vector<int> highlight;
  double display_smoothing = 0.0;
  ConfigFlags config;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  const ModelBundle bundle = load_bundle(a.model);
  auto lut = std::make_shared<const LookupTable>(load_lut(a.lut));
  const std::string lut_digest = digest_to_hex(lut->header().model_digest);
  if (lut_digest != bundle.metadata.corpus_sha256)
    err << "warning: LUT digest " << lut_digest << " does not match model " << bundle.metadata.corpus_sha256
        << "; continuing with the LUT as given\n";

  SessionOptions so;
  so.config = a.config.resolve(16000.0);
  so.highlight = std::set<int>(a.highlight.begin(), a.highlight.end());
  so.display_smoothing = a.display_smoothing;
  so.device = make_audio_source(a.device)->name();  // AudioDeviceError if nothing matches

  Session session(lut, so);
  Server server(session, {a.address, a.port, a.static_dir});
  server.start();

  const auto& h = lut->header();
  out << "listening on ws://" << a.address << ":" << server.port() << "/\n";
  out << "model " << bundle.metadata.corpus_sha256 << ", LUT " << h.f1.count << " x " << h.f2.count << ", device "
      << so.device << "\n";
  out.flush();

  g_interrupted = false;
  auto prev_int = std::signal(SIGINT, on_signal);
  auto prev_term = std::signal(SIGTERM, on_signal);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(a.run_for_s);
  while (!g_interrupted && (a.run_for_s <= 0.0 || std::chrono::steady_clock::now() < deadline))
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  std::signal(SIGINT, prev_int);
  std::signal(SIGTERM, prev_term);

  server.stop();
  err << "stopped\n";
  return kExitOk;
}

template <class F>
int guarded(F&& body, std::ostream& err) {
  try {
    return body();
  } catch (const PortInUseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitPortBusy;
  } catch (const AudioDeviceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitAudioDevice;
  } catch (const LutTooLargeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: invalid option " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Formant-to-tongue-contour modelling, inversion and live biofeedback", "aurora"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "aurora 1.0");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Fit a model bundle from a token corpus CSV");
  c_train->add_option("--corpus", train.corpus, "Corpus CSV (speaker_id,item,knot*_x/y,f1_hz,f2_hz)")->required();
  c_train->add_option("--out", train.out, "Model bundle JSON to write")->required();

  InvertArgs inv;
  auto* c_invert = app.add_subcommand("invert", "Predict the tongue contour for one (F1, F2) pair");
  c_invert->add_option("--model", inv.model, "Model bundle JSON")->required();
  c_invert->add_option("--f1", inv.f1, "F1 in Hz")->required()->check(CLI::PositiveNumber);
  c_invert->add_option("--f2", inv.f2, "F2 in Hz")->required()->check(CLI::PositiveNumber);
  c_invert->add_option("--format", inv.format, "Output format")->check(CLI::IsMember({"csv", "svg"}))->capture_default_str();
  c_invert->add_option("--out,-o", inv.out, "Output file (default stdout)");

  GridArgs grid;
  auto* c_grid = app.add_subcommand("grid", "Predict contours over an evenly spaced F1 x F2 grid");
  c_grid->add_option("--model", grid.model, "Model bundle JSON")->required();
  c_grid->add_option("--steps", grid.steps, "Grid values per axis")->check(CLI::Range(2, 100))->capture_default_str();
  grid.ranges.add_to(c_grid);
  c_grid->add_option("--svg", grid.svg, "Multi-panel SVG to write");
  c_grid->add_option("--csv", grid.csv, "Grid CSV to write (stdout when neither --csv nor --svg is given)");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Compare predictions with per-item mean contours");
  c_eval->add_option("--model", ev.model, "Model bundle JSON")->required();
  c_eval->add_option("--corpus", ev.corpus, "Corpus CSV")->required();
  c_eval->add_option("--svg", ev.svg, "Overlay SVG to write (mean and predicted contour per item)");

  LutArgs lut;
  auto* c_lut = app.add_subcommand("lut", "Compile a lookup table of contours for real-time use");
  c_lut->add_option("--model", lut.model, "Model bundle JSON")->required();
  c_lut->add_option("--out", lut.out, "LUT binary to write")->required();
  lut.ranges.add_to(c_lut);
  c_lut->add_option("--step", lut.step, "Grid spacing in Hz")->check(CLI::PositiveNumber)->capture_default_str();
  c_lut->add_option("--max-cells", lut.max_cells, "Refuse grids with more contours than this")->capture_default_str();

  InspectArgs insp;
  auto* c_inspect = app.add_subcommand("inspect", "Print a LUT file header");
  c_inspect->add_option("--lut", insp.lut, "LUT binary")->required();

  TrackArgs tr;
  auto* c_track = app.add_subcommand("track", "Track formants in a WAV file and write a frame CSV");
  c_track->add_option("--wav", tr.wav, "PCM16 or float32 WAV; first channel is used")->required();
  c_track->add_option("--out,-o", tr.out, "Frame CSV to write (default stdout)");
  tr.config.add_to(c_track, false);

  SynthArgs sy;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic corpus with known ground truth");
  c_synth->add_option("--out", sy.out, "Corpus CSV to write")->required();
  c_synth->add_option("--truth", sy.truth, "Ground-truth JSON sidecar (default <out>.truth.json)");
  c_synth->add_option("--speakers", sy.speakers, "Number of speakers")->check(CLI::Range(1, 10000))->capture_default_str();
  c_synth->add_option("--reps", sy.reps, "Tokens per item per speaker")->check(CLI::Range(1, 10000))->capture_default_str();
  c_synth->add_option("--noise-mm", sy.noise_mm, "Landmark noise SD in mm")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_synth->add_option("--offset-mm", sy.offset_mm, "Per-speaker translation SD in mm")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_synth->add_option("--jitter-hz", sy.jitter_hz, "Per-token formant jitter SD in Hz; implies --follow-map")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  c_synth->add_flag("--follow-map", sy.follow_map, "Place tokens on the planted map at their own formants");
  c_synth->add_option("--seed", sy.seed, "Random seed")->capture_default_str();

  VowelArgs vw;
  auto* c_vowel = app.add_subcommand("vowel", "Write a synthetic vowel WAV with planted resonances");
  c_vowel->add_option("--out", vw.out, "WAV file to write (float32)")->required();
  c_vowel->add_option("--formants", vw.formants, "Resonance frequencies in Hz, comma separated")->delimiter(',');
  c_vowel->add_option("--bandwidths", vw.bandwidths, "Resonance bandwidths in Hz (default 60, 80, ...)")->delimiter(',');
  c_vowel->add_option("--duration", vw.duration_s, "Length in seconds")->check(CLI::PositiveNumber)->capture_default_str();
  c_vowel->add_option("--sample-rate", vw.sample_rate, "Sample rate in Hz")->check(CLI::PositiveNumber)->capture_default_str();
  c_vowel->add_option("--f0", vw.f0_hz, "Fundamental in Hz")->check(CLI::PositiveNumber)->capture_default_str();
  c_vowel->add_option("--peak", vw.peak, "Peak amplitude, full scale = 1")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  c_vowel->add_flag("--silence", vw.silence, "Write digital silence instead");

  ServeArgs sv;
  auto* c_serve = app.add_subcommand("serve", "Run the live biofeedback WebSocket service");
  c_serve->add_option("--model", sv.model, "Model bundle JSON")->required();
  c_serve->add_option("--lut", sv.lut, "LUT binary compiled from the model")->required();
  c_serve->add_option("--port", sv.port, "TCP port, 0 for any free port")->capture_default_str();
  c_serve->add_option("--address", sv.address, "Listen address")->capture_default_str();
  c_serve->add_option("--device", sv.device, "Audio source name or substring; see list in the ack")->capture_default_str();
  c_serve->add_option("--static-dir", sv.static_dir, "Directory served over HTTP GET alongside the socket");
  c_serve->add_option("--highlight", sv.highlight, "Highlighted formant indices 1..4")->delimiter(',')->check(CLI::Range(1, 4));
  c_serve->add_option("--display_smoothing,--display-smoothing", sv.display_smoothing, "EMA coefficient on (F1, F2) in [0, 1)")
      ->capture_default_str();
  c_serve->add_option("--run-for", sv.run_for_s, "Stop after this many seconds (0 runs until interrupted)");
  sv.config.add_to(c_serve, true);
  c_serve->footer("Exit codes: 0 ok, 1 usage, 2 missing or invalid files, 3 runtime error, 4 port busy, 5 audio device unavailable.");
  app.footer("Exit codes: 0 ok, 1 usage, 2 data error, 3 runtime error.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (c_train->parsed()) return guarded([&] { return cmd_train(train, out, err); }, err);
  if (c_invert->parsed()) return guarded([&] { return cmd_invert(inv, out, err); }, err);
  if (c_grid->parsed()) return guarded([&] { return cmd_grid(grid, out, err); }, err);
  if (c_eval->parsed()) return guarded([&] { return cmd_eval(ev, out, err); }, err);
  if (c_lut->parsed()) return guarded([&] { return cmd_lut(lut, out, err); }, err);
  if (c_inspect->parsed()) return guarded([&] { return cmd_inspect(insp, out, err); }, err);
  if (c_track->parsed()) return guarded([&] { return cmd_track(tr, out, err); }, err);
  if (c_synth->parsed()) return guarded([&] { return cmd_synth(sy, out, err); }, err);
  if (c_vowel->parsed()) return guarded([&] { return cmd_vowel(vw, out, err); }, err);
  if (c_serve->parsed()) return guarded([&] { return cmd_serve(sv, out, err); }, err);
  return kExitUsage;
}

}  // namespace aurora
