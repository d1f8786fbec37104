// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <time.h>

#include "aurora/bundle.hpp"
#include "aurora/cli.hpp"
#include "aurora/corpus.hpp"
#include "aurora/frame_csv.hpp"
#include "aurora/inversion.hpp"
#include "aurora/lut.hpp"
#include "aurora/service.hpp"
#include "aurora/shapespace.hpp"
#include "aurora/synth.hpp"

using namespace aurora;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

/// CPU time of the calling thread in milliseconds; excludes time spent preempted.
double thread_cpu_ms() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return 1e3 * static_cast<double>(ts.tv_sec) + 1e-6 * static_cast<double>(ts.tv_nsec);
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int prec = 3) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

double quantile_of(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size()))) - 1];
}

int run(std::vector<std::string> args, std::string& out, std::string& err) {
  args.insert(args.begin(), "aurora");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  out = o.str();
  err = e.str();
  return code;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("aurora-acceptance-" + std::to_string(Clock::now().time_since_epoch().count()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

// --- 1: planted-map recovery through the CLI -------------------------------

Outcome planted_recovery(const fs::path& dir, fs::path& model_out) {
  const auto t0 = Clock::now();
  SynthSpec spec;
  spec.noise_sd_mm = 0.0;
  const SynthResult synth = synth_corpus(spec, 1);
  const fs::path corpus = dir / "planted.csv";
  save_corpus(corpus, synth.corpus);
  model_out = dir / "planted.json";

  std::string out, err;
  if (run({"train", "--corpus", corpus.string(), "--out", model_out.string()}, out, err) != 0)
    return {false, "train failed: " + err};
  double min_r2 = 1.0;
  bool in_table = false;
  std::size_t targets = 0;
  for (const auto& row : csv_rows(out)) {
    if (row.size() == 2 && row[0] == "target") {
      in_table = true;
      continue;
    }
    if (in_table && row.size() == 2) {
      min_r2 = std::min(min_r2, std::stod(row[1]));
      ++targets;
    } else {
      in_table = false;
    }
  }
  if (run({"eval", "--model", model_out.string(), "--corpus", corpus.string()}, out, err) != 0)
    return {false, "eval failed: " + err};
  double max_rmsd = 0.0;
  std::size_t items = 0;
  for (const auto& row : csv_rows(out))
    if (row.size() == 6 && row[0] != "item") {
      max_rmsd = std::max(max_rmsd, std::stod(row[4]));
      ++items;
    }
  const double secs = seconds_since(t0);
  const bool pass = targets == kTargetCount && items == 10 && min_r2 > 0.999 && max_rmsd < 0.05 && secs < 10.0;
  return {pass, "min R^2 " + num(min_r2, 8) + " over " + std::to_string(targets) + " targets, max item RMSD " +
                    num(max_rmsd) + " mm over " + std::to_string(items) + " items, " + num(secs) + " s"};
}

// --- 2: shape-math oracle suite -------------------------------------------

Configuration noisy_arc(std::mt19937_64& rng, double noise) {
  std::normal_distribution<double> n(0.0, noise);
  Configuration c;
  for (std::size_t k = 0; k < kKnotCount; ++k) {
    const double th = -1.0 + 3.3 * static_cast<double>(k) / 10.0;
    c[k] = {30 * std::cos(th) + n(rng), 20 * std::sin(th) + n(rng)};
  }
  return c;
}

Outcome shape_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  double inv_err = 0, pre_err = 0, rt_err = 0, trunc_err = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng() % 12;
    std::vector<Configuration> cs, moved;
    for (std::size_t i = 0; i < n; ++i) cs.push_back(noisy_arc(rng, 0.5 + 3.0 * u(rng)));
    const double ang = 2 * std::numbers::pi * u(rng), s = 0.2 + 5.0 * u(rng);
    const double tx = 100 * u(rng) - 50, ty = 100 * u(rng) - 50;
    for (const auto& c : cs) {
      Configuration m;
      for (std::size_t k = 0; k < kKnotCount; ++k)
        m[k] = {s * (std::cos(ang) * c[k].x - std::sin(ang) * c[k].y) + tx,
                s * (std::sin(ang) * c[k].x + std::cos(ang) * c[k].y) + ty};
      moved.push_back(m);
    }
    const GpaResult a = gpa_align(cs), b = gpa_align(moved);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < kKnotCount; ++k)
        inv_err = std::max({inv_err, std::abs(a.aligned[i][k].x - b.aligned[i][k].x),
                            std::abs(a.aligned[i][k].y - b.aligned[i][k].y)});
      const Point2 c = centroid(a.aligned[i]);
      pre_err = std::max({pre_err, std::abs(c.x), std::abs(c.y), std::abs(centroid_size(a.aligned[i]) - 1.0)});
    }

    const std::size_t nv = 3 + rng() % 40;
    std::vector<double> scale(kShapeDim);
    for (auto& x : scale) x = std::exp(g(rng));
    std::vector<ShapeVector> vs(nv);
    ShapeVector mean{};
    for (auto& v : vs)
      for (std::size_t c = 0; c < kShapeDim; ++c) {
        v[c] = scale[c] * g(rng);
        mean[c] += v[c] / static_cast<double>(nv);
      }
    const PcaModel m = fit_pca(vs, mean);
    const std::size_t keep = 1 + rng() % (kShapeDim - 1);
    double sq = 0.0;
    for (const auto& v : vs) {
      ShapeVector d;
      for (std::size_t c = 0; c < kShapeDim; ++c) d[c] = v[c] - mean[c];
      const auto all = pca_scores(m, d, kShapeDim);
      const auto full = flatten(pca_invert(m, all));
      const auto part = flatten(pca_invert(m, std::span(all).first(keep)));
      for (std::size_t c = 0; c < kShapeDim; ++c) {
        rt_err = std::max(rt_err, std::abs(full[c] - v[c]));
        sq += (part[c] - v[c]) * (part[c] - v[c]);
      }
    }
    double discarded = 0.0;
    for (std::size_t i = keep; i < m.size(); ++i) discarded += m.eigenvalues[i];
    trunc_err = std::max(trunc_err, std::abs(sq / static_cast<double>(nv - 1) - discarded));
  }
  const double secs = seconds_since(t0);
  const bool pass = inv_err <= 1e-7 && pre_err <= 1e-9 && rt_err <= 1e-8 && trunc_err <= 1e-8 && secs < 30.0;
  return {pass, "200 cases: similarity " + num(inv_err) + ", preshape " + num(pre_err) + ", round trip " +
                    num(rt_err) + ", truncation " + num(trunc_err) + ", " + num(secs) + " s"};
}

// --- 3: reconstruction anchoring ------------------------------------------

Outcome anchoring(const ModelBundle& b) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> f1(b.regression.f1_range.low, b.regression.f1_range.high);
  std::uniform_real_distribution<double> f2(b.regression.f2_range.low, b.regression.f2_range.high);
  double anchor = 0.0, ratio = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a = f1(rng), c = f2(rng);
    const auto p = predict_params(b.regression, a, c).params;
    const TongueContour t = invert(b, a, c);
    anchor = std::max({anchor, distance(t.points.front(), p.knot1), distance(t.points.back(), p.knot11)});
    const Configuration shape = reconstruct_shape(b.pca, p.pc1, p.pc2);
    const Knots k = t.knots();
    const double ref = distance(shape[0], shape[10]), got = distance(k[0], k[10]);
    for (std::size_t x = 0; x < kKnotCount; ++x)
      for (std::size_t y = x + 1; y < kKnotCount; ++y)
        ratio = std::max(ratio, std::abs(distance(k[x], k[y]) / got - distance(shape[x], shape[y]) / ref));
  }
  return {anchor <= 1e-9 && ratio <= 1e-9,
          "1000 pairs: endpoint error " + num(anchor) + " mm, distance-ratio error " + num(ratio)};
}

// --- 4: qualitative grid trends -------------------------------------------

Outcome grid_trends(const ModelBundle& b) {
  const ContourGrid g = grid_predict(b, 320, 903, 828, 2616, 4);
  bool monotone = true;
  std::ostringstream d;
  for (std::size_t i = 0; i < 4; ++i) {
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < 4; ++j) {
      const TongueContour& c = g.at(i, j);
      // Anterior is towards the tip (last sample).
      const double dir = c.points.back().x < c.points.front().x ? -1.0 : 1.0;
      const double ant = dir * c.points[c.highest_point()].x;
      if (!(ant > prev)) monotone = false;
      prev = ant;
    }
  }
  auto span_at = [&](std::size_t j) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < 4; ++i) {
      const TongueContour& c = g.at(i, j);
      const double y = c.points[c.highest_point()].y;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    return hi - lo;
  };
  const double low = span_at(0), high = span_at(3);
  d << "highest point moves anterior with F2 at every F1: " << (monotone ? "yes" : "no")
    << "; height span across F1 " << num(high) << " mm at F2 2616 vs " << num(low) << " mm at F2 828";
  return {monotone && high > low, d.str()};
}

// --- 5: LUT fidelity, latency and compile time ----------------------------

double max_dev(const TongueContour& a, const TongueContour& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < kContourPoints; ++i)
    m = std::max({m, std::abs(a.points[i].x - b.points[i].x), std::abs(a.points[i].y - b.points[i].y)});
  return m;
}

Outcome lut_fidelity(const ModelBundle& b) {
  const auto t0 = Clock::now();
  const LookupTable t = compile_lut(b, {320, 903, 828, 2616, 10});
  const double compile_s = seconds_since(t0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> f1(320, 903), f2(828, 2616);
  std::vector<std::pair<double, double>> q(1000);
  for (auto& p : q) p = {f1(rng), f2(rng)};
  double worst = 0.0;
  for (auto [a, c] : q) worst = std::max(worst, max_dev(t.query(a, c), invert(b, a, c)));

  std::vector<double> us;
  double sink = 0.0;
  for (int rep = 0; rep < 5; ++rep)
    for (auto [a, c] : q) {
      const auto s = Clock::now();
      const TongueContour r = t.query(a, c);
      us.push_back(std::chrono::duration<double, std::micro>(Clock::now() - s).count());
      sink += r.points[50].y;
    }
  const double med = quantile_of(us, 0.5);
  const bool pass = worst < 0.2 && med <= 50.0 && compile_s < 60.0 && std::isfinite(sink);
  return {pass, std::to_string(t.header().f1.count) + " x " + std::to_string(t.header().f2.count) +
                    " grid: max deviation " + num(worst) + " mm over 1000 queries, median query " + num(med) +
                    " us, compile " + num(compile_s) + " s"};
}

// --- 6: LPC recovery -------------------------------------------------------

Outcome lpc_recovery() {
  const double sr = 16000.0;
  const AnalysisConfig cfg = AnalysisConfig::for_sample_rate(sr);
  const std::vector<std::array<double, 3>> vowels{{700, 1100, 2400}, {300, 2300, 3000}, {650, 850, 2900}};
  bool pass = true;
  std::ostringstream d;
  for (const auto& v : vowels) {
    const std::vector<Formant> res{{v[0], 60}, {v[1], 80}, {v[2], 100}};
    const auto x = synthesize_vowel(res, sr, 1.0);
    const auto frames = track(x, cfg);
    std::vector<double> f1, f2;
    for (const auto& f : frames)
      if (f.voiced && f.formants.size() >= 2) {
        f1.push_back(f.formants[0].freq_hz);
        f2.push_back(f.formants[1].freq_hz);
      }
    if (f1.empty()) {
      pass = false;
      d << "(" << v[0] << "," << v[1] << "): no voiced frames; ";
      continue;
    }
    const double e1 = quantile_of(f1, 0.5) - v[0], e2 = quantile_of(f2, 0.5) - v[1];
    pass = pass && std::abs(e1) <= 30 && std::abs(e2) <= 30;
    d << "(" << v[0] << "," << v[1] << "," << v[2] << ") F1 error " << num(e1) << " Hz, F2 error " << num(e2)
      << " Hz; ";
    if (track(x, cfg) != frames) {
      pass = false;
      d << "non-deterministic; ";
    }
  }
  const std::vector<float> silence(16000, 0.0f);
  const auto sf = track(silence, cfg);
  const auto voiced = std::count_if(sf.begin(), sf.end(), [](const FormantFrame& f) { return f.voiced; });
  pass = pass && voiced == 0 && !sf.empty();
  d << "silence " << voiced << "/" << sf.size() << " voiced";
  return {pass, d.str()};
}

// --- 7: real-time budget ---------------------------------------------------

Outcome realtime(const ModelBundle& b) {
  const double sr = 44100.0;
  AnalysisConfig cfg = AnalysisConfig::for_sample_rate(sr);
  cfg.frame_size = 1024;
  cfg.hop_size = 441;
  auto lut = std::make_shared<const LookupTable>(compile_lut(b, {320, 903, 828, 2616, 10}));
  SessionOptions so;
  so.config = cfg;
  so.client_queue_capacity = 1 << 16;
  Session session(lut, so, [](const std::string&) -> std::unique_ptr<AudioSource> {
    struct Idle : AudioSource {
      std::string name() const override { return "idle"; }
      void start(double, std::size_t, BlockCallback) override {}
      void stop() override {}
    };
    return std::make_unique<Idle>();
  });
  auto ch = std::make_shared<ClientChannel>(1 << 16);
  session.connect(ch);

  const std::vector<VowelSegment> segs{{{{700, 60}, {1100, 80}, {2400, 100}}, 1.0},
                                       {{{300, 60}, {2300, 80}, {3000, 100}}, 1.0},
                                       {{{650, 60}, {850, 80}, {2900, 100}}, 1.0}};
  const auto x = synthesize_vowels(segs, sr);  // 3 s, 300 hops
  FormantTracker tracker(cfg);
  std::vector<double> cpu, wall;
  std::vector<FormantFrame> frames;
  std::size_t bytes = 0;
  for (std::size_t pos = 0; pos + cfg.hop_size <= x.size(); pos += cfg.hop_size) {
    const auto s = Clock::now();
    const double c0 = thread_cpu_ms();
    frames.clear();
    tracker.push(std::span(x).subspan(pos, cfg.hop_size), frames);
    for (const auto& f : frames) session.publish(f);
    while (auto m = ch->queue.try_pop()) bytes += m->size();
    cpu.push_back(thread_cpu_ms() - c0);
    wall.push_back(std::chrono::duration<double, std::milli>(Clock::now() - s).count());
  }
  const double p99 = quantile_of(cpu, 0.99);
  return {p99 < 2.0, std::to_string(cpu.size()) + " hops at 44.1 kHz (frame 1024, hop 441): compute p50 " +
                         num(quantile_of(cpu, 0.5)) + " ms, p99 " + num(p99) + " ms (wall p99 " +
                         num(quantile_of(wall, 0.99)) + " ms), " + std::to_string(bytes / cpu.size()) +
                         " bytes per frame"};
}

// --- 8: format round trips and corrupt headers -----------------------------

Outcome round_trips(const ModelBundle& b, const fs::path& dir) {
  std::ostringstream d;
  bool pass = true;

  SynthSpec spec;
  spec.n_speakers = 6;
  spec.tokens_per_item = 2;
  const Corpus c = synth_corpus(spec, 8).corpus;
  save_corpus(dir / "rt.csv", c);
  const bool corpus_ok = load_corpus(dir / "rt.csv") == c;

  save_bundle(dir / "rt.json", b);
  const ModelBundle back = load_bundle(dir / "rt.json");
  const bool bundle_ok = bundle_to_json(back) == bundle_to_json(b) && back.pca.components == b.pca.components &&
                         back.regression.coefficients == b.regression.coefficients;

  const LookupTable t = compile_lut(b, {320, 903, 828, 2616, 50});
  save_lut(dir / "rt.lut", t);
  const bool lut_ok = load_lut(dir / "rt.lut") == t;

  const auto x = synthesize_vowels(std::vector<VowelSegment>{{{{700, 60}, {1100, 80}, {2400, 100}}, 0.3}, {{}, 0.1}},
                                   16000);
  auto frames = track(x, AnalysisConfig::for_sample_rate(16000));
  std::stringstream fs_;
  write_frame_csv(fs_, frames);
  const auto fback = read_frame_csv(fs_);
  for (auto& f : frames) f.envelope_db.clear();
  const bool frames_ok = fback == frames;

  std::ostringstream raw;
  write_lut(raw, t);
  const std::string bytes = raw.str();
  std::mt19937_64 rng(4);
  int typed = 0, accepted = 0, untyped = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string bad = bytes;
    const int flips = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < flips; ++k) bad[rng() % 104] ^= static_cast<char>(1u << (rng() % 8));
    if (i % 5 == 0) bad.resize(rng() % bytes.size());
    std::istringstream in(bad);
    try {
      (void)read_lut(in);
      ++accepted;
    } catch (const LutFormatError&) {
      ++typed;
    } catch (...) {
      ++untyped;
    }
  }
  pass = corpus_ok && bundle_ok && lut_ok && frames_ok && untyped == 0 && typed > 0;
  d << "corpus " << (corpus_ok ? "ok" : "MISMATCH") << ", bundle " << (bundle_ok ? "ok" : "MISMATCH") << ", LUT "
    << (lut_ok ? "ok" : "MISMATCH") << ", frame CSV " << (frames_ok ? "ok" : "MISMATCH") << "; 2000 corrupted LUTs: "
    << typed << " typed errors, " << accepted << " accepted, " << untyped << " other";
  return {pass, d.str()};
}

}  // namespace

int main() {
  Scratch scratch;
  int failed = 0;
  auto report = [&](int n, const char* name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << n << " " << name << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail << ")"
              << std::endl;
  };

  fs::path model_path;
  report(1, "planted-map recovery", [&] { return planted_recovery(scratch.dir, model_path); });
  ModelBundle model;
  bool have_model = false;
  try {
    model = load_bundle(model_path);
    have_model = true;
  } catch (const std::exception&) {
  }
  auto with_model = [&](const std::function<Outcome(const ModelBundle&)>& f) {
    return [&, f] { return have_model ? f(model) : Outcome{false, "no trained model"}; };
  };
  report(2, "shape-math oracles", shape_oracles);
  report(3, "reconstruction anchoring", with_model(anchoring));
  report(4, "grid trends", with_model(grid_trends));
  report(5, "LUT fidelity", with_model(lut_fidelity));
  report(6, "LPC recovery", lpc_recovery);
  report(7, "real-time budget", with_model(realtime));
  report(8, "format round trips", with_model([&](const ModelBundle& b) { return round_trips(b, scratch.dir); }));
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
