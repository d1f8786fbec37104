#include "aurora/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "aurora/error.hpp"
#include "aurora/inversion.hpp"

namespace aurora {

namespace {

// Formant normalisation used when writing the planted coefficients by hand:
// u = (F1 - 600) / 300, v = (F2 - 1700) / 900.
constexpr double kU0 = 600.0, kUS = 300.0, kV0 = 1700.0, kVS = 900.0;

// Coefficients on (1, u, v, u*v) -> raw (1, F1, F2, F1*F2).
std::array<double, kPredictorCount> to_raw(std::array<double, 4> c) {
  const double uv = kUS * kVS;
  return {c[0] - c[1] * kU0 / kUS - c[2] * kV0 / kVS + c[3] * kU0 * kV0 / uv,
          c[1] / kUS - c[3] * kV0 / uv, c[2] / kVS - c[3] * kU0 / uv, c[3] / uv};
}

double dot(const ShapeVector& a, const ShapeVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kShapeDim; ++i) s += a[i] * b[i];
  return s;
}

void remove_component(ShapeVector& v, const ShapeVector& unit) {
  const double d = dot(v, unit);
  for (std::size_t i = 0; i < kShapeDim; ++i) v[i] -= d * unit[i];
}

void normalize(ShapeVector& v) {
  const double n = std::sqrt(dot(v, v));
  for (auto& x : v) x /= n;
}

}  // namespace

ArticulatoryParams ForwardMap::params(double f1_hz, double f2_hz) const {
  const auto d = build_design(f1_hz, f2_hz);
  std::array<double, kTargetCount> out{};
  for (std::size_t t = 0; t < kTargetCount; ++t)
    for (std::size_t p = 0; p < kPredictorCount; ++p) out[t] += d[p] * coefficients[p][t];
  return ArticulatoryParams::from_array(out);
}

Configuration ForwardMap::shape(double a, double b) const {
  const double r2 = a * a + b * b;
  if (r2 >= 1.0) throw PreconditionError("forward map shape amplitudes exceed the unit sphere");
  const double c = std::sqrt(1.0 - r2);
  const ShapeVector mu = flatten(mean_shape);
  ShapeVector v;
  for (std::size_t i = 0; i < kShapeDim; ++i) v[i] = c * mu[i] + a * mode1[i] + b * mode2[i];
  return unflatten(v);
}

Knots ForwardMap::knots(double f1_hz, double f2_hz) const {
  const auto p = params(f1_hz, f2_hz);
  return similarity_transform(shape(p.pc1, p.pc2), p.knot1, p.knot11);
}

ForwardMap default_forward_map() {
  using std::numbers::pi;
  ForwardMap m;

  // Elliptical arc from the vallecula (lower right) over the dorsum to the tip (left).
  Knots base;
  ShapeVector bump_forward{}, convexity{};
  for (std::size_t i = 0; i < kKnotCount; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(kKnotCount - 1);
    const double theta = (-60.0 + 255.0 * s) * pi / 180.0;
    base[i] = {35.0 * std::cos(theta), 22.0 * std::sin(theta)};
    Point2 normal{22.0 * std::cos(theta), 35.0 * std::sin(theta)};
    const double len = std::hypot(normal.x, normal.y);
    normal = (1.0 / len) * normal;
    const double g1 = -std::sin(2.0 * pi * s);
    const double g2 = std::sin(pi * s);
    bump_forward[2 * i] = g1 * normal.x;
    bump_forward[2 * i + 1] = g1 * normal.y;
    convexity[2 * i] = g2 * normal.x;
    convexity[2 * i + 1] = g2 * normal.y;
  }
  m.mean_shape = normalize_preshape(base);

  const ShapeVector mu = flatten(m.mean_shape);
  ShapeVector rot{}, tx{}, ty{};
  for (std::size_t i = 0; i < kKnotCount; ++i) {
    rot[2 * i] = -mu[2 * i + 1];
    rot[2 * i + 1] = mu[2 * i];
    tx[2 * i] = 1.0;
    ty[2 * i + 1] = 1.0;
  }
  normalize(tx);
  normalize(ty);
  normalize(rot);
  for (ShapeVector* mode : {&bump_forward, &convexity}) {
    const std::array<const ShapeVector*, 4> similarity_basis = {&tx, &ty, &mu, &rot};
    for (const ShapeVector* basis : similarity_basis) remove_component(*mode, *basis);
    if (mode == &convexity) remove_component(*mode, bump_forward);
    normalize(*mode);
  }
  m.mode1 = bump_forward;
  m.mode2 = convexity;

  const std::array<std::array<double, 4>, kTargetCount> planted = {{
      {28.0, 0.0, -3.0, 0.0},     // knot1_x: root advances with F2
      {-16.0, -1.5, 0.5, 0.0},    // knot1_y
      {-38.0, 0.5, -4.0, 0.0},    // knot11_x: tip advances with F2
      {-6.0, -3.0, 2.0, -1.5},    // knot11_y: lowers with F1, more so when F2 is high
      {0.0, 0.01, 0.06, 0.0},     // a: dorsum moves forward with F2
      {0.0, -0.03, 0.012, -0.02},  // b: convexity drops with F1, more so when F2 is high
  }};
  for (std::size_t t = 0; t < kTargetCount; ++t) {
    const auto raw = to_raw(planted[t]);
    for (std::size_t p = 0; p < kPredictorCount; ++p) m.coefficients[p][t] = raw[p];
  }
  return m;
}

std::vector<ItemTemplate> default_item_templates(const ForwardMap& map) {
  struct Archetype {
    const char* item;
    double f1, f2;
  };
  static constexpr Archetype kVowels[] = {
      {"bead", 300, 2500}, {"bid", 400, 2100},  {"bed", 580, 1900},  {"bad", 850, 1550},
      {"bud", 700, 1250},  {"bard", 700, 1100}, {"bod", 550, 950},   {"bored", 420, 850},
      {"booed", 330, 1500}, {"bird", 520, 1550},
  };
  std::vector<ItemTemplate> out;
  for (const auto& v : kVowels) out.push_back({v.item, map.knots(v.f1, v.f2), v.f1, v.f2});
  return out;
}

SynthResult synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.n_speakers < 1) throw PreconditionError("synth_corpus: need at least one speaker");
  if (spec.tokens_per_item < 1) throw PreconditionError("synth_corpus: need at least one token per item");
  if (spec.item_templates.empty()) throw PreconditionError("synth_corpus: no item templates");
  if (spec.noise_sd_mm < 0.0 || spec.speaker_offset_sd_mm < 0.0 || spec.formant_jitter_sd_hz < 0.0)
    throw PreconditionError("synth_corpus: standard deviations must be nonnegative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit_uniform(-1.0, 1.0);
  const double offset_halfwidth = std::sqrt(3.0) * spec.speaker_offset_sd_mm;

  SynthResult res;
  std::vector<TokenRecord> records;
  for (std::size_t s = 0; s < spec.n_speakers; ++s) {
    char id[16];
    std::snprintf(id, sizeof id, "S%02zu", s + 1);
    const Point2 offset{offset_halfwidth * unit_uniform(rng), offset_halfwidth * unit_uniform(rng)};
    res.truth.speaker_offsets.push_back(offset);

    for (const auto& tmpl : spec.item_templates) {
      for (std::size_t rep = 0; rep < spec.tokens_per_item; ++rep) {
        TokenRecord r;
        r.speaker_id = id;
        r.item = tmpl.item;
        r.f1_hz = tmpl.f1_hz;
        r.f2_hz = tmpl.f2_hz;
        if (spec.formant_jitter_sd_hz > 0.0) {
          do {
            r.f1_hz = tmpl.f1_hz + spec.formant_jitter_sd_hz * unit_normal(rng);
            r.f2_hz = tmpl.f2_hz + spec.formant_jitter_sd_hz * unit_normal(rng);
          } while (!(r.f1_hz > 0.0 && r.f2_hz > r.f1_hz));
        }
        const Knots clean = spec.forward_map && spec.formant_jitter_sd_hz > 0.0
                                ? spec.forward_map->knots(r.f1_hz, r.f2_hz)
                                : tmpl.knots;
        Knots noisy = clean;
        if (spec.noise_sd_mm > 0.0)
          for (auto& p : noisy) p = p + Point2{spec.noise_sd_mm * unit_normal(rng), spec.noise_sd_mm * unit_normal(rng)};
        for (std::size_t k = 0; k < kKnotCount; ++k) r.knots[k] = noisy[k] + offset;
        res.truth.clean_knots.push_back(clean);
        res.truth.pre_offset_knots.push_back(noisy);
        records.push_back(std::move(r));
      }
    }
  }
  res.corpus = Corpus(std::move(records), false);
  return res;
}

}  // namespace aurora
