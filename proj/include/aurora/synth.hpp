#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aurora/corpus.hpp"
#include "aurora/regress.hpp"
#include "aurora/shapespace.hpp"

namespace aurora {

/// Known articulatory-acoustic map used to plant ground truth in synthetic
/// corpora. Knot 1, knot 11 and two shape amplitudes (a, b) are each linear in
/// (1, F1, F2, F1*F2); the normalised shape is sqrt(1 - a^2 - b^2) mu + a e1 + b e2
/// with e1, e2 orthonormal and orthogonal to mu, its rotation direction and
/// translations, so tangent-space coordinates at mu are exactly (a, b).
struct ForwardMap {
  Configuration mean_shape{};  // unit size, zero centroid
  ShapeVector mode1{};         // moves the dorsum towards the tip
  ShapeVector mode2{};         // dorsum convexity
  /// Columns follow kTargetNames with pc1 -> a, pc2 -> b; rows are 1, F1, F2, F1*F2.
  std::array<std::array<double, kTargetCount>, kPredictorCount> coefficients{};

  ArticulatoryParams params(double f1_hz, double f2_hz) const;
  Configuration shape(double a, double b) const;
  Knots knots(double f1_hz, double f2_hz) const;
};

ForwardMap default_forward_map();

struct ItemTemplate {
  std::string item;
  Knots knots{};  // mm
  double f1_hz = 0.0;
  double f2_hz = 0.0;
};

/// Ten b_d vowel archetypes, contours from `map` at typical formants.
std::vector<ItemTemplate> default_item_templates(const ForwardMap& map = default_forward_map());

struct SynthSpec {
  std::size_t n_speakers = 40;
  std::size_t tokens_per_item = 5;
  std::vector<ItemTemplate> item_templates = default_item_templates();
  double noise_sd_mm = 0.5;
  /// Offsets are uniform on [-w, w] per axis with w = sqrt(3) * sd.
  double speaker_offset_sd_mm = 5.0;
  double formant_jitter_sd_hz = 0.0;
  /// When set, token landmarks follow the map at the jittered formants
  /// instead of copying the item template.
  std::optional<ForwardMap> forward_map;
};

struct SynthTruth {
  std::vector<Knots> clean_knots;      // per token, template/map value before noise and offset
  std::vector<Knots> pre_offset_knots; // per token, after noise, before speaker offset
  std::vector<Point2> speaker_offsets; // per speaker, corpus speaker order
};

struct SynthResult {
  Corpus corpus;
  SynthTruth truth;
};

/// Deterministic for a fixed seed. Tokens are emitted speaker-major, then
/// item, then repetition.
SynthResult synth_corpus(const SynthSpec& spec, std::uint64_t seed);

}  // namespace aurora
