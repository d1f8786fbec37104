#include "aurora/inversion.hpp"

#include <cmath>
#include <complex>

#include "aurora/error.hpp"
#include "aurora/spline.hpp"
#include "numeric.hpp"

namespace aurora {

namespace {

struct SampleScheme {
  std::array<std::size_t, kKnotCount> knot_index{};
  std::array<double, kContourPoints> parameter{};
};

SampleScheme make_scheme() {
  constexpr std::size_t kSegments = kKnotCount - 1;
  constexpr std::size_t kInterior = kContourPoints - kKnotCount;
  SampleScheme s;
  std::size_t pos = 0;
  for (std::size_t seg = 0; seg < kSegments; ++seg) {
    // Spread the interior samples as evenly as possible, extras from the vallecula end.
    const std::size_t n = kInterior / kSegments + (seg < kInterior % kSegments ? 1 : 0);
    s.knot_index[seg] = pos;
    s.parameter[pos++] = static_cast<double>(seg + 1);
    for (std::size_t j = 1; j <= n; ++j)
      s.parameter[pos++] = static_cast<double>(seg + 1) + static_cast<double>(j) / static_cast<double>(n + 1);
  }
  s.knot_index[kSegments] = pos;
  s.parameter[pos] = static_cast<double>(kKnotCount);
  return s;
}

const SampleScheme& scheme() {
  static const SampleScheme s = make_scheme();
  return s;
}

std::string hz(double v) { return detail::format_double(v) + " Hz"; }

}  // namespace

const std::array<std::size_t, kKnotCount>& contour_knot_indices() { return scheme().knot_index; }
const std::array<double, kContourPoints>& contour_parameters() { return scheme().parameter; }

Knots TongueContour::knots() const {
  Knots k;
  for (std::size_t i = 0; i < kKnotCount; ++i) k[i] = points[knot_indices[i]];
  return k;
}

std::size_t TongueContour::highest_point() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kContourPoints; ++i)
    if (points[i].y > points[best].y) best = i;
  return best;
}

Configuration reconstruct_shape(const PcaModel& pca, double pc1, double pc2) {
  if (pca.size() < 2) throw PreconditionError("reconstruct_shape: model has fewer than two components");
  const std::array<double, 2> scores{pc1, pc2};
  return pca_invert(pca, scores);
}

Knots similarity_transform(const Configuration& shape, Point2 target_knot1, Point2 target_knot11) {
  using C = std::complex<double>;
  const C r1{shape.front().x, shape.front().y};
  const C r11{shape.back().x, shape.back().y};
  const C t1{target_knot1.x, target_knot1.y};
  const C t11{target_knot11.x, target_knot11.y};
  const C v_rec = r11 - r1;
  const C v_ref = t11 - t1;
  if (std::abs(v_rec) < 1e-9) throw DegenerateGeometryError("reconstructed knots 1 and 11 coincide");
  if (std::abs(v_ref) < 1e-9) throw DegenerateGeometryError("target knots 1 and 11 coincide");

  // Multiplying by v_ref / v_rec scales by |v_ref|/|v_rec| and rotates by the angle between them.
  const C factor = v_ref / v_rec;
  Knots out;
  for (std::size_t i = 0; i < kKnotCount; ++i) {
    const C z = t1 + (C{shape[i].x, shape[i].y} - r1) * factor;
    out[i] = {z.real(), z.imag()};
  }
  out.front() = target_knot1;
  out.back() = target_knot11;
  return out;
}

TongueContour smooth_contour(const Knots& knots) {
  if (!all_finite(knots)) throw PreconditionError("smooth_contour: knots must be finite");
  std::array<double, kKnotCount> t{}, xs{}, ys{};
  for (std::size_t i = 0; i < kKnotCount; ++i) {
    t[i] = static_cast<double>(i + 1);
    xs[i] = knots[i].x;
    ys[i] = knots[i].y;
  }
  const NaturalCubicSpline sx(t, xs), sy(t, ys);

  TongueContour c;
  const auto& params = contour_parameters();
  for (std::size_t i = 0; i < kContourPoints; ++i) c.points[i] = {sx(params[i]), sy(params[i])};
  for (std::size_t k = 0; k < kKnotCount; ++k) c.points[c.knot_indices[k]] = knots[k];
  return c;
}

TongueContour invert(const ModelBundle& bundle, double f1_hz, double f2_hz) {
  const Prediction pred = predict_params(bundle.regression, f1_hz, f2_hz);
  const Configuration shape = reconstruct_shape(bundle.pca, pred.params.pc1, pred.params.pc2);
  Knots knots;
  try {
    knots = similarity_transform(shape, pred.params.knot1, pred.params.knot11);
  } catch (const DegenerateGeometryError& e) {
    throw DegenerateGeometryError(std::string(e.what()) + " (F1 = " + hz(f1_hz) + ", F2 = " + hz(f2_hz) + ")");
  }
  TongueContour c = smooth_contour(knots);
  c.extrapolated = pred.extrapolated;
  c.source_f1_hz = f1_hz;
  c.source_f2_hz = f2_hz;
  return c;
}

std::vector<double> linear_axis(double lo, double hi, std::size_t steps) {
  if (steps < 2) throw PreconditionError("grid needs at least two steps per axis");
  std::vector<double> axis(steps);
  const double span = hi - lo;
  for (std::size_t i = 0; i < steps; ++i)
    axis[i] = lo + span * static_cast<double>(i) / static_cast<double>(steps - 1);
  axis.back() = hi;
  return axis;
}

ContourGrid grid_predict(const ModelBundle& bundle, double f1_lo, double f1_hi, double f2_lo,
                         double f2_hi, std::size_t steps) {
  ContourGrid g;
  g.f1_axis = linear_axis(f1_lo, f1_hi, steps);
  g.f2_axis = linear_axis(f2_lo, f2_hi, steps);
  g.contours.reserve(steps * steps);
  for (double f1 : g.f1_axis)
    for (double f2 : g.f2_axis) g.contours.push_back(invert(bundle, f1, f2));
  return g;
}

ContourGrid grid_predict(const ModelBundle& bundle, std::size_t steps) {
  const auto& r = bundle.regression;
  return grid_predict(bundle, r.f1_range.low, r.f1_range.high, r.f2_range.low, r.f2_range.high, steps);
}

std::vector<ItemEvaluation> evaluate_item_means(const ModelBundle& bundle, const Corpus& centered) {
  if (!centered.centered()) throw PreconditionError("evaluate_item_means: corpus must be centred by speaker");
  std::vector<ItemEvaluation> out;
  for (const auto& s : item_means(centered)) {
    ItemEvaluation e;
    e.item = s.item;
    e.n_tokens = s.n_tokens;
    e.mean_f1_hz = s.mean_f1_hz;
    e.mean_f2_hz = s.mean_f2_hz;
    e.mean_contour = smooth_contour(s.mean_knots);
    e.mean_contour.source_f1_hz = s.mean_f1_hz;
    e.mean_contour.source_f2_hz = s.mean_f2_hz;
    e.predicted_contour = invert(bundle, s.mean_f1_hz, s.mean_f2_hz);
    const Knots predicted = e.predicted_contour.knots();
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < kKnotCount; ++k) {
      e.knot_distance_mm[k] = distance(predicted[k], s.mean_knots[k]);
      sum_sq += e.knot_distance_mm[k] * e.knot_distance_mm[k];
    }
    e.rmsd_mm = std::sqrt(sum_sq / static_cast<double>(kKnotCount));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace aurora
