#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "aurora/bundle.hpp"
#include "aurora/corpus.hpp"
#include "aurora/geometry.hpp"

namespace aurora {

inline constexpr std::size_t kContourPoints = 100;

/// Position of each knot in the 100-point contour: 0, 10, ..., 90, 99.
/// Knot segments get 9 interior samples except the tip-adjacent one, which gets 8.
const std::array<std::size_t, kKnotCount>& contour_knot_indices();

/// Spline parameter (knot index, 1..11) of every contour sample.
const std::array<double, kContourPoints>& contour_parameters();

struct TongueContour {
  std::array<Point2, kContourPoints> points{};  // mm
  std::array<std::size_t, kKnotCount> knot_indices = contour_knot_indices();
  bool extrapolated = false;
  double source_f1_hz = 0.0;
  double source_f2_hz = 0.0;

  Knots knots() const;
  /// Sample with the largest y (first one on ties).
  std::size_t highest_point() const;
};

/// Normalised shape from the first two PCA scores.
Configuration reconstruct_shape(const PcaModel& pca, double pc1, double pc2);

/// Scales and rotates `shape` about its knot 1, then translates so knot 1 lands
/// on `target_knot1` and knot 11 on `target_knot11`.
Knots similarity_transform(const Configuration& shape, Point2 target_knot1, Point2 target_knot11);

/// Independent natural cubic splines x(t), y(t) over t = 1..11, sampled at 100
/// parameters that include every knot.
TongueContour smooth_contour(const Knots& knots);

TongueContour invert(const ModelBundle& bundle, double f1_hz, double f2_hz);

/// Evenly spaced axis with exact endpoints.
std::vector<double> linear_axis(double lo, double hi, std::size_t steps);

struct ContourGrid {
  std::vector<double> f1_axis;
  std::vector<double> f2_axis;
  std::vector<TongueContour> contours;  // row-major: index = i * f2_axis.size() + j

  const TongueContour& at(std::size_t i, std::size_t j) const { return contours[i * f2_axis.size() + j]; }
};

ContourGrid grid_predict(const ModelBundle& bundle, double f1_lo, double f1_hi, double f2_lo,
                         double f2_hi, std::size_t steps);
/// Uses the model's stored 5th-95th percentile ranges.
ContourGrid grid_predict(const ModelBundle& bundle, std::size_t steps);

struct ItemEvaluation {
  std::string item;
  std::size_t n_tokens = 0;
  double mean_f1_hz = 0.0;
  double mean_f2_hz = 0.0;
  TongueContour mean_contour;
  TongueContour predicted_contour;
  std::array<double, kKnotCount> knot_distance_mm{};
  double rmsd_mm = 0.0;  // sqrt(mean squared knot distance)
};

std::vector<ItemEvaluation> evaluate_item_means(const ModelBundle& bundle, const Corpus& centered);

}  // namespace aurora
