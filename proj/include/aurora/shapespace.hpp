#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aurora/geometry.hpp"

namespace aurora {

using Configuration = Knots;

/// Proper 2-D rotation stored as (cos, sin); determinant is +1 by construction.
struct Rotation2 {
  double c = 1.0;
  double s = 0.0;

  Point2 apply(Point2 p) const { return {c * p.x - s * p.y, s * p.x + c * p.y}; }
  double determinant() const { return c * c + s * s; }
};

Point2 centroid(const Configuration& cfg);

/// Root sum of squared distances of the landmarks from their centroid.
double centroid_size(const Configuration& cfg);

/// Translates to zero centroid and scales to unit centroid size. Throws
/// DegenerateGeometryError when every landmark coincides.
Configuration normalize_preshape(const Configuration& cfg);

/// Rotation minimising the squared distance from R*source to target, both
/// assumed centred. Never a reflection.
Rotation2 fit_rotation(const Configuration& source, const Configuration& target);

Configuration rotate(const Configuration& cfg, const Rotation2& r);

struct GpaOptions {
  double tolerance = 1e-10;  // flat-norm change of the consensus
  std::size_t max_iterations = 100;
};

struct GpaResult {
  std::vector<Configuration> aligned;  // unit size, zero centroid
  Configuration mean{};                // unit size, zero centroid
  std::vector<Rotation2> rotations;    // rotation applied to each normalised input
  std::size_t iterations = 0;
  bool converged = false;
};

/// Generalised Procrustes alignment, rotation-only. The output frame is
/// canonical: the consensus is turned so its knot-1 -> knot-11 vector points
/// along -x, making the result invariant to a shared similarity transform of
/// the inputs.
GpaResult gpa_align(std::span<const Configuration> configs, const GpaOptions& opts = {});

/// Projection of an aligned pre-shape onto the tangent hyperplane at `mean`:
/// v - <v, mu> mu.
ShapeVector tangent_project(const Configuration& aligned, const Configuration& mean);

/// Eigen-basis of the sample covariance of tangent vectors.
struct PcaModel {
  ShapeVector mean_shape{};                 // flattened consensus
  std::vector<ShapeVector> components;      // orthonormal rows, descending variance
  std::vector<double> eigenvalues;          // clamped to >= 0, descending
  std::size_t n_train = 0;
  double total_variance = 0.0;

  std::size_t size() const noexcept { return components.size(); }
  /// eigenvalues[i] / total_variance, all zero when total_variance == 0.
  std::vector<double> variance_ratios() const;
};

/// Fits the full 22-component decomposition of the 1/(n-1) covariance of
/// `vectors`. Each eigenvector's largest-magnitude entry is made positive.
PcaModel fit_pca(std::span<const ShapeVector> vectors, const ShapeVector& mean_shape);

std::vector<double> pca_scores(const PcaModel& m, const ShapeVector& v, std::size_t k = 2);

/// mean_shape + sum_i scores[i] * components[i].
Configuration pca_invert(const PcaModel& m, std::span<const double> scores);

}  // namespace aurora
