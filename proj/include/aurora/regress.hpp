#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aurora/corpus.hpp"
#include "aurora/shapespace.hpp"

namespace aurora {

inline constexpr std::size_t kPredictorCount = 4;  // 1, F1, F2, F1*F2
inline constexpr std::size_t kTargetCount = 6;

/// Target column order of the coefficient matrix.
inline constexpr std::array<const char*, kTargetCount> kTargetNames = {
    "knot1_x", "knot1_y", "knot11_x", "knot11_y", "pc1", "pc2"};

struct ArticulatoryParams {
  Point2 knot1;   // mm
  Point2 knot11;  // mm
  double pc1 = 0.0;
  double pc2 = 0.0;

  std::array<double, kTargetCount> as_array() const {
    return {knot1.x, knot1.y, knot11.x, knot11.y, pc1, pc2};
  }
  static ArticulatoryParams from_array(const std::array<double, kTargetCount>& a) {
    return {{a[0], a[1]}, {a[2], a[3]}, a[4], a[5]};
  }
};

struct FormantRange {
  double low = 0.0;
  double high = 0.0;
};

/// Linear map (1, F1, F2, F1*F2) -> six articulatory targets, raw Hz units.
struct RegressionModel {
  /// coefficients[p][t]: row p is intercept, F1, F2, F1*F2; column t follows kTargetNames.
  std::array<std::array<double, kTargetCount>, kPredictorCount> coefficients{};
  std::array<double, kTargetCount> residual_variance{};  // mean squared residual
  std::array<double, kTargetCount> r_squared{};
  FormantRange f1_range;  // 5th-95th percentile of training F1
  FormantRange f2_range;
  std::size_t n_train = 0;
};

struct Prediction {
  ArticulatoryParams params;
  bool extrapolated = false;
};

std::array<double, kPredictorCount> build_design(double f1_hz, double f2_hz);

/// Linear-interpolation quantile (R type 7) of unsorted data.
double quantile(std::vector<double> data, double p);

/// Target vector of one token: knot 1 and 11 coordinates plus its first two
/// tangent-space scores.
ArticulatoryParams token_targets(const TokenRecord& r, const ShapeVector& tangent, const PcaModel& pca);

/// Least-squares fit on the raw design, given per-token targets.
RegressionModel fit_regression(std::span<const std::array<double, 2>> formants,
                               std::span<const ArticulatoryParams> targets);

/// Full training step on a centred corpus: targets come from the corpus knots
/// and the PCA scores of each token's aligned shape.
RegressionModel fit_regression(const Corpus& corpus, const PcaModel& pca,
                               std::span<const ShapeVector> tangents);

/// Inputs outside [0.8 * low, 1.25 * high] of either training range are
/// flagged but still evaluated.
Prediction predict_params(const RegressionModel& m, double f1_hz, double f2_hz);

bool is_extrapolated(const RegressionModel& m, double f1_hz, double f2_hz);

}  // namespace aurora
