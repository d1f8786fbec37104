#include "aurora/regress.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "aurora/error.hpp"

namespace aurora {

std::array<double, kPredictorCount> build_design(double f1_hz, double f2_hz) {
  return {1.0, f1_hz, f2_hz, f1_hz * f2_hz};
}

double quantile(std::vector<double> data, double p) {
  if (data.empty()) throw PreconditionError("quantile of empty data");
  std::sort(data.begin(), data.end());
  const double h = (static_cast<double>(data.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, data.size() - 1);
  return data[lo] + (h - static_cast<double>(lo)) * (data[hi] - data[lo]);
}

ArticulatoryParams token_targets(const TokenRecord& r, const ShapeVector& tangent, const PcaModel& pca) {
  const auto scores = pca_scores(pca, tangent, 2);
  return {r.knots.front(), r.knots.back(), scores[0], scores[1]};
}

RegressionModel fit_regression(std::span<const std::array<double, 2>> formants,
                               std::span<const ArticulatoryParams> targets) {
  const std::size_t n = formants.size();
  if (targets.size() != n) throw PreconditionError("fit_regression: formant/target count mismatch");
  if (n < 5)
    throw PreconditionError("fit_regression: " + std::to_string(n) +
                            " tokens is under-determined for 4 predictors (need at least 5)");

  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd raw(rows, 3);
  Eigen::MatrixXd y(rows, static_cast<Eigen::Index>(kTargetCount));
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& f = formants[static_cast<std::size_t>(i)];
    const auto d = build_design(f[0], f[1]);
    for (Eigen::Index j = 0; j < 3; ++j) raw(i, j) = d[static_cast<std::size_t>(j) + 1];
    const auto t = targets[static_cast<std::size_t>(i)].as_array();
    for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) = t[static_cast<std::size_t>(j)];
  }

  // Standardise predictor columns for conditioning; F1*F2 is ~1e6 in raw Hz.
  Eigen::MatrixXd z(rows, 4);
  z.col(0).setOnes();
  std::array<double, 3> mean{}, scale{};
  for (Eigen::Index j = 0; j < 3; ++j) {
    const auto col = raw.col(j);
    mean[j] = col.mean();
    const double sd = std::sqrt((col.array() - mean[j]).square().mean());
    const bool constant = col.maxCoeff() == col.minCoeff();
    scale[j] = (constant || !(sd > 0.0)) ? 1.0 : sd;
    if (constant)
      z.col(j + 1).setZero();
    else
      z.col(j + 1) = (col.array() - mean[j]) / scale[j];
  }

  const Eigen::MatrixXd bz = z.completeOrthogonalDecomposition().solve(y);

  RegressionModel m;
  m.n_train = n;
  for (std::size_t t = 0; t < kTargetCount; ++t) {
    const auto tc = static_cast<Eigen::Index>(t);
    double intercept = bz(0, tc);
    for (std::size_t j = 0; j < 3; ++j) {
      const double b = bz(static_cast<Eigen::Index>(j) + 1, tc) / scale[j];
      m.coefficients[j + 1][t] = b;
      intercept -= b * mean[j];
    }
    m.coefficients[0][t] = intercept;
  }

  for (std::size_t t = 0; t < kTargetCount; ++t) {
    const auto tc = static_cast<Eigen::Index>(t);
    const double y_mean = y.col(tc).mean();
    double ss_res = 0.0, ss_tot = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      double fitted = m.coefficients[0][t];
      for (Eigen::Index j = 0; j < 3; ++j) fitted += m.coefficients[j + 1][t] * raw(i, j);
      const double r = y(i, tc) - fitted;
      ss_res += r * r;
      ss_tot += (y(i, tc) - y_mean) * (y(i, tc) - y_mean);
    }
    m.residual_variance[t] = ss_res / static_cast<double>(n);
    m.r_squared[t] = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  }

  std::vector<double> f1s, f2s;
  for (const auto& f : formants) {
    f1s.push_back(f[0]);
    f2s.push_back(f[1]);
  }
  m.f1_range = {quantile(f1s, 0.05), quantile(f1s, 0.95)};
  m.f2_range = {quantile(f2s, 0.05), quantile(f2s, 0.95)};
  if (!(m.f1_range.low < m.f1_range.high) || !(m.f2_range.low < m.f2_range.high))
    throw DataError("fit_regression: training F1/F2 5-95% range is degenerate");
  return m;
}

RegressionModel fit_regression(const Corpus& corpus, const PcaModel& pca,
                               std::span<const ShapeVector> tangents) {
  if (!corpus.centered()) throw PreconditionError("fit_regression: corpus must be centred by speaker");
  if (tangents.size() != corpus.size())
    throw PreconditionError("fit_regression: one tangent vector per token required");
  std::vector<std::array<double, 2>> formants;
  std::vector<ArticulatoryParams> targets;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus.records()[i];
    formants.push_back({r.f1_hz, r.f2_hz});
    targets.push_back(token_targets(r, tangents[i], pca));
  }
  return fit_regression(formants, targets);
}

bool is_extrapolated(const RegressionModel& m, double f1_hz, double f2_hz) {
  return f1_hz < 0.8 * m.f1_range.low || f1_hz > 1.25 * m.f1_range.high ||
         f2_hz < 0.8 * m.f2_range.low || f2_hz > 1.25 * m.f2_range.high;
}

Prediction predict_params(const RegressionModel& m, double f1_hz, double f2_hz) {
  if (!(f1_hz > 0.0) || !(f2_hz > 0.0) || !std::isfinite(f1_hz) || !std::isfinite(f2_hz))
    throw PreconditionError("predict_params: formants must be finite and positive");
  const auto d = build_design(f1_hz, f2_hz);
  std::array<double, kTargetCount> out{};
  for (std::size_t t = 0; t < kTargetCount; ++t)
    for (std::size_t p = 0; p < kPredictorCount; ++p) out[t] += d[p] * m.coefficients[p][t];
  return {ArticulatoryParams::from_array(out), is_extrapolated(m, f1_hz, f2_hz)};
}

}  // namespace aurora
