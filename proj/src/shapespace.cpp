#include "aurora/shapespace.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "aurora/error.hpp"

namespace aurora {

namespace {

double flat_distance(const Configuration& a, const Configuration& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kKnotCount; ++i) {
    const Point2 d = a[i] - b[i];
    s += d.x * d.x + d.y * d.y;
  }
  return std::sqrt(s);
}

// Rotation taking the consensus vallecula->tip direction onto -x.
Rotation2 canonical_rotation(const Configuration& mean) {
  const Point2 d = mean[kKnotCount - 1] - mean[0];
  const double len = std::hypot(d.x, d.y);
  if (len < 1e-12) return {};
  return {-d.x / len, d.y / len};
}

Rotation2 compose(const Rotation2& outer, const Rotation2& inner) {
  return {outer.c * inner.c - outer.s * inner.s, outer.s * inner.c + outer.c * inner.s};
}

}  // namespace

Point2 centroid(const Configuration& cfg) {
  Point2 m;
  for (const auto& p : cfg) m = m + p;
  return (1.0 / static_cast<double>(kKnotCount)) * m;
}

double centroid_size(const Configuration& cfg) {
  const Point2 m = centroid(cfg);
  double s = 0.0;
  for (const auto& p : cfg) {
    const Point2 d = p - m;
    s += d.x * d.x + d.y * d.y;
  }
  return std::sqrt(s);
}

Configuration normalize_preshape(const Configuration& cfg) {
  if (!all_finite(cfg)) throw DegenerateGeometryError("configuration has non-finite coordinates");
  const Point2 m = centroid(cfg);
  Configuration out;
  for (std::size_t i = 0; i < kKnotCount; ++i) out[i] = cfg[i] - m;
  const double size = centroid_size(out);
  if (!(size > 1e-12)) throw DegenerateGeometryError("configuration has zero centroid size");
  for (auto& p : out) p = (1.0 / size) * p;
  return out;
}

Rotation2 fit_rotation(const Configuration& source, const Configuration& target) {
  double dot = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < kKnotCount; ++i) {
    dot += source[i].x * target[i].x + source[i].y * target[i].y;
    cross += source[i].x * target[i].y - source[i].y * target[i].x;
  }
  const double len = std::hypot(dot, cross);
  if (len == 0.0) return {};
  return {dot / len, cross / len};
}

Configuration rotate(const Configuration& cfg, const Rotation2& r) {
  Configuration out;
  for (std::size_t i = 0; i < kKnotCount; ++i) out[i] = r.apply(cfg[i]);
  return out;
}

GpaResult gpa_align(std::span<const Configuration> configs, const GpaOptions& opts) {
  if (configs.size() < 2) throw PreconditionError("gpa_align needs at least two configurations");

  std::vector<Configuration> normalized;
  normalized.reserve(configs.size());
  for (const auto& c : configs) normalized.push_back(normalize_preshape(c));

  GpaResult res;
  res.aligned.resize(normalized.size());
  res.rotations.resize(normalized.size());
  Configuration consensus = normalized.front();

  auto align_all = [&] {
    for (std::size_t i = 0; i < normalized.size(); ++i) {
      res.rotations[i] = fit_rotation(normalized[i], consensus);
      res.aligned[i] = rotate(normalized[i], res.rotations[i]);
    }
  };

  const double inv_n = 1.0 / static_cast<double>(normalized.size());
  for (std::size_t iter = 1; iter <= opts.max_iterations; ++iter) {
    align_all();
    Configuration next{};
    for (const auto& a : res.aligned)
      for (std::size_t k = 0; k < kKnotCount; ++k) next[k] = next[k] + a[k];
    for (auto& p : next) p = inv_n * p;
    next = normalize_preshape(next);

    const double change = flat_distance(next, consensus);
    consensus = next;
    res.iterations = iter;
    if (change < opts.tolerance) {
      res.converged = true;
      break;
    }
  }
  align_all();

  const Rotation2 canon = canonical_rotation(consensus);
  res.mean = rotate(consensus, canon);
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    res.rotations[i] = compose(canon, res.rotations[i]);
    res.aligned[i] = rotate(normalized[i], res.rotations[i]);
  }
  return res;
}

ShapeVector tangent_project(const Configuration& aligned, const Configuration& mean) {
  const ShapeVector v = flatten(aligned);
  const ShapeVector mu = flatten(mean);
  double dot = 0.0;
  for (std::size_t i = 0; i < kShapeDim; ++i) dot += v[i] * mu[i];
  ShapeVector out;
  for (std::size_t i = 0; i < kShapeDim; ++i) out[i] = v[i] - dot * mu[i];
  return out;
}

std::vector<double> PcaModel::variance_ratios() const {
  std::vector<double> r(eigenvalues.size(), 0.0);
  if (total_variance > 0.0)
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = eigenvalues[i] / total_variance;
  return r;
}

PcaModel fit_pca(std::span<const ShapeVector> vectors, const ShapeVector& mean_shape) {
  const std::size_t n = vectors.size();
  if (n < 3) throw PreconditionError("fit_pca needs at least three vectors");

  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
  Mat data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kShapeDim));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < kShapeDim; ++c) data(r, c) = vectors[r][c];

  const Eigen::RowVectorXd col_mean = data.colwise().mean();
  data.rowwise() -= col_mean;
  const Mat cov = (data.transpose() * data) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("fit_pca: eigendecomposition failed");

  PcaModel m;
  m.mean_shape = mean_shape;
  m.n_train = n;
  const Eigen::Index dim = static_cast<Eigen::Index>(kShapeDim);
  for (Eigen::Index j = dim - 1; j >= 0; --j) {
    Eigen::VectorXd v = eig.eigenvectors().col(j);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    ShapeVector row;
    for (Eigen::Index c = 0; c < dim; ++c) row[static_cast<std::size_t>(c)] = v(c);
    m.components.push_back(row);
    m.eigenvalues.push_back(std::max(0.0, eig.eigenvalues()(j)));
  }
  for (double e : m.eigenvalues) m.total_variance += e;
  return m;
}

std::vector<double> pca_scores(const PcaModel& m, const ShapeVector& v, std::size_t k) {
  if (k > m.size())
    throw PreconditionError("pca_scores: requested " + std::to_string(k) + " components, model has " +
                            std::to_string(m.size()));
  std::vector<double> out(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = 0; c < kShapeDim; ++c) out[i] += v[c] * m.components[i][c];
  return out;
}

Configuration pca_invert(const PcaModel& m, std::span<const double> scores) {
  if (scores.size() > m.size())
    throw PreconditionError("pca_invert: more scores than components");
  ShapeVector flat = m.mean_shape;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t c = 0; c < kShapeDim; ++c) flat[c] += scores[i] * m.components[i][c];
  return unflatten(flat);
}

}  // namespace aurora
