#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "aurora/error.hpp"
#include "aurora/shapespace.hpp"

using namespace aurora;

namespace {

Configuration random_config(std::mt19937_64& rng, double spread = 20.0) {
  std::normal_distribution<double> n(0.0, spread);
  Configuration c;
  for (auto& p : c) p = {n(rng), n(rng)};
  return c;
}

/// Tongue-like arc with a perturbation, so shapes stay near one another.
Configuration noisy_arc(std::mt19937_64& rng, double noise) {
  std::normal_distribution<double> n(0.0, noise);
  Configuration c;
  for (std::size_t k = 0; k < kKnotCount; ++k) {
    const double th = -1.0 + 3.3 * static_cast<double>(k) / 10.0;
    c[k] = {30 * std::cos(th) + n(rng), 20 * std::sin(th) + n(rng)};
  }
  return c;
}

Configuration similarity(const Configuration& c, double angle, double scale, Point2 shift) {
  Configuration out;
  const double cs = std::cos(angle), sn = std::sin(angle);
  for (std::size_t k = 0; k < kKnotCount; ++k)
    out[k] = {scale * (cs * c[k].x - sn * c[k].y) + shift.x, scale * (sn * c[k].x + cs * c[k].y) + shift.y};
  return out;
}

double max_diff(const Configuration& a, const Configuration& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < kKnotCount; ++k) m = std::max({m, std::abs(a[k].x - b[k].x), std::abs(a[k].y - b[k].y)});
  return m;
}

/// Kabsch rotation via SVD with the reflection removed; independent of the
/// closed-form solver under test.
double kabsch_angle(const Configuration& src, const Configuration& dst) {
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (std::size_t k = 0; k < kKnotCount; ++k)
    h += Eigen::Vector2d(src[k].x, src[k].y) * Eigen::Vector2d(dst[k].x, dst[k].y).transpose();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d d = Eigen::Matrix2d::Identity();
  d(1, 1) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  const Eigen::Matrix2d r = svd.matrixV() * d * svd.matrixU().transpose();
  return std::atan2(r(1, 0), r(0, 0));
}

std::vector<ShapeVector> random_vectors(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> scale(kShapeDim);
  for (auto& s : scale) s = std::exp(g(rng));
  std::vector<ShapeVector> out(n);
  for (auto& v : out)
    for (std::size_t c = 0; c < kShapeDim; ++c) v[c] = scale[c] * g(rng);
  return out;
}

ShapeVector column_mean(const std::vector<ShapeVector>& vs) {
  ShapeVector m{};
  for (const auto& v : vs)
    for (std::size_t c = 0; c < kShapeDim; ++c) m[c] += v[c];
  for (auto& x : m) x /= static_cast<double>(vs.size());
  return m;
}

}  // namespace

TEST_SUITE("shapespace") {

TEST_CASE("preshape has zero centroid and unit size") {
  std::mt19937_64 rng(1);
  const auto c = normalize_preshape(random_config(rng));
  CHECK(std::abs(centroid(c).x) <= 1e-12);
  CHECK(std::abs(centroid(c).y) <= 1e-12);
  CHECK(centroid_size(c) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("all landmarks identical is degenerate") {
  Configuration c;
  c.fill({4, 4});
  CHECK_THROWS_AS(normalize_preshape(c), DegenerateGeometryError);
  std::vector<Configuration> cs = {c, c};
  CHECK_THROWS_AS(gpa_align(cs), DegenerateGeometryError);
}

TEST_CASE("rotation solver agrees with SVD oracle and never reflects") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto a = normalize_preshape(random_config(rng));
    const auto b = normalize_preshape(random_config(rng));
    const Rotation2 r = fit_rotation(a, b);
    CHECK(std::abs(r.determinant() - 1.0) <= 1e-10);
    const double oracle = kabsch_angle(a, b);
    const double got = std::atan2(r.s, r.c);
    CHECK(std::abs(std::remainder(got - oracle, 2 * std::numbers::pi)) <= 1e-9);
  }
}

TEST_CASE("two identical configurations") {
  std::mt19937_64 rng(2);
  const auto c = noisy_arc(rng, 1.0);
  std::vector<Configuration> cs = {c, c};
  const GpaResult g = gpa_align(cs);
  CHECK(g.converged);
  CHECK(g.iterations <= 2);
  CHECK(max_diff(g.aligned[0], g.aligned[1]) <= 1e-12);
  CHECK(max_diff(g.mean, g.aligned[0]) <= 1e-12);
}

TEST_CASE("rotated, translated and scaled copy aligns onto the original") {
  std::mt19937_64 rng(3);
  const auto c = noisy_arc(rng, 1.0);
  const auto moved = similarity(c, 37.0 * std::numbers::pi / 180.0, 2.4, {5, -3});
  std::vector<Configuration> cs = {c, moved};
  const GpaResult g = gpa_align(cs);
  CHECK(max_diff(g.aligned[0], g.aligned[1]) <= 1e-8);
}

TEST_CASE("consensus is canonically oriented") {
  std::mt19937_64 rng(4);
  std::vector<Configuration> cs;
  for (int i = 0; i < 10; ++i) cs.push_back(noisy_arc(rng, 1.0));
  const GpaResult g = gpa_align(cs);
  const Point2 v = g.mean[10] - g.mean[0];
  CHECK(v.x < 0.0);
  CHECK(std::abs(v.y) <= 1e-12);
}

TEST_CASE("non-convergence is reported, not thrown") {
  std::mt19937_64 rng(6);
  std::vector<Configuration> cs;
  for (int i = 0; i < 20; ++i) cs.push_back(random_config(rng));
  GpaOptions o;
  o.max_iterations = 1;
  o.tolerance = 0.0;
  const GpaResult g = gpa_align(cs, o);
  CHECK_FALSE(g.converged);
  CHECK(g.iterations == 1);
}

TEST_CASE("tangent projection at the base point is zero") {
  std::mt19937_64 rng(7);
  const auto mu = normalize_preshape(noisy_arc(rng, 0.0));
  for (double x : tangent_project(mu, mu)) CHECK(std::abs(x) <= 1e-15);
}

TEST_CASE("tangent vectors are orthogonal to the mean") {
  std::mt19937_64 rng(8);
  const auto mu = normalize_preshape(noisy_arc(rng, 0.0));
  const auto v = normalize_preshape(noisy_arc(rng, 2.0));
  const auto t = tangent_project(v, mu);
  const auto m = flatten(mu);
  double dot = 0.0;
  for (std::size_t c = 0; c < kShapeDim; ++c) dot += t[c] * m[c];
  CHECK(std::abs(dot) <= 1e-15);
}

TEST_CASE("identical vectors give zero eigenvalues") {
  std::vector<ShapeVector> vs(5);
  for (auto& v : vs)
    for (std::size_t c = 0; c < kShapeDim; ++c) v[c] = 0.1 * static_cast<double>(c);
  const PcaModel m = fit_pca(vs, vs[0]);
  REQUIRE(m.size() == kShapeDim);
  for (double e : m.eigenvalues) CHECK(e <= 1e-20);
}

TEST_CASE("one-direction generator: first eigenvalue equals var(a)") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  ShapeVector dir{}, base{};
  double norm = 0.0;
  for (std::size_t c = 0; c < kShapeDim; ++c) {
    dir[c] = g(rng);
    base[c] = g(rng);
    norm += dir[c] * dir[c];
  }
  for (auto& x : dir) x /= std::sqrt(norm);
  std::vector<double> a(500);
  std::vector<ShapeVector> vs;
  double mean_a = 0.0;
  for (auto& x : a) {
    x = 3.0 * g(rng);
    mean_a += x / a.size();
    ShapeVector v;
    for (std::size_t c = 0; c < kShapeDim; ++c) v[c] = base[c] + x * dir[c];
    vs.push_back(v);
  }
  double var_a = 0.0;
  for (double x : a) var_a += (x - mean_a) * (x - mean_a) / (a.size() - 1);
  const PcaModel m = fit_pca(vs, base);
  CHECK(std::abs(m.eigenvalues[0] - var_a) <= 1e-8 * var_a);
  for (std::size_t i = 1; i < m.size(); ++i) CHECK(m.eigenvalues[i] <= 1e-10);
  double dot = 0.0;
  for (std::size_t c = 0; c < kShapeDim; ++c) dot += dir[c] * m.components[0][c];
  CHECK(std::abs(std::abs(dot) - 1.0) <= 1e-10);
}

TEST_CASE("eigenvector sign convention") {
  std::mt19937_64 rng(10);
  const auto vs = random_vectors(rng, 40);
  const PcaModel m = fit_pca(vs, ShapeVector{});
  for (const auto& comp : m.components) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < kShapeDim; ++c)
      if (std::abs(comp[c]) > std::abs(comp[arg])) arg = c;
    CHECK(comp[arg] > 0.0);
  }
}

TEST_CASE("scores and inversion basics") {
  std::mt19937_64 rng(11);
  const auto vs = random_vectors(rng, 30);
  const PcaModel m = fit_pca(vs, column_mean(vs));
  SUBCASE("zero vector scores zero") {
    for (double s : pca_scores(m, ShapeVector{})) CHECK(s == 0.0);
  }
  SUBCASE("first component scores (1, 0)") {
    const auto s = pca_scores(m, m.components[0]);
    CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(s[1]) <= 1e-14);
  }
  SUBCASE("k out of range") { CHECK_THROWS_AS(pca_scores(m, ShapeVector{}, kShapeDim + 1), PreconditionError); }
  SUBCASE("zero scores give the mean") {
    const std::vector<double> zero(2, 0.0);
    CHECK(flatten(pca_invert(m, zero)) == m.mean_shape);
  }
  SUBCASE("small score moves by at most its size") {
    const std::vector<double> s = {1e-6, 0.0};
    const auto v = flatten(pca_invert(m, s));
    double d = 0.0;
    for (std::size_t c = 0; c < kShapeDim; ++c) d += (v[c] - m.mean_shape[c]) * (v[c] - m.mean_shape[c]);
    CHECK(std::sqrt(d) <= 1e-6 * (1 + 1e-6));
  }
}

TEST_CASE("property: similarity invariance, preshape invariants and PCA identities") {
  std::mt19937_64 rng(2025);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng() % 12;
    std::vector<Configuration> cs;
    for (std::size_t i = 0; i < n; ++i) cs.push_back(noisy_arc(rng, 0.5 + 3.0 * u(rng)));
    const double angle = 2 * std::numbers::pi * u(rng);
    const double scale = 0.2 + 5.0 * u(rng);
    const Point2 shift{100 * u(rng) - 50, 100 * u(rng) - 50};
    std::vector<Configuration> moved;
    for (const auto& c : cs) moved.push_back(similarity(c, angle, scale, shift));

    const GpaResult a = gpa_align(cs), b = gpa_align(moved);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(max_diff(a.aligned[i], b.aligned[i]) <= 1e-7);
      const Point2 c = centroid(a.aligned[i]);
      CHECK(std::abs(c.x) <= 1e-9);
      CHECK(std::abs(c.y) <= 1e-9);
      CHECK(std::abs(centroid_size(a.aligned[i]) - 1.0) <= 1e-9);
      CHECK(std::abs(a.rotations[i].determinant() - 1.0) <= 1e-10);
    }

    const auto vs = random_vectors(rng, 3 + rng() % 40);
    const auto mean = column_mean(vs);
    const PcaModel m = fit_pca(vs, mean);
    double cum = 0.0, prev = 0.0;
    for (double r : m.variance_ratios()) {
      cum += r;
      CHECK(cum >= prev - 1e-15);
      prev = cum;
    }
    CHECK(std::abs(cum - 1.0) <= 1e-10);

    // Full-rank round trip and truncation error on the centred training set.
    const std::size_t k = 1 + rng() % (kShapeDim - 1);
    double sq_err = 0.0, full_err = 0.0;
    for (const auto& v : vs) {
      ShapeVector d;
      for (std::size_t c = 0; c < kShapeDim; ++c) d[c] = v[c] - mean[c];
      const auto all = pca_scores(m, d, kShapeDim);
      const auto back = flatten(pca_invert(m, all));
      for (std::size_t c = 0; c < kShapeDim; ++c) full_err = std::max(full_err, std::abs(back[c] - v[c]));
      const auto part = flatten(pca_invert(m, std::span(all).first(k)));
      for (std::size_t c = 0; c < kShapeDim; ++c) sq_err += (part[c] - v[c]) * (part[c] - v[c]);
    }
    CHECK(full_err <= 1e-8);
    double discarded = 0.0;
    for (std::size_t i = k; i < m.size(); ++i) discarded += m.eigenvalues[i];
    CHECK(std::abs(sq_err / static_cast<double>(vs.size() - 1) - discarded) <= 1e-8);
  }
}

}  // TEST_SUITE
