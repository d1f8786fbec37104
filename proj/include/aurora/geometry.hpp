#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace aurora {

/// Number of tracked tongue landmarks, vallecula (index 0) to tip (index 10).
inline constexpr std::size_t kKnotCount = 11;

/// Length of the flattened shape vector: x1, y1, x2, y2, ..., x11, y11.
inline constexpr std::size_t kShapeDim = 2 * kKnotCount;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Eleven ordered landmarks. Millimetres in corpus space, dimensionless
/// after Procrustes normalisation.
using Knots = std::array<Point2, kKnotCount>;

using ShapeVector = std::array<double, kShapeDim>;

inline ShapeVector flatten(const Knots& k) {
  ShapeVector v{};
  for (std::size_t i = 0; i < kKnotCount; ++i) {
    v[2 * i] = k[i].x;
    v[2 * i + 1] = k[i].y;
  }
  return v;
}

inline Knots unflatten(const ShapeVector& v) {
  Knots k{};
  for (std::size_t i = 0; i < kKnotCount; ++i) k[i] = {v[2 * i], v[2 * i + 1]};
  return k;
}

inline bool all_finite(const Knots& k) {
  for (const auto& p : k)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  return true;
}

}  // namespace aurora
