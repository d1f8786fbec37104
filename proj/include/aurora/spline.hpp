#pragma once

#include <span>
#include <vector>

namespace aurora {

/// Natural cubic spline through (t_i, y_i), strictly increasing t.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::span<const double> t, std::span<const double> y);

  double operator()(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

 private:
  std::size_t segment(double t) const;

  std::vector<double> t_, y_, m_;  // m_ = second derivatives at knots
};

}  // namespace aurora
