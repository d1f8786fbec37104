#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "aurora/inversion.hpp"

namespace aurora {

/// 100 rows of `index,x_mm,y_mm,is_knot` after a header line.
void write_contour_csv(std::ostream& out, const TongueContour& c);

/// Rows of `f1_hz,f2_hz,index,x_mm,y_mm,is_knot`, 100 per grid contour.
void write_grid_csv(std::ostream& out, const ContourGrid& g);

/// SVG figures draw the tongue tip on the left; contours whose tip lies to the
/// right of the vallecula are mirrored for display.
std::string contour_svg(const TongueContour& c);
std::string grid_svg(const ContourGrid& g);
/// One panel per item with the observed mean contour and the prediction.
std::string evaluation_svg(std::span<const ItemEvaluation> evals);

}  // namespace aurora
