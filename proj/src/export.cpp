#include "aurora/export.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "numeric.hpp"

namespace aurora {

namespace {

constexpr double kPanelW = 220.0;
constexpr double kPanelH = 170.0;
constexpr double kMargin = 12.0;
constexpr double kLabelH = 18.0;

struct Box {
  double x0 = std::numeric_limits<double>::max(), y0 = std::numeric_limits<double>::max();
  double x1 = std::numeric_limits<double>::lowest(), y1 = std::numeric_limits<double>::lowest();

  void add(const TongueContour& c) {
    for (const auto& p : c.points) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  }
};

// Maps mm coordinates into a panel, preserving aspect ratio; y grows upwards.
struct Viewport {
  Box box;
  double left, top, width, height;
  bool mirror;

  Point2 map(Point2 p) const {
    const double sx = width / std::max(box.x1 - box.x0, 1e-9);
    const double sy = height / std::max(box.y1 - box.y0, 1e-9);
    const double s = std::min(sx, sy);
    const double cx = 0.5 * (box.x0 + box.x1), cy = 0.5 * (box.y0 + box.y1);
    const double dx = mirror ? cx - p.x : p.x - cx;
    return {left + 0.5 * width + s * dx, top + 0.5 * height - s * (p.y - cy)};
  }
};

std::string xml_escape(const std::string& in) {
  std::string out;
  for (char ch : in) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

bool tip_on_right(const TongueContour& c) { return c.points.back().x > c.points.front().x; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string polyline(const TongueContour& c, const Viewport& vp, const char* style) {
  std::string s = "<polyline fill=\"none\" " + std::string(style) + " points=\"";
  for (std::size_t i = 0; i < kContourPoints; ++i) {
    const Point2 q = vp.map(c.points[i]);
    s += (i ? " " : "") + fmt(q.x) + "," + fmt(q.y);
  }
  return s + "\"/>\n";
}

std::string knot_marks(const TongueContour& c, const Viewport& vp, const char* color) {
  std::string s;
  for (std::size_t k : c.knot_indices) {
    const Point2 q = vp.map(c.points[k]);
    s += "<circle cx=\"" + fmt(q.x) + "\" cy=\"" + fmt(q.y) + "\" r=\"2\" fill=\"" + color + "\"/>\n";
  }
  return s;
}

std::string svg_open(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt(w) + "\" height=\"" + fmt(h) + "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string label(double x, double y, const std::string& text) {
  return "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + text + "</text>\n";
}

std::string hz_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f", v);
  return buf;
}

Viewport panel(const Box& box, std::size_t col, std::size_t row, bool mirror) {
  const double left = kMargin + static_cast<double>(col) * (kPanelW + kMargin);
  const double top = kMargin + static_cast<double>(row) * (kPanelH + kLabelH + kMargin) + kLabelH;
  return {box, left + 6.0, top + 6.0, kPanelW - 12.0, kPanelH - 12.0, mirror};
}

std::string panel_frame(const Viewport& vp) {
  return "<rect x=\"" + fmt(vp.left - 6.0) + "\" y=\"" + fmt(vp.top - 6.0) + "\" width=\"" + fmt(kPanelW) +
         "\" height=\"" + fmt(kPanelH) + "\" fill=\"none\" stroke=\"#bbbbbb\"/>\n";
}

}  // namespace

void write_contour_csv(std::ostream& out, const TongueContour& c) {
  out << "index,x_mm,y_mm,is_knot\n";
  std::size_t next_knot = 0;
  for (std::size_t i = 0; i < kContourPoints; ++i) {
    const bool knot = next_knot < kKnotCount && c.knot_indices[next_knot] == i;
    if (knot) ++next_knot;
    out << i << ',' << detail::format_double(c.points[i].x) << ',' << detail::format_double(c.points[i].y) << ','
        << (knot ? 1 : 0) << '\n';
  }
}

void write_grid_csv(std::ostream& out, const ContourGrid& g) {
  out << "f1_hz,f2_hz,index,x_mm,y_mm,is_knot\n";
  for (std::size_t i = 0; i < g.f1_axis.size(); ++i) {
    for (std::size_t j = 0; j < g.f2_axis.size(); ++j) {
      const auto& c = g.at(i, j);
      std::size_t next_knot = 0;
      for (std::size_t p = 0; p < kContourPoints; ++p) {
        const bool knot = next_knot < kKnotCount && c.knot_indices[next_knot] == p;
        if (knot) ++next_knot;
        out << detail::format_double(g.f1_axis[i]) << ',' << detail::format_double(g.f2_axis[j]) << ',' << p << ','
            << detail::format_double(c.points[p].x) << ',' << detail::format_double(c.points[p].y) << ','
            << (knot ? 1 : 0) << '\n';
      }
    }
  }
}

std::string contour_svg(const TongueContour& c) {
  Box box;
  box.add(c);
  const Viewport vp{box, 20.0, 20.0, 360.0, 260.0, tip_on_right(c)};
  std::string s = svg_open(400.0, 320.0);
  s += polyline(c, vp, c.extrapolated ? "stroke=\"#d95f02\" stroke-width=\"2\" stroke-dasharray=\"6,3\""
                                      : "stroke=\"#1b5e20\" stroke-width=\"2\"");
  s += knot_marks(c, vp, "#333333");
  s += label(200.0, 310.0,
             "F1 = " + hz_label(c.source_f1_hz) + " Hz, F2 = " + hz_label(c.source_f2_hz) + " Hz" +
                 (c.extrapolated ? " (extrapolated)" : ""));
  return s + "</svg>\n";
}

std::string grid_svg(const ContourGrid& g) {
  Box box;
  for (const auto& c : g.contours) box.add(c);
  const bool mirror = !g.contours.empty() && tip_on_right(g.contours.front());
  const std::size_t cols = g.f2_axis.size(), rows = g.f1_axis.size();
  std::string s = svg_open(kMargin + static_cast<double>(cols) * (kPanelW + kMargin),
                           kMargin + static_cast<double>(rows) * (kPanelH + kLabelH + kMargin));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const Viewport vp = panel(box, j, i, mirror);
      s += "<g class=\"panel\">\n" + panel_frame(vp);
      s += label(vp.left - 6.0 + kPanelW / 2.0, vp.top - 10.0,
                 "F1 = " + hz_label(g.f1_axis[i]) + " Hz, F2 = " + hz_label(g.f2_axis[j]) + " Hz");
      s += polyline(g.at(i, j), vp, "stroke=\"#1b5e20\" stroke-width=\"2\"");
      s += "</g>\n";
    }
  }
  return s + "</svg>\n";
}

std::string evaluation_svg(std::span<const ItemEvaluation> evals) {
  Box box;
  for (const auto& e : evals) {
    box.add(e.mean_contour);
    box.add(e.predicted_contour);
  }
  const bool mirror = !evals.empty() && tip_on_right(evals.front().mean_contour);
  const std::size_t cols = std::min<std::size_t>(5, std::max<std::size_t>(1, evals.size()));
  const std::size_t rows = (evals.size() + cols - 1) / cols;
  std::string s = svg_open(kMargin + static_cast<double>(cols) * (kPanelW + kMargin),
                           kMargin + static_cast<double>(std::max<std::size_t>(rows, 1)) * (kPanelH + kLabelH + kMargin));
  for (std::size_t n = 0; n < evals.size(); ++n) {
    const auto& e = evals[n];
    const Viewport vp = panel(box, n % cols, n / cols, mirror);
    s += "<g class=\"panel\">\n" + panel_frame(vp);
    s += label(vp.left - 6.0 + kPanelW / 2.0, vp.top - 10.0, xml_escape(e.item) + " (RMSD " + fmt(e.rmsd_mm) + " mm)");
    s += polyline(e.mean_contour, vp, "stroke=\"#444444\" stroke-width=\"2\" stroke-dasharray=\"4,3\"");
    s += polyline(e.predicted_contour, vp, "stroke=\"#1b5e20\" stroke-width=\"2\"");
    s += "</g>\n";
  }
  return s + "</svg>\n";
}

}  // namespace aurora
