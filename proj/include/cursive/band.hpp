#pragma once

#include <string_view>
#include <vector>

#include "cursive/contour.hpp"

namespace cursive {

enum class ShapeClass {
  concave,
  linear,
  curvilinear_no_curvature,
  curvilinear_with_curvature,
  laying,
};

inline constexpr ShapeClass kAllShapeClasses[] = {
    ShapeClass::concave, ShapeClass::linear, ShapeClass::curvilinear_with_curvature,
    ShapeClass::curvilinear_no_curvature, ShapeClass::laying};

std::string_view shape_name(ShapeClass s);
ShapeClass parse_shape(std::string_view name);

enum class ThicknessMethod { vertical_projection, contour_pairing };

struct ThicknessProfile {
  std::vector<double> arc;        // dots, increasing
  std::vector<double> thickness;  // dots, >= 0
  ThicknessMethod method = ThicknessMethod::vertical_projection;

  double mean() const;
};

struct Fracture {
  double arc = 0;  // dots from the band's right end
  double gap = 0;  // dots
};

enum class Annotation { fracture_bridged, false_elongation, false_approach, zero_length_area };
std::string_view annotation_name(Annotation a);

/// Connection region between two letter radicals. Geometry is in pixel
/// coordinates of the subword raster; the path runs in writing direction
/// (right to left), so arc 0 is the attachment to the preceding letter.
struct CursiveBand {
  Contour path{Polyline<double>(2, 0), false};   // smoothed centreline, ~1 sample per px
  Contour upper{Polyline<double>(2, 0), false};  // top ink edge per column
  Contour lower{Polyline<double>(2, 0), false};  // bottom ink edge per column
  ThicknessProfile thickness;                    // aligned with path vertices
  double length_dots = 0;                        // chord between attachment points
  double dot_px = 1;
  double baseline_y = 0;
  ShapeClass shape = ShapeClass::linear;
  std::vector<Fracture> anomalies;
  std::vector<Annotation> annotations;
  bool cleaned = false;
  /// Zero-length joint: a one-dot nominal band placed at the abutment of two
  /// radicals, cut with full-height lines.
  bool nominal = false;
  int column_begin = 0;  // leftmost band column (inclusive)
  int column_end = 0;    // rightmost band column (inclusive)

  double arc_length_dots() const { return arc_length(path) / dot_px; }
  bool has(Annotation a) const;
};

}  // namespace cursive
