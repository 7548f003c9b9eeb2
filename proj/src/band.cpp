#include "cursive/band.hpp"

#include <algorithm>
#include <string>

namespace cursive {

std::string_view shape_name(ShapeClass s) {
  switch (s) {
    case ShapeClass::concave: return "concave";
    case ShapeClass::linear: return "linear";
    case ShapeClass::curvilinear_no_curvature: return "curvilinear_no_curvature";
    case ShapeClass::curvilinear_with_curvature: return "curvilinear_with_curvature";
    case ShapeClass::laying: return "laying";
  }
  return "linear";
}

ShapeClass parse_shape(std::string_view name) {
  for (auto s : kAllShapeClasses)
    if (shape_name(s) == name) return s;
  throw Error(ErrorCode::InvalidArgument, "unknown shape class '" + std::string(name) + "'");
}

std::string_view annotation_name(Annotation a) {
  switch (a) {
    case Annotation::fracture_bridged: return "fracture_bridged";
    case Annotation::false_elongation: return "false_elongation";
    case Annotation::false_approach: return "false_approach";
    case Annotation::zero_length_area: return "zero_length_area";
  }
  return "fracture_bridged";
}

bool CursiveBand::has(Annotation a) const {
  return std::find(annotations.begin(), annotations.end(), a) != annotations.end();
}

}  // namespace cursive
