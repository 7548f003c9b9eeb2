#pragma once

#include <string>
#include <vector>

#include "cursive/contour.hpp"
#include "cursive/synth.hpp"

namespace cursive {

/// Piecewise cubic fit of a closed contour (Schneider's recursive
/// least-squares scheme). Every contour point lies within `max_error` px
/// of the curve; the pieces join end to end and close the loop.
std::vector<CubicBezier> fit_cubic_beziers(const Contour& contour, double max_error);

/// Largest distance from a contour point to the fitted curve, measured on a
/// dense sampling of every piece.
double max_fit_deviation(const Contour& contour, const std::vector<CubicBezier>& curve);

/// SVG path data ("M ... C ... Z") for the given closed pieces.
std::string svg_path_data(const std::vector<std::vector<CubicBezier>>& loops);

/// Standalone SVG document of a grapheme outline, evenodd fill.
std::string grapheme_svg(const std::vector<Contour>& contours, int width, int height, double max_error);

}  // namespace cursive
