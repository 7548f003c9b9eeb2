#pragma once

#include <Eigen/Core>

#include <vector>

#include "cursive/contour.hpp"
#include "cursive/raster.hpp"

namespace cursive {

/// Pixel-edge boundaries of 8-connected ink: one outer contour per component
/// (positive area) and one per enclosed hole (negative area), in raster-scan
/// order of their first top edge. Vertices sit on pixel corners, so the
/// shoelace area of an outer contour minus its holes equals the pixel count.
std::vector<Contour> trace_boundary(const BinaryRaster& img);

/// Euclidean distance from every pixel centre to the nearest pixel centre
/// where `target` is nonzero (infinity when there is none). Rows = y.
Eigen::ArrayXXd distance_transform(const Mask& target);

/// Signed distance to the ink boundary sampled at pixel centres: positive
/// inside ink, negative outside, |value| ~ distance to the pixel-edge outline.
Eigen::ArrayXXd signed_distance(const BinaryRaster& img);

/// Bilinear sample of a (rows = y) field at continuous image coordinates.
double sample_bilinear(const Eigen::ArrayXXd& field, double x, double y);

struct ActiveContourOptions {
  double step = 0.5;             // time step of the semi-implicit update
  double external_weight = 1.0;  // pull toward the ink outline
};

/// Kass-style snake on a closed contour. Internal energy alpha*stretch +
/// beta*bend; external potential from the signed distance of `img`, so every
/// point is pulled toward the nearest ink outline. Point count is preserved;
/// zero iterations returns the input unchanged.
Contour refine_active_contour(const Contour& c, const BinaryRaster& img, int iterations,
                              double alpha, double beta,
                              const ActiveContourOptions& opts = {});

}  // namespace cursive
