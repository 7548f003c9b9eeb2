#pragma once

#include <optional>
#include <vector>

#include "cursive/band.hpp"
#include "cursive/raster.hpp"

namespace cursive {

struct QualityConfig {
  double fracture_thickness = 0.25;  // dots
  double fracture_run = 0.25;        // dots of contiguous thin stroke
  double background_run_px = 1.0;    // path crossing background
  int bins = 16;
  double entropy_threshold = 1.5;    // bits, at 16 bins
  double portion_tolerance = 0.5;    // dots
  double boundary_smoothing = 0;     // dots, before direction statistics
};

struct PortionCheck {
  double expected = 0;
  double measured = 0;
  bool violation = false;
  double deviation() const { return measured - expected; }
};

struct QualityReport {
  std::vector<Fracture> fractures;
  double regularity_entropy = 0;
  bool regular = true;
  std::vector<PortionCheck> portion_distance_violations;
};

struct Regularity {
  double entropy = 0;  // bits
  bool regular = true;
};

/// Pen width in pixels: mode of the row and column ink run lengths, after
/// dropping runs longer than 4x the provisional mode.
double estimate_dot_unit(const BinaryRaster& img);

/// Stroke thickness in dots at every vertex of `band_path` (pixel
/// coordinates). Needs img.dot_px().
ThicknessProfile thickness_profile(const BinaryRaster& img, const Contour& band_path,
                                   ThicknessMethod method);

std::vector<Fracture> detect_fractures(const ThicknessProfile& profile, const BinaryRaster& img,
                                       const Contour& band_path, const QualityConfig& cfg = {});

Regularity regularity_entropy(const Contour& segment, int bins = 16, double threshold = 1.5);

PortionCheck portion_distance_check(const CursiveBand& band, double expected_dots,
                                    double tolerance = 0.5);

/// Upper ink boundary of the band in dots, the curve regularity is measured
/// on. Smoothing is off by default: it blurs tremor of pen-width wavelength
/// together with the pixel staircase, and the staircase is the same on clean
/// and shaky strokes.
Contour band_boundary_for_regularity(const CursiveBand& band, double smoothing_dots = 0);

/// Fractures, regularity of the upper boundary and (when given) the portion
/// distance check for one band.
QualityReport assess_band(const CursiveBand& band, const BinaryRaster& img,
                          std::optional<double> expected_dots, const QualityConfig& cfg = {});

}  // namespace cursive
