#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cursive/band.hpp"
#include "cursive/error.hpp"
#include "cursive/raster.hpp"

namespace cursive {

/// k ordered landmarks, one per column.
template <typename S>
using LandmarkShape = Eigen::Matrix<S, 2, Eigen::Dynamic>;

/// Maps b onto a: p -> scale * R(angle) * p + translation. No reflection.
template <typename S>
struct SimilarityTransform {
  S scale = S(1);
  S angle = S(0);  // radians, counter-clockwise in (x, y)
  Eigen::Matrix<S, 2, 1> translation = Eigen::Matrix<S, 2, 1>::Zero();

  Eigen::Matrix<S, 2, 2> rotation() const {
    Eigen::Matrix<S, 2, 2> r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
  }
  LandmarkShape<S> apply(const LandmarkShape<S>& p) const {
    return ((scale * rotation()) * p).colwise() + translation;
  }
};

template <typename S>
struct ProcrustesFit {
  SimilarityTransform<S> transform;
  S distance = S(0);  // residual between the unit-size, centred shapes
};

template <typename S>
struct GpaResult {
  LandmarkShape<S> mean;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

template <typename S>
void check_shape(const LandmarkShape<S>& p) {
  if (p.cols() < 3) throw Error(ErrorCode::DegenerateShape, "a landmark shape needs at least 3 points");
}

template <typename S>
S centroid_size(const LandmarkShape<S>& centred) {
  return centred.norm();
}

// Angle rotating b onto a, both centred.
template <typename S>
S optimal_angle(const LandmarkShape<S>& a, const LandmarkShape<S>& b) {
  const S dot = (a.array() * b.array()).sum();
  const S cross = (b.row(0).array() * a.row(1).array() - b.row(1).array() * a.row(0).array()).sum();
  return std::atan2(cross, dot);
}

template <typename S>
LandmarkShape<S> rotate(const LandmarkShape<S>& p, S angle) {
  Eigen::Matrix<S, 2, 2> r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r * p;
}

}  // namespace detail

/// Centred copy scaled to unit centroid size (Frobenius norm).
template <typename S>
LandmarkShape<S> normalize_shape(const LandmarkShape<S>& p) {
  detail::check_shape(p);
  LandmarkShape<S> c = p.colwise() - p.rowwise().mean();
  const S size = detail::centroid_size(c);
  const S scale = p.cwiseAbs().maxCoeff();
  if (!(size > S(1e-12) * std::max(S(1), scale)))
    throw Error(ErrorCode::DegenerateShape, "all landmarks coincide");
  return c / size;
}

template <typename S>
ProcrustesFit<S> procrustes_align(const LandmarkShape<S>& a, const LandmarkShape<S>& b) {
  if (a.cols() != b.cols())
    throw Error(ErrorCode::MismatchedLandmarkCount,
                std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) + " landmarks");
  const LandmarkShape<S> na = normalize_shape(a);
  const LandmarkShape<S> nb = normalize_shape(b);
  ProcrustesFit<S> fit;
  const S theta = detail::optimal_angle(na, nb);
  fit.distance = (na - detail::rotate(nb, theta)).norm();
  const Eigen::Matrix<S, 2, 1> ca = a.rowwise().mean();
  const Eigen::Matrix<S, 2, 1> cb = b.rowwise().mean();
  fit.transform.angle = theta;
  fit.transform.scale = (a.colwise() - ca).norm() / (b.colwise() - cb).norm();
  fit.transform.translation = ca - fit.transform.scale * (fit.transform.rotation() * cb);
  return fit;
}

template <typename S>
S procrustes_distance(const LandmarkShape<S>& a, const LandmarkShape<S>& b) {
  return procrustes_align(a, b).distance;
}

/// Generalized Procrustes mean, starting from the first shape. The result is
/// centred and unit-size; `converged` is false when max_iter ran out.
template <typename S>
GpaResult<S> procrustes_mean(const std::vector<LandmarkShape<S>>& shapes, S tol = S(1e-8),
                             int max_iter = 100) {
  if (shapes.empty()) throw Error(ErrorCode::NoShapes, "no shapes to average");
  if (!(tol > 0) || max_iter < 1) throw Error(ErrorCode::InvalidArgument, "tol must be > 0, max_iter >= 1");
  const auto k = shapes.front().cols();
  std::vector<LandmarkShape<S>> norm;
  norm.reserve(shapes.size());
  for (const auto& s : shapes) {
    if (s.cols() != k) throw Error(ErrorCode::MismatchedLandmarkCount, "shapes differ in landmark count");
    norm.push_back(normalize_shape(s));
  }
  GpaResult<S> r;
  r.mean = norm.front();
  for (int it = 1; it <= max_iter; ++it) {
    LandmarkShape<S> sum = LandmarkShape<S>::Zero(2, k);
    for (const auto& s : norm) sum += detail::rotate(s, detail::optimal_angle(r.mean, s));
    LandmarkShape<S> next = normalize_shape(LandmarkShape<S>(sum));
    // Keep the mean's orientation pinned to the previous iterate.
    next = detail::rotate(next, detail::optimal_angle(r.mean, next));
    const S moved = (next - r.mean).norm();
    r.mean = next;
    r.iterations = it;
    if (moved < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

// --- variability ---------------------------------------------------------------

struct VariabilitySample {
  ShapeClass shape = ShapeClass::linear;
  double length_dots = 0;
  double thickness_dots = 0;  // mean over the band
};

struct VariabilityRow {
  ShapeClass shape = ShapeClass::linear;
  double size_variability = 0;       // percent
  double thickness_variability = 0;  // percent
  std::optional<int> n_instances;  // unknown for published reference rows
};

struct VariabilityReport {
  std::vector<VariabilityRow> rows;  // in kAllShapeClasses order; classes with < 2 instances left out
  const VariabilityRow* find(ShapeClass s) const;
};

/// 100 * sample standard deviation / mean.
double coefficient_of_variation(const std::vector<double>& v);

VariabilityReport variability_report(const std::vector<VariabilitySample>& samples);
VariabilityReport variability_report(const std::vector<CursiveBand>& bands);

// --- diacritics ------------------------------------------------------------------

struct DiacriticFrame {
  Point2<double> origin = Point2<double>::Zero();
  Point2<double> x_axis = Point2<double>(-1, 0);  // writing direction along the baseline
  Point2<double> y_axis = Point2<double>(0, -1);  // up
  Point2<double> unit = Point2<double>::Ones();   // (width, height) px of the base letter
};

struct DiacriticCoords {
  double x = 0;       // base widths
  double y = 0;       // base heights
  double extent = 0;  // base widths
};

/// Frame of a base letter: origin where the vertical through its input point
/// meets the baseline; unit = bounding box of the letter body (dot-sized
/// detached pieces excluded when the dot unit is known).
DiacriticFrame diacritic_frame(const BinaryRaster& grapheme, const std::optional<Point2<double>>& input,
                               double baseline_y);

DiacriticCoords diacritic_coords(const DiacriticFrame& frame, const Component& mark);

}  // namespace cursive
