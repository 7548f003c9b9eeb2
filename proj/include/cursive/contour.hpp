#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "cursive/error.hpp"

namespace cursive {

/// Points stored column-wise: row 0 is x, row 1 is y (image coordinates).
template <typename Scalar>
using Polyline = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;
template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

/// Oriented polyline. Traced outer boundaries have positive shoelace area
/// (ink on the left of (-dy, dx)), holes negative.
template <typename Scalar>
struct BasicContour {
  Polyline<Scalar> points;
  bool closed = true;

  Eigen::Index size() const { return points.cols(); }
};
using Contour = BasicContour<double>;

template <typename Scalar>
struct BasicCurvatureProfile {
  std::vector<Scalar> arc;    // dots along the resampled curve
  std::vector<Scalar> kappa;  // signed, 1/dots
  Scalar window = 1;
  Polyline<Scalar> points;    // resampled curve the samples refer to
};
using CurvatureProfile = BasicCurvatureProfile<double>;

// --- basic measures ----------------------------------------------------------

template <typename Scalar>
Scalar signed_area(const BasicContour<Scalar>& c) {
  const auto n = c.size();
  Scalar a = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto j = (i + 1) % n;
    a += c.points(0, i) * c.points(1, j) - c.points(0, j) * c.points(1, i);
  }
  return a / 2;
}

template <typename Scalar>
Eigen::Index segment_count(const BasicContour<Scalar>& c) {
  if (c.size() < 2) return 0;
  return c.closed ? c.size() : c.size() - 1;
}

template <typename Scalar>
Point2<Scalar> segment_vector(const BasicContour<Scalar>& c, Eigen::Index i) {
  return c.points.col((i + 1) % c.size()) - c.points.col(i);
}

/// Cumulative arc length at each vertex; for closed contours one extra entry
/// holds the full perimeter.
template <typename Scalar>
std::vector<Scalar> cumulative_length(const BasicContour<Scalar>& c) {
  std::vector<Scalar> s{0};
  const auto m = segment_count(c);
  s.reserve(static_cast<std::size_t>(m) + 1);
  for (Eigen::Index i = 0; i < m; ++i) s.push_back(s.back() + segment_vector(c, i).norm());
  return s;
}

template <typename Scalar>
Scalar arc_length(const BasicContour<Scalar>& c) {
  return cumulative_length(c).back();
}

/// Reversal that keeps the first vertex of a closed contour in place, so
/// per-sample quantities of the reversed curve line up index-reversed.
template <typename Scalar>
BasicContour<Scalar> reversed(const BasicContour<Scalar>& c) {
  BasicContour<Scalar> r{Polyline<Scalar>(2, c.size()), c.closed};
  const auto n = c.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto src = c.closed ? (n - i) % n : n - 1 - i;
    r.points.col(i) = c.points.col(src);
  }
  return r;
}

template <typename Scalar>
BasicContour<Scalar> scaled(const BasicContour<Scalar>& c, Scalar s) {
  return {c.points * s, c.closed};
}

/// Point at arc position `t` (clamped for open curves, wrapped for closed).
template <typename Scalar>
Point2<Scalar> point_at(const BasicContour<Scalar>& c, const std::vector<Scalar>& cum, Scalar t) {
  const Scalar total = cum.back();
  if (c.closed) {
    t = std::fmod(t, total);
    if (t < 0) t += total;
  } else {
    t = std::clamp(t, Scalar(0), total);
  }
  auto it = std::upper_bound(cum.begin(), cum.end(), t);
  auto i = static_cast<Eigen::Index>(std::distance(cum.begin(), it)) - 1;
  i = std::clamp<Eigen::Index>(i, 0, segment_count(c) - 1);
  const Scalar len = cum[i + 1] - cum[i];
  const Scalar u = len > 0 ? (t - cum[i]) / len : Scalar(0);
  return c.points.col(i) + u * segment_vector(c, i);
}

// --- resampling --------------------------------------------------------------

/// Uniform arc-length resampling with spacing as close to `step` as the
/// total length allows. Open curves keep both endpoints.
template <typename Scalar>
BasicContour<Scalar> resample_step(const BasicContour<Scalar>& c, Scalar step) {
  const auto cum = cumulative_length(c);
  const Scalar total = cum.back();
  if (!(total > 0)) throw Error(ErrorCode::DegenerateContour, "contour has zero length");
  if (!(step > 0)) throw Error(ErrorCode::InvalidArgument, "resampling step must be positive");
  const auto intervals = std::max<Eigen::Index>(
      c.closed ? 3 : 1, static_cast<Eigen::Index>(std::llround(total / step)));
  const Scalar h = total / static_cast<Scalar>(intervals);
  const auto n = c.closed ? intervals : intervals + 1;
  BasicContour<Scalar> out{Polyline<Scalar>(2, n), c.closed};
  for (Eigen::Index i = 0; i < n; ++i) out.points.col(i) = point_at(c, cum, h * static_cast<Scalar>(i));
  return out;
}

/// Index of the vertex with minimal (y, x).
template <typename Scalar>
Eigen::Index topmost_vertex(const Polyline<Scalar>& p) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < p.cols(); ++i) {
    if (p(1, i) < p(1, best) || (p(1, i) == p(1, best) && p(0, i) < p(0, best))) best = i;
  }
  return best;
}

/// `k` landmarks at equal arc spacing, starting at the vertex of minimal
/// (y, x) and following the contour orientation. Open curves keep both
/// endpoints.
template <typename Scalar>
Polyline<Scalar> resample_arclength(const BasicContour<Scalar>& c, Eigen::Index k) {
  if (k < 3) throw Error(ErrorCode::InvalidArgument, "landmark count must be >= 3");
  const auto cum = cumulative_length(c);
  const Scalar total = cum.back();
  if (!(total > 0)) throw Error(ErrorCode::DegenerateContour, "contour has zero length");
  const Scalar start = c.closed ? cum[static_cast<std::size_t>(topmost_vertex(c.points))] : Scalar(0);
  const Scalar h = c.closed ? total / static_cast<Scalar>(k) : total / static_cast<Scalar>(k - 1);
  Polyline<Scalar> out(2, k);
  for (Eigen::Index i = 0; i < k; ++i) out.col(i) = point_at(c, cum, start + h * static_cast<Scalar>(i));
  return out;
}

/// Gaussian smoothing of the vertex sequence; `sigma` is in samples. Open
/// curves are padded by point reflection through each endpoint, which keeps
/// endpoints fixed and straight ends straight.
template <typename Scalar>
BasicContour<Scalar> smooth_gaussian(const BasicContour<Scalar>& c, Scalar sigma) {
  const auto n = c.size();
  if (!(sigma > 0) || n < 3) return c;
  const auto radius = static_cast<Eigen::Index>(std::ceil(3 * sigma));
  std::vector<Scalar> w(static_cast<std::size_t>(2 * radius + 1));
  Scalar wsum = 0;
  for (Eigen::Index j = -radius; j <= radius; ++j) {
    const Scalar v = std::exp(-Scalar(0.5) * Scalar(j * j) / (sigma * sigma));
    w[static_cast<std::size_t>(j + radius)] = v;
    wsum += v;
  }
  const auto sample = [&](Eigen::Index i) -> Point2<Scalar> {
    if (c.closed) return c.points.col(((i % n) + n) % n);
    if (i < 0) {
      const auto m = std::min<Eigen::Index>(-i, n - 1);
      return 2 * c.points.col(0) - c.points.col(m);
    }
    if (i >= n) {
      const auto m = std::max<Eigen::Index>(2 * (n - 1) - i, 0);
      return 2 * c.points.col(n - 1) - c.points.col(m);
    }
    return c.points.col(i);
  };
  BasicContour<Scalar> out{Polyline<Scalar>(2, n), c.closed};
  for (Eigen::Index i = 0; i < n; ++i) {
    Point2<Scalar> acc = Point2<Scalar>::Zero();
    for (Eigen::Index j = -radius; j <= radius; ++j)
      acc += w[static_cast<std::size_t>(j + radius)] * sample(i + j);
    out.points.col(i) = acc / wsum;
  }
  return out;
}

/// Pixel outline smoothed at `sigma_px` for landmarking: resampled at half a
/// pixel, then Gaussian-smoothed, which removes the staircase whose length
/// depends on stroke direction.
template <typename Scalar>
BasicContour<Scalar> smoothed_outline(const BasicContour<Scalar>& c, Scalar sigma_px) {
  const auto r = resample_step(c, Scalar(0.5));
  return smooth_gaussian(r, 2 * sigma_px);
}

// --- curvature ---------------------------------------------------------------

template <typename Scalar>
Scalar turning_angle(const Point2<Scalar>& a, const Point2<Scalar>& b) {
  return std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
}

/// Turning angle per arc length over `window`, after uniform resampling at
/// window/4. Units follow the contour (pass dots in, get 1/dots out).
template <typename Scalar>
BasicCurvatureProfile<Scalar> curvature_profile(const BasicContour<Scalar>& c, Scalar window) {
  if (!(window > 0)) throw Error(ErrorCode::InvalidArgument, "curvature window must be positive");
  const auto r = resample_step(c, window / 4);
  const auto n = r.size();
  const auto cum = cumulative_length(r);
  const Scalar h = cum.back() / static_cast<Scalar>(segment_count(r));
  BasicCurvatureProfile<Scalar> prof;
  prof.window = window;
  prof.points = r.points;
  prof.arc.resize(static_cast<std::size_t>(n));
  prof.kappa.assign(static_cast<std::size_t>(n), 0);
  constexpr Eigen::Index half = 2;  // samples on each side: window / 2
  for (Eigen::Index i = 0; i < n; ++i) {
    prof.arc[static_cast<std::size_t>(i)] = h * static_cast<Scalar>(i);
    Eigen::Index m = half;
    if (!r.closed) m = std::min({half, i, n - 1 - i});
    if (m == 0) continue;
    const auto at = [&](Eigen::Index j) -> Point2<Scalar> { return r.points.col(((j % n) + n) % n); };
    const Point2<Scalar> before = at(i) - at(i - m);
    const Point2<Scalar> after = at(i + m) - at(i);
    prof.kappa[static_cast<std::size_t>(i)] = turning_angle(before, after) / (h * static_cast<Scalar>(m));
  }
  if (!r.closed && n >= 2) {
    prof.kappa.front() = prof.kappa[1];
    prof.kappa.back() = prof.kappa[static_cast<std::size_t>(n - 2)];
  }
  return prof;
}

// --- direction statistics ----------------------------------------------------

/// Length-weighted histogram of segment directions over [0, 2*pi).
template <typename Scalar>
std::vector<Scalar> direction_histogram(const BasicContour<Scalar>& c, int bins) {
  if (bins < 2) throw Error(ErrorCode::InvalidArgument, "histogram needs >= 2 bins");
  const auto m = segment_count(c);
  std::vector<Scalar> hist(static_cast<std::size_t>(bins), 0);
  Scalar total = 0;
  constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Point2<Scalar> d = segment_vector(c, i);
    const Scalar len = d.norm();
    if (len == 0) continue;
    Scalar ang = std::atan2(d.y(), d.x());
    if (ang < 0) ang += two_pi;
    // Bin k is centred on direction k * 2pi / bins, so axis-aligned strokes
    // sit mid-bin.
    auto b = static_cast<int>(std::floor(ang / two_pi * bins + Scalar(0.5)));
    b = b % bins;
    hist[static_cast<std::size_t>(b)] += len;
    total += len;
  }
  if (!(total > 0)) throw Error(ErrorCode::DegenerateContour, "contour has zero length");
  return hist;
}

/// Shannon entropy in bits of a nonnegative weight vector.
template <typename Scalar>
Scalar shannon_entropy_bits(const std::vector<Scalar>& weights) {
  Scalar total = 0;
  for (auto w : weights) total += w;
  if (!(total > 0)) return 0;
  Scalar h = 0;
  for (auto w : weights) {
    if (w <= 0) continue;
    const Scalar p = w / total;
    h -= p * std::log2(p);
  }
  return std::max(h, Scalar(0));
}

/// Distance from a point to the nearest segment of the polyline.
template <typename Scalar>
Scalar distance_to(const BasicContour<Scalar>& c, const Point2<Scalar>& q) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  const auto m = segment_count(c);
  if (m == 0) return (c.points.col(0) - q).norm();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Point2<Scalar> a = c.points.col(i);
    const Point2<Scalar> d = segment_vector(c, i);
    const Scalar dd = d.squaredNorm();
    const Scalar u = dd > 0 ? std::clamp((q - a).dot(d) / dd, Scalar(0), Scalar(1)) : Scalar(0);
    best = std::min(best, (a + u * d - q).norm());
  }
  return best;
}

/// Mean distance from the vertices of `a` to the polyline `b`.
template <typename Scalar>
Scalar mean_distance(const BasicContour<Scalar>& a, const BasicContour<Scalar>& b) {
  Scalar s = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += distance_to(b, Point2<Scalar>(a.points.col(i)));
  return a.size() > 0 ? s / static_cast<Scalar>(a.size()) : Scalar(0);
}

}  // namespace cursive
