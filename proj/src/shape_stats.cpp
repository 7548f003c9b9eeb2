#include "cursive/shape_stats.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace cursive {

const VariabilityRow* VariabilityReport::find(ShapeClass s) const {
  for (const auto& r : rows)
    if (r.shape == s) return &r;
  return nullptr;
}

double coefficient_of_variation(const std::vector<double>& v) {
  if (v.size() < 2) throw Error(ErrorCode::InvalidArgument, "variability needs at least 2 instances");
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (!(mean > 0)) throw Error(ErrorCode::InvalidArgument, "variability needs a positive mean");
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return 100.0 * std::sqrt(ss / static_cast<double>(v.size() - 1)) / mean;
}

VariabilityReport variability_report(const std::vector<VariabilitySample>& samples) {
  std::map<ShapeClass, std::pair<std::vector<double>, std::vector<double>>> by;
  for (const auto& s : samples) {
    by[s.shape].first.push_back(s.length_dots);
    by[s.shape].second.push_back(s.thickness_dots);
  }
  VariabilityReport rep;
  for (ShapeClass c : kAllShapeClasses) {
    auto it = by.find(c);
    if (it == by.end() || it->second.first.size() < 2) continue;
    VariabilityRow row;
    row.shape = c;
    row.n_instances = static_cast<int>(it->second.first.size());
    row.size_variability = coefficient_of_variation(it->second.first);
    row.thickness_variability = coefficient_of_variation(it->second.second);
    rep.rows.push_back(row);
  }
  return rep;
}

VariabilityReport variability_report(const std::vector<CursiveBand>& bands) {
  std::vector<VariabilitySample> s;
  s.reserve(bands.size());
  for (const auto& b : bands) s.push_back({b.shape, b.length_dots, b.thickness.mean()});
  return variability_report(s);
}

DiacriticFrame diacritic_frame(const BinaryRaster& grapheme, const std::optional<Point2<double>>& input,
                               double baseline_y) {
  if (!input) throw Error(ErrorCode::MissingInputPoint, "base letter has no input point");
  std::optional<std::array<int, 4>> box;
  if (grapheme.dot_px()) {
    const double d = *grapheme.dot_px();
    for (const auto& c : connected_components(grapheme, 8)) {
      if (c.role_hint == RoleHint::dot_mark && c.area < 4 * d * d) continue;
      if (!box) box = c.bbox;
      else
        box = std::array<int, 4>{std::min((*box)[0], c.bbox[0]), std::min((*box)[1], c.bbox[1]),
                                 std::max((*box)[2], c.bbox[2]), std::max((*box)[3], c.bbox[3])};
    }
  }
  if (!box) box = ink_bbox(grapheme);
  if (!box) throw Error(ErrorCode::NoForeground, "base letter has no ink");
  DiacriticFrame f;
  f.origin = Point2<double>(input->x(), baseline_y);
  f.unit = Point2<double>((*box)[2] - (*box)[0] + 1, (*box)[3] - (*box)[1] + 1);
  return f;
}

DiacriticCoords diacritic_coords(const DiacriticFrame& frame, const Component& mark) {
  if (mark.pixels.empty()) throw Error(ErrorCode::InvalidArgument, "empty mark");
  // Each pixel projects to an interval of the x axis; their hull is the segment.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : mark.pixels) {
    for (int cx = 0; cx <= 1; ++cx)
      for (int cy = 0; cy <= 1; ++cy) {
        const Point2<double> q(p.x + cx - frame.origin.x(), p.y + cy - frame.origin.y());
        const double u = q.dot(frame.x_axis);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
      }
  }
  const double mid = 0.5 * (lo + hi);
  // Height of the mark above the midpoint: mean over the pixels whose
  // projection covers it (nearest ones if none does).
  double sum = 0;
  int n = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : mark.pixels) {
    const Point2<double> c(p.x + 0.5 - frame.origin.x(), p.y + 0.5 - frame.origin.y());
    const double gap = std::max(0.0, std::abs(c.dot(frame.x_axis) - mid) - 0.5);
    if (gap > best + 1e-12) continue;
    if (gap < best - 1e-12) {
      best = gap;
      sum = 0;
      n = 0;
    }
    sum += c.dot(frame.y_axis);
    ++n;
  }
  DiacriticCoords out;
  out.x = mid / frame.unit.x();
  out.y = (sum / n) / frame.unit.y();
  out.extent = (hi - lo) / frame.unit.x();
  return out;
}

}  // namespace cursive
