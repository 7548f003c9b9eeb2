#include "cursive/quality.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cursive {

double ThicknessProfile::mean() const {
  if (thickness.empty()) return 0;
  double s = 0;
  for (double t : thickness) s += t;
  return s / static_cast<double>(thickness.size());
}

namespace {

std::vector<int> run_lengths(const BinaryRaster& img) {
  std::vector<int> runs;
  for (int y = 0; y < img.height(); ++y) {
    int len = 0;
    for (int x = 0; x <= img.width(); ++x) {
      if (x < img.width() && img.at(x, y)) {
        ++len;
      } else if (len > 0) {
        runs.push_back(len);
        len = 0;
      }
    }
  }
  for (int x = 0; x < img.width(); ++x) {
    int len = 0;
    for (int y = 0; y <= img.height(); ++y) {
      if (y < img.height() && img.at(x, y)) {
        ++len;
      } else if (len > 0) {
        runs.push_back(len);
        len = 0;
      }
    }
  }
  return runs;
}

// Mode of the histogram; adjacent tied bins are averaged, distant ties are
// ambiguous.
double histogram_mode(const std::map<int, std::size_t>& hist) {
  std::size_t best = 0;
  for (const auto& [len, count] : hist) best = std::max(best, count);
  std::vector<int> tied;
  for (const auto& [len, count] : hist)
    if (count == best) tied.push_back(len);
  for (std::size_t i = 1; i < tied.size(); ++i)
    if (tied[i] - tied[i - 1] > 1)
      throw Error(ErrorCode::AmbiguousPenWidth, "run-length mode ties at " +
                                                    std::to_string(tied[i - 1]) + " and " +
                                                    std::to_string(tied[i]) + " px");
  double s = 0;
  for (int t : tied) s += t;
  return s / static_cast<double>(tied.size());
}

Point2<double> tangent_at(const Contour& path, Eigen::Index i) {
  const auto n = path.size();
  const auto a = std::max<Eigen::Index>(i - 1, 0);
  const auto b = std::min<Eigen::Index>(i + 1, n - 1);
  Point2<double> t = path.points.col(b) - path.points.col(a);
  const double len = t.norm();
  return len > 0 ? Point2<double>(t / len) : Point2<double>(-1, 0);
}

bool ink_at(const BinaryRaster& img, const Point2<double>& p) {
  return img.at(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())));
}

double column_run(const BinaryRaster& img, const Point2<double>& p) {
  const int x = static_cast<int>(std::floor(p.x()));
  const int y = static_cast<int>(std::floor(p.y()));
  if (!img.at(x, y)) return 0;
  int y0 = y;
  int y1 = y;
  while (img.at(x, y0 - 1)) --y0;
  while (img.at(x, y1 + 1)) ++y1;
  return static_cast<double>(y1 - y0 + 1);
}

// Distance from p along +dir to the first background point, located to
// within `step` px.
double march(const BinaryRaster& img, const Point2<double>& p, const Point2<double>& dir,
             double limit) {
  constexpr double step = 0.05;
  double t = 0;
  while (t < limit) {
    const double next = t + step;
    if (!ink_at(img, p + next * dir)) return t + step / 2;
    t = next;
  }
  return limit;
}

}  // namespace

double estimate_dot_unit(const BinaryRaster& img) {
  if (img.empty() || img.foreground_count() == 0)
    throw Error(ErrorCode::NoForeground, "cannot estimate pen width without ink");
  const auto runs = run_lengths(img);
  std::map<int, std::size_t> hist;
  for (int r : runs) ++hist[r];
  const double provisional = histogram_mode(hist);
  std::map<int, std::size_t> kept;
  for (int r : runs)
    if (r <= 4.0 * provisional) ++kept[r];
  return histogram_mode(kept);
}

ThicknessProfile thickness_profile(const BinaryRaster& img, const Contour& band_path,
                                   ThicknessMethod method) {
  const double dot = img.require_dot();
  ThicknessProfile prof;
  prof.method = method;
  const auto n = band_path.size();
  if (n == 0) return prof;
  const auto cum = cumulative_length(band_path);
  std::size_t misses = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point2<double> p = band_path.points.col(i);
    double t = 0;
    if (method == ThicknessMethod::vertical_projection) {
      t = column_run(img, p);
    } else if (ink_at(img, p)) {
      const Point2<double> tan = tangent_at(band_path, i);
      const Point2<double> nrm(-tan.y(), tan.x());
      const double limit = 4 * dot;
      t = march(img, p, nrm, limit) + march(img, p, -nrm, limit);
    }
    if (t == 0) ++misses;
    prof.arc.push_back(cum[static_cast<std::size_t>(i)] / dot);
    prof.thickness.push_back(t / dot);
  }
  if (2 * misses > static_cast<std::size_t>(n))
    throw Error(ErrorCode::PathOutsideInk,
                std::to_string(misses) + " of " + std::to_string(n) + " path samples miss the ink");
  return prof;
}

std::vector<Fracture> detect_fractures(const ThicknessProfile& profile, const BinaryRaster& img,
                                       const Contour& band_path, const QualityConfig& cfg) {
  const double dot = img.require_dot();
  struct Run {
    double a, b;  // dots
  };
  std::vector<Run> runs;

  // Thin stretches of the profile.
  const auto m = profile.thickness.size();
  for (std::size_t i = 0; i < m;) {
    if (profile.thickness[i] >= cfg.fracture_thickness) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < m && profile.thickness[j + 1] < cfg.fracture_thickness) ++j;
    // Extend halfway to the neighbouring thick samples.
    const double a = i > 0 ? 0.5 * (profile.arc[i - 1] + profile.arc[i]) : profile.arc[i];
    const double b = j + 1 < m ? 0.5 * (profile.arc[j] + profile.arc[j + 1]) : profile.arc[j];
    if (b - a >= cfg.fracture_run) runs.push_back({a, b});
    i = j + 1;
  }

  // Background crossings of the path itself, walked at quarter-pixel steps.
  if (band_path.size() >= 2) {
    const auto cum = cumulative_length(band_path);
    const double total = cum.back();
    constexpr double step = 0.25;
    double start = -1;
    for (double s = 0;; s += step) {
      const double t = std::min(s, total);
      const bool bg = !ink_at(img, point_at(band_path, cum, t));
      if (bg && start < 0) start = t;
      if ((!bg || t >= total) && start >= 0) {
        const double end = bg ? t : t - step / 2;
        const double begin = std::max(0.0, start - step / 2);
        if (end - begin >= cfg.background_run_px) runs.push_back({begin / dot, end / dot});
        start = -1;
      }
      if (t >= total) break;
    }
  }

  std::sort(runs.begin(), runs.end(), [](const Run& x, const Run& y) { return x.a < y.a; });
  std::vector<Fracture> out;
  double cur_a = 0, cur_b = -1;
  for (const auto& r : runs) {
    if (cur_b >= 0 && r.a <= cur_b) {
      cur_b = std::max(cur_b, r.b);
      continue;
    }
    if (cur_b >= 0) out.push_back({0.5 * (cur_a + cur_b), cur_b - cur_a});
    cur_a = r.a;
    cur_b = r.b;
  }
  if (cur_b >= 0) out.push_back({0.5 * (cur_a + cur_b), cur_b - cur_a});
  return out;
}

Regularity regularity_entropy(const Contour& segment, int bins, double threshold) {
  const auto hist = direction_histogram(segment, bins);
  Regularity r;
  r.entropy = std::clamp(shannon_entropy_bits(hist), 0.0, std::log2(static_cast<double>(bins)));
  r.regular = r.entropy < threshold;
  return r;
}

PortionCheck portion_distance_check(const CursiveBand& band, double expected_dots,
                                    double tolerance) {
  if (!(expected_dots > 0)) throw Error(ErrorCode::InvalidArgument, "expected distance must be > 0");
  PortionCheck c;
  c.expected = expected_dots;
  if (band.path.size() >= 2) {
    const Point2<double> a = band.path.points.col(0);
    const Point2<double> b = band.path.points.col(band.path.size() - 1);
    c.measured = (a - b).norm() / band.dot_px;
  }
  c.violation = std::abs(c.measured - c.expected) > tolerance;
  return c;
}

Contour band_boundary_for_regularity(const CursiveBand& band, double smoothing_dots) {
  Contour c = scaled(band.upper, 1.0 / band.dot_px);
  c.closed = false;
  // One sample per pixel column, so sigma in samples = dots * dot_px.
  return smooth_gaussian(c, smoothing_dots * band.dot_px);
}

QualityReport assess_band(const CursiveBand& band, const BinaryRaster& img,
                          std::optional<double> expected_dots, const QualityConfig& cfg) {
  QualityReport rep;
  rep.fractures = detect_fractures(band.thickness, img, band.path, cfg);
  if (band.upper.size() >= 2) {
    try {
      const auto r = regularity_entropy(band_boundary_for_regularity(band, cfg.boundary_smoothing),
                                        cfg.bins, cfg.entropy_threshold);
      rep.regularity_entropy = r.entropy;
      rep.regular = r.regular;
    } catch (const Error&) {
      // A zero-length boundary has no direction statistics; report it as regular.
    }
  }
  if (expected_dots) {
    const auto check = portion_distance_check(band, *expected_dots, cfg.portion_tolerance);
    if (check.violation) rep.portion_distance_violations.push_back(check);
  }
  return rep;
}

}  // namespace cursive
