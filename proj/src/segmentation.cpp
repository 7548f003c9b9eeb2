#include "cursive/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cursive/tracing.hpp"

namespace cursive {

namespace {

struct Run {
  int y0, y1;  // inclusive
  int length() const { return y1 - y0 + 1; }
  double centre() const { return 0.5 * (y0 + y1 + 1); }
};

std::vector<Run> column_runs(const BinaryRaster& img, int x) {
  std::vector<Run> runs;
  int start = -1;
  for (int y = 0; y <= img.height(); ++y) {
    const bool ink = y < img.height() && img.at(x, y);
    if (ink && start < 0) start = y;
    if (!ink && start >= 0) {
      runs.push_back({start, y - 1});
      start = -1;
    }
  }
  return runs;
}

enum class Col { empty, band, odd, radical };

Col classify_column(const std::vector<Run>& runs, double dot, double base,
                    const SegmentationConfig& cfg) {
  if (runs.empty()) return Col::empty;
  if (runs.size() > 1) {
    // A stroke broken by a slanted gap, not a second stroke.
    const double span = (runs.back().y1 + 1 - runs.front().y0) / dot;
    const double c = 0.5 * (runs.front().y0 + runs.back().y1 + 1);
    const bool in_window = c >= base - cfg.band_above * dot && c <= base + cfg.band_below * dot;
    return in_window && span <= cfg.band_max_thickness ? Col::odd : Col::radical;
  }
  const Run& r = runs.front();
  const double len = r.length() / dot;
  const double c = r.centre();
  const bool in_window = c >= base - cfg.band_above * dot && c <= base + cfg.band_below * dot;
  if (!in_window || len >= 2.0) return Col::radical;
  if (len >= cfg.band_min_thickness && len <= cfg.band_max_thickness) return Col::band;
  return Col::odd;
}

double path_arc_dots(const CursiveBand& band) { return arc_length(band.path) / band.dot_px; }

Point2<double> unit_tangent(const Contour& path, const std::vector<double>& cum, double t, double h) {
  Point2<double> d = point_at(path, cum, t + h) - point_at(path, cum, t - h);
  if (d.norm() < 1e-12) return Point2<double>(-1, 0);
  return d.normalized();
}

double thickness_near(const CursiveBand& band, double arc_dots) {
  const auto& a = band.thickness.arc;
  if (a.empty()) return 1.0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < a.size(); ++i)
    if (std::abs(a[i] - arc_dots) < std::abs(a[best] - arc_dots)) best = i;
  return band.thickness.thickness[best];
}

double segment_variance(const ThicknessProfile& prof, double a, double b) {
  double s = 0, s2 = 0;
  int n = 0;
  for (std::size_t i = 0; i < prof.arc.size(); ++i) {
    if (prof.arc[i] < a || prof.arc[i] > b) continue;
    s += prof.thickness[i];
    s2 += prof.thickness[i] * prof.thickness[i];
    ++n;
  }
  if (n < 2) return 0;
  const double m = s / n;
  return std::max(0.0, s2 / n - m * m);
}

// Band built from per-column centres over [xb, xe]; the path runs from the
// right attachment (x = xe + 1) to the left one (x = xb).
CursiveBand build_band(const BinaryRaster& img, int xb, int xe, double dot, double base,
                       const std::vector<std::vector<Run>>& runs_by_col, const std::vector<Col>& cls,
                       int x_origin, const SegmentationConfig& cfg) {
  const int n = xe - xb + 1;
  std::vector<double> top(n, std::numeric_limits<double>::quiet_NaN()), bot(top);
  for (int k = 0; k < n; ++k) {
    const int x = xe - k;
    // Only clean band columns carry the centreline; junction blobs and
    // noise columns are interpolated over.
    const auto ci = static_cast<std::size_t>(x - x_origin);
    if (cls[ci] != Col::band) continue;
    const auto& runs = runs_by_col[ci];
    // Run closest to the baseline when a column holds several.
    const Run* best = &runs.front();
    for (const auto& r : runs)
      if (std::abs(r.centre() - base) < std::abs(best->centre() - base)) best = &r;
    top[k] = best->y0;
    bot[k] = best->y1 + 1;
  }
  // Fill empty columns by linear interpolation (flat at the ends).
  const auto fill = [&](std::vector<double>& v) {
    int last = -1;
    for (int k = 0; k < n; ++k) {
      if (std::isnan(v[k])) continue;
      if (last < 0) {
        for (int j = 0; j < k; ++j) v[j] = v[k];
      } else {
        for (int j = last + 1; j < k; ++j) v[j] = v[last] + (v[k] - v[last]) * (j - last) / double(k - last);
      }
      last = k;
    }
    if (last < 0) {
      std::fill(v.begin(), v.end(), base);
      return;
    }
    for (int j = last + 1; j < n; ++j) v[j] = v[last];
  };
  fill(top);
  fill(bot);

  CursiveBand band;
  band.dot_px = dot;
  band.baseline_y = base;
  band.column_begin = xb;
  band.column_end = xe;
  Contour raw{Polyline<double>(2, n + 2), false};
  band.upper.points.resize(2, n);
  band.lower.points.resize(2, n);
  for (int k = 0; k < n; ++k) {
    const double x = xe - k + 0.5;
    raw.points.col(k + 1) << x, 0.5 * (top[k] + bot[k]);
    band.upper.points.col(k) << x, top[k];
    band.lower.points.col(k) << x, bot[k];
  }
  raw.points.col(0) << xe + 1.0, raw.points(1, 1);
  raw.points.col(n + 1) << static_cast<double>(xb), raw.points(1, n);
  band.path = smooth_gaussian(raw, cfg.smoothing * dot);
  // Keep the path strictly monotone in the writing direction.
  for (Eigen::Index i = 1; i < band.path.size(); ++i)
    band.path.points(0, i) = std::min(band.path.points(0, i), band.path.points(0, i - 1) - 1e-6);
  const Point2<double> a = band.path.points.col(0);
  const Point2<double> b = band.path.points.col(band.path.size() - 1);
  band.length_dots = (a - b).norm() / dot;
  BinaryRaster with_dot = img;
  with_dot.set_dot_px(dot);
  band.thickness = thickness_profile(with_dot, band.path, ThicknessMethod::vertical_projection);
  return band;
}

std::vector<double> curvature_peaks(const CurvatureProfile& prof, double threshold,
                                    const SegmentationConfig& cfg) {
  const std::size_t n = prof.kappa.size();
  if (n < 3) return {};
  const double total = prof.arc.back();
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(prof.kappa[i]);
  struct Cand {
    double arc, value;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(a[i] >= a[i - 1] && a[i] > a[i + 1]) || a[i] <= threshold) continue;
    if (prof.arc[i] < cfg.end_margin || prof.arc[i] > total - cfg.end_margin) continue;
    double lmin = a[i], rmin = a[i];
    for (std::size_t j = i; j-- > 0;) {
      if (a[j] > a[i]) break;
      lmin = std::min(lmin, a[j]);
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (a[j] > a[i]) break;
      rmin = std::min(rmin, a[j]);
    }
    if (a[i] - std::max(lmin, rmin) < cfg.peak_prominence) continue;
    cands.push_back({prof.arc[i], a[i]});
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) { return x.value > y.value; });
  std::vector<double> kept;
  for (const auto& c : cands)
    if (std::all_of(kept.begin(), kept.end(), [&](double k) { return std::abs(k - c.arc) >= cfg.min_separation; }))
      kept.push_back(c.arc);
  std::sort(kept.begin(), kept.end());
  return kept;
}

// Zero-length joint: a one-dot horizontal band centred on the abutment of
// the two radicals inside columns [x_lo, x_hi].
CursiveBand nominal_band(const BinaryRaster& img, int x_lo, int x_hi, double dot, double base) {
  std::vector<double> top;
  for (int x = x_lo; x <= x_hi; ++x) {
    double t = std::numeric_limits<double>::quiet_NaN();
    for (int y = 0; y < img.height(); ++y)
      if (img.at(x, y)) {
        t = y;
        break;
      }
    top.push_back(t);
  }
  const int margin = std::max(1, static_cast<int>(std::lround(0.25 * dot)));
  double abut = 0.5 * (x_lo + x_hi + 1);
  double best = -1;
  for (int x = x_lo + margin; x + 1 <= x_hi - margin; ++x) {
    const double t0 = top[static_cast<std::size_t>(x - x_lo)];
    const double t1 = top[static_cast<std::size_t>(x + 1 - x_lo)];
    if (std::isnan(t0) || std::isnan(t1)) continue;
    const double jump = std::abs(t0 - t1);
    if (jump > best) {
      best = jump;
      abut = x + 1;
    }
  }
  CursiveBand band;
  band.dot_px = dot;
  band.baseline_y = base;
  band.nominal = true;
  band.length_dots = 1.0;
  const double x_right = abut + 0.5 * dot;
  const int n = std::max(2, static_cast<int>(std::ceil(dot))) + 1;
  band.path.points.resize(2, n);
  for (int i = 0; i < n; ++i) band.path.points.col(i) << x_right - dot * i / (n - 1), base;
  band.column_begin = static_cast<int>(std::floor(abut - 0.5 * dot));
  band.column_end = static_cast<int>(std::ceil(abut + 0.5 * dot)) - 1;
  band.upper = band.path;
  band.lower = band.path;
  band.thickness.method = ThicknessMethod::vertical_projection;
  const auto cum = cumulative_length(band.path);
  for (int i = 0; i < n; ++i) {
    band.thickness.arc.push_back(cum[static_cast<std::size_t>(i)] / dot);
    band.thickness.thickness.push_back(1.0);
  }
  band.annotations.push_back(Annotation::zero_length_area);
  return band;
}

std::vector<int> label_components(const BinaryRaster& img, const std::vector<std::uint8_t>& removed,
                                  int& count) {
  const int w = img.width();
  const int h = img.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  count = 0;
  std::vector<int> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y) * w + x;
      if (!img.at(x, y) || removed[i] || label[i] >= 0) continue;
      label[i] = count;
      stack.push_back(static_cast<int>(i));
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        const int cx = cur % w;
        const int cy = cur / w;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if ((dx == 0 && dy == 0) || !img.at(nx, ny)) continue;
            const auto j = static_cast<std::size_t>(ny) * w + nx;
            if (removed[j] || label[j] >= 0) continue;
            label[j] = count;
            stack.push_back(static_cast<int>(j));
          }
      }
      ++count;
    }
  return label;
}

}  // namespace

namespace {

double longest_run_row(const BinaryRaster& img) {
  if (img.empty() || img.foreground_count() == 0)
    throw Error(ErrorCode::NoForeground, "cannot estimate a baseline without ink");
  // Longest horizontal run; ties resolved by the larger row projection.
  std::vector<int> longest(static_cast<std::size_t>(img.height()), 0);
  std::vector<int> count(static_cast<std::size_t>(img.height()), 0);
  for (int y = 0; y < img.height(); ++y) {
    int len = 0;
    for (int x = 0; x < img.width(); ++x) {
      if (img.at(x, y)) {
        ++len;
        ++count[static_cast<std::size_t>(y)];
        longest[static_cast<std::size_t>(y)] = std::max(longest[static_cast<std::size_t>(y)], len);
      } else {
        len = 0;
      }
    }
  }
  int best = 0;
  for (int y = 1; y < img.height(); ++y) {
    const auto b = static_cast<std::size_t>(best);
    const auto c = static_cast<std::size_t>(y);
    if (longest[c] > longest[b] || (longest[c] == longest[b] && count[c] > count[b])) best = y;
  }
  // Centre of the plateau of rows whose longest run is close to the best:
  // the pen's full width along the writing line.
  const int peak = longest[static_cast<std::size_t>(best)];
  int lo = best, hi = best;
  while (lo > 0 && longest[static_cast<std::size_t>(lo - 1)] >= 0.8 * peak) --lo;
  while (hi + 1 < img.height() && longest[static_cast<std::size_t>(hi + 1)] >= 0.8 * peak) ++hi;
  return 0.5 * (lo + hi + 1);
}

}  // namespace

double estimate_baseline(const BinaryRaster& img) {
  if (img.empty() || img.foreground_count() == 0)
    throw Error(ErrorCode::NoForeground, "cannot estimate a baseline without ink");
  const double rough = longest_run_row(img);
  // Every joint leaves the preceding letter on the writing line, so the
  // right ends of the bands found around the rough row pin it down.
  BinaryRaster work = img;
  try {
    if (!work.dot_px()) work.set_dot_px(estimate_dot_unit(work));
  } catch (const Error&) {
    return rough;
  }
  std::vector<double> ends;
  for (const auto& b : find_band_candidates(work, rough)) ends.push_back(b.path.points(1, 0));
  if (ends.empty()) return rough;
  std::sort(ends.begin(), ends.end());
  const std::size_t m = ends.size() / 2;
  const double med = ends.size() % 2 ? ends[m] : 0.5 * (ends[m - 1] + ends[m]);
  return med;
}

std::vector<CursiveBand> find_band_candidates(const BinaryRaster& subword, double baseline_y,
                                              const SegmentationConfig& cfg) {
  const double dot = subword.dot_px() ? *subword.dot_px() : estimate_dot_unit(subword);
  const auto bb = ink_bbox(subword);
  if (!bb) throw Error(ErrorCode::NoForeground, "subword has no ink");
  const int x0 = bb->at(0);
  const int x1 = bb->at(2);
  std::vector<std::vector<Run>> runs;
  std::vector<Col> cls;
  for (int x = x0; x <= x1; ++x) {
    auto col = column_runs(subword, x);
    // Slivers torn off the outline by a shaky pen are not strokes.
    if (col.size() > 1) {
      const auto longest = std::max_element(col.begin(), col.end(),
                                            [](const Run& a, const Run& b) { return a.length() < b.length(); })->length();
      std::erase_if(col, [&](const Run& r) { return r.length() < 0.3 * dot && r.length() < longest; });
    }
    runs.push_back(std::move(col));
    cls.push_back(classify_column(runs.back(), dot, baseline_y, cfg));
  }
  const auto at = [&](int x) { return cls[static_cast<std::size_t>(x - x0)]; };
  const int max_gap = static_cast<int>(std::floor(cfg.gap_merge * dot));

  // Groups of band columns bridged across short empty/odd gaps, scanned right to left.
  std::vector<std::pair<int, int>> groups;  // (xb, xe)
  int x = x1;
  while (x >= x0) {
    if (at(x) != Col::band) {
      --x;
      continue;
    }
    const int xe = x;
    int xb = x;
    int y = x - 1;
    while (y >= x0) {
      if (at(y) == Col::band) {
        xb = y;
        --y;
        continue;
      }
      if (at(y) == Col::radical) break;
      int g = y;
      while (g >= x0 && (at(g) == Col::empty || at(g) == Col::odd)) --g;
      if (g < x0 || at(g) != Col::band || (y - g) > max_gap) break;
      y = g;
    }
    groups.emplace_back(xb, xe);
    x = xb - 1;
  }

  std::vector<CursiveBand> out;
  for (auto [xb, xe] : groups) {
    // Extend across short empty/odd stretches to the bounding radicals.
    int r = xe + 1;
    while (r <= x1 && (at(r) == Col::empty || at(r) == Col::odd) && r - xe <= max_gap) ++r;
    int l = xb - 1;
    while (l >= x0 && (at(l) == Col::empty || at(l) == Col::odd) && xb - l <= max_gap) --l;
    if (r > x1 || l < x0 || at(r) != Col::radical || at(l) != Col::radical) continue;
    const int eb = l + 1;
    const int ee = r - 1;
    if ((xe - xb + 1) < cfg.min_band * dot) continue;
    out.push_back(build_band(subword, eb, ee, dot, baseline_y, runs, cls, x0, cfg));
  }
  return out;
}

std::vector<CursiveBand> locate_cursive_bands(const BinaryRaster& subword, int n_letters,
                                              std::optional<double> baseline_y,
                                              const SegmentationConfig& cfg) {
  if (n_letters < 2) throw Error(ErrorCode::InvalidArgument, "a subword with bands needs >= 2 letters");
  const double base = baseline_y ? *baseline_y : estimate_baseline(subword);
  auto cands = find_band_candidates(subword, base, cfg);
  const auto want = static_cast<std::size_t>(n_letters - 1);
  if (cands.size() < want)
    throw Error(ErrorCode::BandCountMismatch, "found " + std::to_string(cands.size()) +
                                                  " cursive bands, expected " + std::to_string(want));
  if (cands.size() > want) {
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return path_arc_dots(cands[a]) > path_arc_dots(cands[b]);
    });
    order.resize(want);
    std::sort(order.begin(), order.end());
    std::vector<CursiveBand> kept;
    for (auto i : order) kept.push_back(std::move(cands[i]));
    cands = std::move(kept);
  }
  return cands;
}

CursiveBand mask_anomalies(const CursiveBand& band, const QualityReport& report,
                           const std::optional<ElongationRule>& rule, double tolerance) {
  CursiveBand out = band;
  out.anomalies = report.fractures;
  auto& arc = out.thickness.arc;
  auto& th = out.thickness.thickness;
  bool bridged = false;
  for (const auto& f : report.fractures) {
    const double a = f.arc - 0.5 * f.gap - 0.1;
    const double b = f.arc + 0.5 * f.gap + 0.1;
    std::size_t i0 = arc.size(), i1 = 0;
    for (std::size_t i = 0; i < arc.size(); ++i)
      if (arc[i] >= a && arc[i] <= b) {
        i0 = std::min(i0, i);
        i1 = std::max(i1, i);
      }
    if (i0 >= arc.size()) continue;
    // Straight interpolation between the samples bracketing the gap.
    const bool has_l = i0 > 0;
    const bool has_r = i1 + 1 < arc.size();
    const double tl = has_l ? th[i0 - 1] : (has_r ? th[i1 + 1] : 1.0);
    const double tr = has_r ? th[i1 + 1] : tl;
    const double al = has_l ? arc[i0 - 1] : arc[i0];
    const double ar = has_r ? arc[i1 + 1] : arc[i1];
    for (std::size_t i = i0; i <= i1; ++i) {
      const double u = ar > al ? (arc[i] - al) / (ar - al) : 0.0;
      th[i] = tl + (tr - tl) * u;
    }
    bridged = true;
  }
  if (bridged && !out.has(Annotation::fracture_bridged)) out.annotations.push_back(Annotation::fracture_bridged);
  if (rule && !out.nominal) {
    const double limit = rule->kind == ElongationKind::forbidden ? 0.0 : rule->max_dots;
    if (out.length_dots > limit + tolerance && !out.has(Annotation::false_elongation))
      out.annotations.push_back(Annotation::false_elongation);
  }
  if (!report.portion_distance_violations.empty() && !out.has(Annotation::false_approach))
    out.annotations.push_back(Annotation::false_approach);
  for (Eigen::Index i = 1; i < out.path.size(); ++i)
    out.path.points(0, i) = std::min(out.path.points(0, i), out.path.points(0, i - 1) - 1e-6);
  out.cleaned = true;
  return out;
}

Decomposition decompose_band(const CursiveBand& band, double kappa_threshold,
                             const SegmentationConfig& cfg) {
  if (!(kappa_threshold > 0)) throw Error(ErrorCode::InvalidArgument, "curvature threshold must be > 0");
  Decomposition d;
  const double total = path_arc_dots(band);
  if (!band.nominal && total > cfg.classifier.window && band.path.size() >= 2) {
    Contour q = scaled(band.path, 1.0 / band.dot_px);
    q.closed = false;
    const auto fine = curvature_profile(q, cfg.classifier.window);
    // Peaks are found on a coarser centreline, where tremor has died out,
    // then placed at the nearest |kappa| maximum of the finer one.
    const double extra = std::sqrt(std::max(0.0, cfg.detection_smoothing * cfg.detection_smoothing -
                                                     cfg.smoothing * cfg.smoothing));
    if (extra > 0) {
      const double spacing = arc_length(q) / static_cast<double>(q.size() - 1);
      const Contour coarse_path = smooth_gaussian(q, extra / spacing);
      const auto coarse = curvature_profile(coarse_path, cfg.classifier.window);
      const double stretch = fine.arc.back() / coarse.arc.back();
      for (double c : curvature_peaks(coarse, kappa_threshold, cfg)) {
        const double at = c * stretch;
        std::size_t best = fine.arc.size();
        for (std::size_t i = 0; i < fine.arc.size(); ++i) {
          if (std::abs(fine.arc[i] - at) > cfg.min_separation) continue;
          if (best == fine.arc.size() || std::abs(fine.kappa[i]) > std::abs(fine.kappa[best])) best = i;
        }
        const double pos = best < fine.arc.size() ? fine.arc[best] : at;
        if (std::all_of(d.splits.begin(), d.splits.end(),
                        [&](double k) { return std::abs(k - pos) >= cfg.min_separation; }))
          d.splits.push_back(pos);
      }
      std::sort(d.splits.begin(), d.splits.end());
    } else {
      d.splits = curvature_peaks(fine, kappa_threshold, cfg);
    }
  }
  double prev = 0;
  for (double s : d.splits) {
    d.segments.emplace_back(prev, s);
    prev = s;
  }
  d.segments.emplace_back(prev, total);
  return d;
}

CutPoints select_cut_points(const CursiveBand& band, const Decomposition& segments,
                            const SegmentationConfig& cfg) {
  if (segments.segments.empty()) throw Error(ErrorCode::InvalidArgument, "no band sub-segments");
  const double total = path_arc_dots(band);
  if (total < 1.0)
    throw Error(ErrorCode::BandTooShort, "band of " + std::to_string(total) + " dots leaves no overlap");
  std::vector<double> bounds{0};
  for (const auto& s : segments.splits)
    if (s > 0 && s < total) bounds.push_back(s);
  bounds.push_back(total);

  CutPoints c;
  std::optional<double> in, out;
  double best_in = 0, best_out = 0;
  for (std::size_t k = 1; k + 1 < bounds.size(); ++k) {
    const double p = bounds[k];
    if (p < total / 2) {
      const double v = segment_variance(band.thickness, p, bounds[k + 1]);
      if (!in || v < best_in - 1e-12) {
        in = p;
        best_in = v;
      }
    } else {
      const double v = segment_variance(band.thickness, bounds[k - 1], p);
      if (!out || v <= best_out + 1e-12) {
        out = p;
        best_out = v;
      }
    }
  }
  c.input_fallback = !in;
  c.output_fallback = !out;
  c.input_second = in.value_or(0.25 * total);
  c.output_first = out.value_or(0.75 * total);
  if (c.output_first - c.input_second < cfg.min_separation) {
    const double m = 0.5 * (c.input_second + c.output_first);
    c.input_second = std::max(0.0, m - 0.5 * cfg.min_separation);
    c.output_first = std::min(total, c.input_second + cfg.min_separation);
    c.input_second = c.output_first - cfg.min_separation;
  }
  const double d = band.dot_px;
  const auto cum = cumulative_length(band.path);
  const double h = 0.25 * d;
  c.input_point = point_at(band.path, cum, c.input_second * d);
  c.output_point = point_at(band.path, cum, c.output_first * d);
  const Point2<double> ti = unit_tangent(band.path, cum, c.input_second * d, h);
  const Point2<double> to = unit_tangent(band.path, cum, c.output_first * d, h);
  c.input_normal = Point2<double>(-ti.y(), ti.x());
  c.output_normal = Point2<double>(-to.y(), to.x());
  return c;
}

GraphemePair extract_and_merge(const BinaryRaster& subword, const CursiveBand& band,
                               const CutPoints& cuts, const SegmentationConfig& cfg) {
  if (!(cuts.input_second < cuts.output_first))
    throw Error(ErrorCode::InvalidArgument, "input_second must precede output_first");
  const int w = subword.width();
  const int h = subword.height();
  const double d = band.dot_px;
  const auto cum = cumulative_length(band.path);
  std::vector<std::uint8_t> removed(static_cast<std::size_t>(w) * h, 0);

  const auto cut_line = [&](const Point2<double>& p, const Point2<double>& normal, double arc) {
    const Point2<double> t(normal.y(), -normal.x());
    const double half = band.nominal ? static_cast<double>(w + h)
                                     : std::max(1.25 * d, (0.5 * thickness_near(band, arc) + 0.75) * d);
    const int reach = static_cast<int>(std::ceil(half + 2));
    const int xlo = std::max(0, static_cast<int>(std::floor(p.x())) - reach);
    const int xhi = std::min(w - 1, static_cast<int>(std::floor(p.x())) + reach);
    const int ylo = std::max(0, static_cast<int>(std::floor(p.y())) - reach);
    const int yhi = std::min(h - 1, static_cast<int>(std::floor(p.y())) + reach);
    for (int y = ylo; y <= yhi; ++y)
      for (int x = xlo; x <= xhi; ++x) {
        if (!subword.at(x, y)) continue;
        const Point2<double> q(x + 0.5 - p.x(), y + 0.5 - p.y());
        if (std::abs(q.dot(t)) <= cfg.cut_halfwidth && std::abs(q.dot(normal)) <= half)
          removed[static_cast<std::size_t>(y) * w + x] = 1;
      }
  };
  cut_line(cuts.input_point, cuts.input_normal, cuts.input_second);
  cut_line(cuts.output_point, cuts.output_normal, cuts.output_first);

  int count = 0;
  const auto label = label_components(subword, removed, count);
  const auto label_at = [&](const Point2<double>& p) -> int {
    const int x = static_cast<int>(std::floor(p.x()));
    const int y = static_cast<int>(std::floor(p.y()));
    if (!subword.in_bounds(x, y)) return -1;
    return label[static_cast<std::size_t>(y) * w + x];
  };
  // First labelled pixel met walking the path over [a, b] px, then a small
  // neighbourhood search around the same points.
  const auto seed = [&](double a, double b) -> int {
    if (b < a) return -1;
    for (double s = a; s <= b + 1e-9; s += 0.5) {
      const int l = label_at(point_at(band.path, cum, s));
      if (l >= 0) return l;
    }
    const int rad = static_cast<int>(std::ceil(0.5 * d));
    for (double s = a; s <= b + 1e-9; s += 0.5) {
      const Point2<double> p = point_at(band.path, cum, s);
      for (int r = 1; r <= rad; ++r)
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const int l = label_at(p + Point2<double>(dx, dy));
            if (l >= 0) return l;
          }
    }
    return -1;
  };
  const double total_px = cum.back();
  const double in_px = cuts.input_second * d;
  const double out_px = cuts.output_first * d;
  const double clear = cfg.cut_halfwidth + 0.01;
  const int right = seed(0, in_px - clear);
  const int left = seed(out_px + clear, total_px);
  const int mid = seed(in_px + clear, out_px - clear);
  if (right < 0 || left < 0 || right == left || (mid >= 0 && (mid == right || mid == left)))
    throw Error(ErrorCode::NonSeparatingCut, "cut normals do not split the ink into three parts");

  // Side of every other component: arc position of its centroid on the path.
  enum Side : std::uint8_t { kRight, kCommon, kLeft };
  std::vector<double> sx(static_cast<std::size_t>(count), 0), sy(sx), sn(sx);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int l = label[static_cast<std::size_t>(y) * w + x];
      if (l < 0) continue;
      sx[static_cast<std::size_t>(l)] += x + 0.5;
      sy[static_cast<std::size_t>(l)] += y + 0.5;
      sn[static_cast<std::size_t>(l)] += 1;
    }
  std::vector<Side> side(static_cast<std::size_t>(count), kCommon);
  for (int l = 0; l < count; ++l) {
    const auto li = static_cast<std::size_t>(l);
    if (l == right) {
      side[li] = kRight;
    } else if (l == left) {
      side[li] = kLeft;
    } else if (l == mid) {
      side[li] = kCommon;
    } else {
      const Point2<double> c(sx[li] / sn[li], sy[li] / sn[li]);
      Eigen::Index best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < band.path.size(); ++i) {
        const double dd = (Point2<double>(band.path.points.col(i)) - c).squaredNorm();
        if (dd < bd) {
          bd = dd;
          best = i;
        }
      }
      const double s = cum[static_cast<std::size_t>(best)];
      side[li] = s < in_px ? kRight : (s > out_px ? kLeft : kCommon);
    }
  }

  GraphemePair pair;
  pair.left = BinaryRaster(w, h, subword.dot_px());
  pair.right = BinaryRaster(w, h, subword.dot_px());
  pair.common = BinaryRaster(w, h, subword.dot_px());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!subword.at(x, y)) continue;
      const auto i = static_cast<std::size_t>(y) * w + x;
      const Side s = removed[i] ? kCommon : side[static_cast<std::size_t>(label[i])];
      if (s != kLeft) pair.right.set(x, y);
      if (s != kRight) pair.left.set(x, y);
      if (s == kCommon) pair.common.set(x, y);
    }
  pair.cuts = cuts;
  pair.left_contour = trace_boundary(pair.left);
  pair.right_contour = trace_boundary(pair.right);
  return pair;
}

std::vector<BinaryRaster> chain_graphemes(const std::vector<GraphemePair>& pairs) {
  std::vector<BinaryRaster> out;
  if (pairs.empty()) return out;
  out.push_back(pairs.front().right);
  for (std::size_t k = 1; k < pairs.size(); ++k) out.push_back(raster_intersection(pairs[k - 1].left, pairs[k].right));
  out.push_back(pairs.back().left);
  return out;
}

SegmentationResult segment_word(const BinaryRaster& img, const WordContext& ctx,
                                const SegmentationConfig& cfg) {
  const RuleTables& rules = ctx.rules ? *ctx.rules : RuleTables::naskh();
  if (ctx.letters.empty()) throw Error(ErrorCode::InvalidArgument, "word context has no letters");
  for (const auto& l : ctx.letters)
    if (!rules.admits(l))
      throw Error(ErrorCode::InvalidArgument, std::string(letter_name(l.code)) + " cannot take position " +
                                                  std::string(position_name(l.position)));
  if (img.empty() || img.foreground_count() == 0) throw Error(ErrorCode::NoForeground, "image has no ink");

  SegmentationResult res;
  BinaryRaster work = img;
  res.dot_px = img.dot_px() ? *img.dot_px() : estimate_dot_unit(img);
  work.set_dot_px(res.dot_px);
  const double dot = res.dot_px;
  const int w = work.width();
  const int h = work.height();

  // Subword groups of letter indices from the joining behaviour.
  std::vector<std::vector<int>> groups{{}};
  for (std::size_t i = 0; i < ctx.letters.size(); ++i) {
    groups.back().push_back(static_cast<int>(i));
    if (i + 1 < ctx.letters.size() && !rules.joins_forward(ctx.letters[i])) groups.emplace_back();
  }

  auto comps = connected_components(work, 8);
  std::vector<Component> bodies, small;
  for (auto& c : comps) {
    if (c.role_hint == RoleHint::dot_mark) small.push_back(std::move(c));
    else bodies.push_back(std::move(c));
  }
  const auto absorb = [](Component& a, const Component& b) {
    a.pixels.insert(a.pixels.end(), b.pixels.begin(), b.pixels.end());
    std::sort(a.pixels.begin(), a.pixels.end(),
              [](const Pixel& p, const Pixel& q) { return p.y != q.y ? p.y < q.y : p.x < q.x; });
    a.area += b.area;
    a.bbox = {std::min(a.bbox[0], b.bbox[0]), std::min(a.bbox[1], b.bbox[1]), std::max(a.bbox[2], b.bbox[2]),
              std::max(a.bbox[3], b.bbox[3])};
  };
  // Specks far smaller than a pen press, hugging a body, are ink torn off
  // its outline rather than marks.
  for (auto& c : small) {
    std::size_t near = bodies.size();
    int near_gap = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      const auto& b = bodies[i].bbox;
      const int gx = std::max({0, c.bbox[0] - b[2] - 1, b[0] - c.bbox[2] - 1});
      const int gy = std::max({0, c.bbox[1] - b[3] - 1, b[1] - c.bbox[3] - 1});
      if (std::max(gx, gy) < near_gap) {
        near_gap = std::max(gx, gy);
        near = i;
      }
    }
    if (near < bodies.size() && static_cast<double>(c.area) < 0.25 * dot * dot && near_gap <= cfg.gap_merge * dot)
      absorb(bodies[near], c);
    else
      res.isolated.push_back(std::move(c));
  }
  // Fracture gaps split a subword into pieces; rejoin the closest neighbours.
  while (bodies.size() > groups.size()) {
    std::size_t best = 0;
    int best_gap = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i + 1 < bodies.size(); ++i) {
      const int gap = std::max(0, bodies[i].bbox[0] - bodies[i + 1].bbox[2] - 1);
      if (gap < best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best_gap > cfg.gap_merge * dot)
      throw Error(ErrorCode::BandCountMismatch, "ink splits into " + std::to_string(bodies.size()) +
                                                    " subwords, context expects " + std::to_string(groups.size()));
    absorb(bodies[best], bodies[best + 1]);
    bodies.erase(bodies.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  }
  if (bodies.size() < groups.size())
    throw Error(ErrorCode::BandCountMismatch, "found " + std::to_string(bodies.size()) +
                                                  " subwords, context expects " + std::to_string(groups.size()));

  if (ctx.baseline_y) {
    res.baseline_y = *ctx.baseline_y;
  } else {
    BinaryRaster body_img(w, h, dot);
    for (const auto& c : bodies)
      for (const auto& p : c.pixels) body_img.set(p.x, p.y);
    res.baseline_y = estimate_baseline(body_img);
  }

  res.graphemes.resize(ctx.letters.size());
  res.inputs.resize(ctx.letters.size());
  int joint_base = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& letters = groups[g];
    const BinaryRaster sub = bodies[g].to_raster(w, h, dot);
    const int n = static_cast<int>(letters.size());
    if (n == 1) {
      res.graphemes[static_cast<std::size_t>(letters[0])] = sub;
      res.isolated.push_back(bodies[g]);
      continue;
    }
    std::vector<ElongationRule> rules_k;
    std::size_t forbidden = 0;
    for (int k = 0; k + 1 < n; ++k) {
      try {
        rules_k.push_back(rules.elongation_rule(ctx.letters[static_cast<std::size_t>(letters[k])],
                                                ctx.letters[static_cast<std::size_t>(letters[k + 1])]));
      } catch (const Error& e) {
        throw e.with_joint(joint_base + k);
      }
      if (rules_k.back().kind == ElongationKind::forbidden) ++forbidden;
    }
    auto cands = find_band_candidates(sub, res.baseline_y, cfg);
    const auto want = static_cast<std::size_t>(n - 1);
    std::vector<std::optional<CursiveBand>> bands(want);
    if (cands.size() >= want) {
      auto kept = locate_cursive_bands(sub, n, res.baseline_y, cfg);
      for (std::size_t k = 0; k < want; ++k) bands[k] = std::move(kept[k]);
    } else if (forbidden > 0 && cands.size() + forbidden == want) {
      std::size_t c = 0;
      for (std::size_t k = 0; k < want; ++k)
        if (rules_k[k].kind != ElongationKind::forbidden) bands[k] = std::move(cands[c++]);
      const auto bb = *ink_bbox(sub);
      for (std::size_t k = 0; k < want; ++k) {
        if (bands[k]) continue;
        int hi = bb[2];
        for (std::size_t j = k; j-- > 0;)
          if (bands[j]) {
            hi = bands[j]->column_begin - 1;
            break;
          }
        int lo = bb[0];
        for (std::size_t j = k + 1; j < want; ++j)
          if (bands[j]) {
            lo = bands[j]->column_end + 1;
            break;
          }
        if (hi - lo < 2) throw Error(ErrorCode::BandCountMismatch, "no room for a zero-length joint").with_joint(joint_base + static_cast<int>(k));
        bands[k] = nominal_band(sub, lo, hi, dot, res.baseline_y);
      }
    } else {
      throw Error(ErrorCode::BandCountMismatch, "found " + std::to_string(cands.size()) +
                                                    " cursive bands, expected " + std::to_string(want));
    }

    std::vector<GraphemePair> pairs;
    for (std::size_t k = 0; k < want; ++k) {
      const int jidx = joint_base + static_cast<int>(k);
      try {
        JointResult jr;
        jr.index = jidx;
        jr.subword = static_cast<int>(g);
        jr.rule = rules_k[k];
        CursiveBand band = std::move(*bands[k]);
        std::optional<double> expected;
        if (static_cast<std::size_t>(jidx) < ctx.expected_dots.size()) expected = ctx.expected_dots[static_cast<std::size_t>(jidx)];
        if (band.nominal) {
          jr.quality = QualityReport{};
        } else {
          jr.quality = assess_band(band, sub, expected, cfg.quality);
        }
        band = mask_anomalies(band, jr.quality, jr.rule);
        band.shape = band.nominal ? ShapeClass::linear : classify_cursive_shape(band, cfg.classifier);
        jr.decomposition = decompose_band(band, cfg.kappa_threshold, cfg);
        const CutPoints cuts = select_cut_points(band, jr.decomposition, cfg);
        jr.pair = extract_and_merge(sub, band, cuts, cfg);
        jr.pair.joint = jidx;
        jr.pair.first = ctx.letters[static_cast<std::size_t>(letters[k])];
        jr.pair.second = ctx.letters[static_cast<std::size_t>(letters[k + 1])];
        jr.band = std::move(band);
        pairs.push_back(jr.pair);
        res.joints.push_back(std::move(jr));
      } catch (const Error& e) {
        if (e.joint() >= 0) throw;
        throw e.with_joint(jidx);
      }
    }
    auto chained = chain_graphemes(pairs);
    const auto bb = *ink_bbox(sub);
    for (int k = 0; k < n; ++k) {
      const auto li = static_cast<std::size_t>(letters[k]);
      res.graphemes[li] = std::move(chained[static_cast<std::size_t>(k)]);
      res.inputs[li] = k == 0 ? Point2<double>(bb[2] + 1.0, res.baseline_y)
                              : pairs[static_cast<std::size_t>(k - 1)].cuts.input_point;
    }
    joint_base += n - 1;
  }
  return res;
}

}  // namespace cursive
