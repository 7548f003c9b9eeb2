#include "cursive/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cursive/tracing.hpp"

namespace cursive {

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2 * std::numbers::pi * u2);
  return r * std::cos(2 * std::numbers::pi * u2);
}

std::string_view archetype_name(Archetype a) {
  switch (a) {
    case Archetype::tooth: return "tooth";
    case Archetype::bowl: return "bowl";
    case Archetype::stacked: return "stacked";
  }
  return "tooth";
}

Archetype parse_archetype(std::string_view s) {
  for (auto a : {Archetype::tooth, Archetype::bowl, Archetype::stacked})
    if (archetype_name(a) == s) return a;
  throw Error(ErrorCode::SpecInvalid, "unknown letter archetype '" + std::string(s) + "'");
}

ShapeRange shape_range(ShapeClass s) {
  switch (s) {
    case ShapeClass::linear: return {2.0, 6.0, 0.0, 0.0};
    case ShapeClass::concave: return {6.5, 9.0, 0.45, 0.6};
    case ShapeClass::curvilinear_no_curvature: return {6.5, 9.0, 0.45, 0.6};
    case ShapeClass::curvilinear_with_curvature: return {5.0, 7.0, 0.7, 1.0};
    case ShapeClass::laying: return {7.5, 10.0, 1.5, 1.8};
  }
  return {2.0, 6.0, 0.0, 0.0};
}

namespace {

constexpr double kSampleStep = 0.25;  // px between pen positions
constexpr double kPeakThreshold = 0.15;
constexpr double kPeakProminence = 0.075;
constexpr double kPeakEndMargin = 0.5;
constexpr double kPeakSeparation = 0.5;

struct PenSample {
  double x, y, r;  // centre and lozenge half-diagonal, px
};

void stamp(BinaryRaster& img, const PenSample& s) {
  const int x0 = static_cast<int>(std::floor(s.x - s.r - 1));
  const int x1 = static_cast<int>(std::ceil(s.x + s.r + 1));
  const int y0 = static_cast<int>(std::floor(s.y - s.r - 1));
  const int y1 = static_cast<int>(std::ceil(s.y + s.r + 1));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (std::abs(x + 0.5 - s.x) + std::abs(y + 0.5 - s.y) <= s.r + 1e-9) img.set(x, y);
}

void add_segment(std::vector<PenSample>& out, Point2<double> a, Point2<double> b, double r) {
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / kSampleStep)));
  for (int i = 0; i <= n; ++i) {
    const Point2<double> p = a + (b - a) * (static_cast<double>(i) / n);
    out.push_back({p.x(), p.y(), r});
  }
}

// Vertical offset of a joint centreline below the line joining its ends, in
// dots, with its first and second derivatives in the distance from the
// right end.
struct Profile {
  double f, f1, f2;
};

struct JointGeometry {
  ShapeClass shape;
  double length;  // dots
  double amp;     // dots
  double warp;

  Profile eval(double s) const {
    const double L = length;
    switch (shape) {
      case ShapeClass::linear: return {0, 0, 0};
      case ShapeClass::concave:
      case ShapeClass::curvilinear_no_curvature: {
        const double sign = shape == ShapeClass::concave ? 1.0 : -1.0;
        const double R = (L * L / 4 + amp * amp) / (2 * amp);
        const double c = s - L / 2;
        const double q = std::sqrt(std::max(R * R - c * c, 1e-12));
        return {sign * (q - (R - amp)), sign * (-c / q), sign * (-R * R / (q * q * q))};
      }
      case ShapeClass::curvilinear_with_curvature: {
        const double u = s / L;
        const double phi = u + warp * u * (1 - u);
        const double phi1 = (1 + warp * (1 - 2 * u)) / L;
        const double phi2 = -2 * warp / (L * L);
        const double w = 2 * std::numbers::pi;
        // Rises first, then dips: an S through the baseline.
        return {-amp * std::sin(w * phi), -amp * std::cos(w * phi) * w * phi1,
                -amp * (-std::sin(w * phi) * w * w * phi1 * phi1 + std::cos(w * phi) * w * phi2)};
      }
      case ShapeClass::laying: {
        const double v = 2 * s / L - 1;
        const double av = std::abs(v);
        const double sg = v < 0 ? -1.0 : 1.0;
        return {amp * (1 - av * av * av), -amp * 3 * av * av * sg * (2 / L),
                -amp * 6 * av * (2 / L) * (2 / L)};
      }
    }
    return {0, 0, 0};
  }
};

struct Peak {
  double arc;
  double kappa;
};

// Prominent local maxima of |kappa|, away from the ends, pairwise separated.
std::vector<double> prominent_peaks(const std::vector<double>& arc, const std::vector<double>& kappa) {
  const std::size_t n = kappa.size();
  if (n < 3) return {};
  const double total = arc.back();
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(kappa[i]);
  std::vector<Peak> cands;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(a[i] >= a[i - 1] && a[i] > a[i + 1])) continue;
    if (a[i] <= kPeakThreshold) continue;
    if (arc[i] < kPeakEndMargin || arc[i] > total - kPeakEndMargin) continue;
    double lmin = a[i];
    for (std::size_t j = i; j-- > 0;) {
      if (a[j] > a[i]) break;
      lmin = std::min(lmin, a[j]);
    }
    double rmin = a[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (a[j] > a[i]) break;
      rmin = std::min(rmin, a[j]);
    }
    if (a[i] - std::max(lmin, rmin) < kPeakProminence) continue;
    cands.push_back({arc[i], a[i]});
  }
  std::sort(cands.begin(), cands.end(), [](const Peak& p, const Peak& q) { return p.kappa > q.kappa; });
  std::vector<double> kept;
  for (const auto& c : cands) {
    if (std::all_of(kept.begin(), kept.end(),
                    [&](double k) { return std::abs(k - c.arc) >= kPeakSeparation; }))
      kept.push_back(c.arc);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

double variance_between(const std::vector<double>& arc, const std::vector<double>& v, double a,
                        double b) {
  double s = 0, s2 = 0;
  int n = 0;
  for (std::size_t i = 0; i < arc.size(); ++i) {
    if (arc[i] < a || arc[i] > b) continue;
    s += v[i];
    s2 += v[i] * v[i];
    ++n;
  }
  if (n < 2) return 0;
  const double m = s / n;
  return std::max(0.0, s2 / n - m * m);
}

// The cut rule applied to exact geometry.
std::pair<double, double> truth_cuts(const std::vector<double>& arc, const std::vector<double>& width,
                                     const std::vector<double>& peaks) {
  const double total = arc.back();
  std::vector<double> bounds{0};
  bounds.insert(bounds.end(), peaks.begin(), peaks.end());
  bounds.push_back(total);
  std::optional<double> in, out;
  double best_in = 0, best_out = 0;
  for (std::size_t k = 1; k + 1 < bounds.size(); ++k) {
    const double p = bounds[k];
    if (p < total / 2) {
      const double v = variance_between(arc, width, p, bounds[k + 1]);
      if (!in || v < best_in - 1e-12) {
        in = p;
        best_in = v;
      }
    } else {
      const double v = variance_between(arc, width, bounds[k - 1], p);
      if (!out || v <= best_out + 1e-12) {
        out = p;
        best_out = v;
      }
    }
  }
  double a = in.value_or(0.25 * total);
  double b = out.value_or(0.75 * total);
  if (b - a < 0.5) {
    const double m = 0.5 * (a + b);
    a = std::max(0.0, m - 0.25);
    b = std::min(total, m + 0.25);
  }
  return {a, b};
}

Point2<double> centerline_at(const JointTruth& j, double arc_dots) {
  const auto& a = j.arc;
  if (a.empty()) return Point2<double>(j.x_right, 0);
  if (arc_dots <= a.front()) return j.centerline.points.col(0);
  if (arc_dots >= a.back()) return j.centerline.points.col(j.centerline.size() - 1);
  const auto it = std::upper_bound(a.begin(), a.end(), arc_dots);
  const auto i = static_cast<Eigen::Index>(std::distance(a.begin(), it));
  const double u = (arc_dots - a[i - 1]) / (a[i] - a[i - 1]);
  return (1 - u) * j.centerline.points.col(i - 1) + u * j.centerline.points.col(i);
}

struct LetterLayout {
  double right = 0, left = 0, base = 0;
  std::vector<PenSample> radical;
};

void validate(const SynthSpec& spec) {
  if (spec.letters.empty()) throw Error(ErrorCode::SpecInvalid, "spec has no letters");
  if (!(spec.pen_width_px > 0)) throw Error(ErrorCode::SpecInvalid, "pen width must be > 0");
  if (spec.joints.size() + 1 != spec.letters.size())
    throw Error(ErrorCode::SpecInvalid, "joint count must be letters - 1");
  if (spec.margin_dots < 0) throw Error(ErrorCode::SpecInvalid, "margin must be >= 0");
  if (spec.letters.front().kind == Archetype::stacked)
    throw Error(ErrorCode::SpecInvalid, "the first letter cannot be stacked");
  for (const auto& j : spec.joints) {
    if (!(j.length_dots >= 0 && j.length_dots <= 13))
      throw Error(ErrorCode::SpecInvalid, "joint length must lie in [0, 13] dots");
    if (j.tremor_dots < 0) throw Error(ErrorCode::SpecInvalid, "tremor must be >= 0");
    if (j.amplitude_dots < 0) throw Error(ErrorCode::SpecInvalid, "amplitude must be >= 0");
    if (std::abs(j.warp) > 0.25) throw Error(ErrorCode::SpecInvalid, "warp must lie in [-0.25, 0.25]");
    if (!(j.taper > 0.2 && j.taper <= 3)) throw Error(ErrorCode::SpecInvalid, "taper must lie in (0.2, 3]");
    if (j.shape != ShapeClass::linear && j.length_dots > 0 && j.length_dots < 2)
      throw Error(ErrorCode::SpecInvalid, "curved joints need at least 2 dots");
    for (const auto& f : j.fractures)
      if (!(f.gap_px > 0) || f.arc_dots < 0 || f.arc_dots > j.length_dots)
        throw Error(ErrorCode::SpecInvalid, "fracture outside its joint");
  }
  for (const auto& m : spec.marks)
    if (m.letter < 0 || m.letter >= static_cast<int>(spec.letters.size()))
      throw Error(ErrorCode::SpecInvalid, "mark refers to a missing letter");
}

// Amplitude actually used: explicit, or drawn in range and kept inside the
// envelope where the class stays recognisable and the slope stays below ~1.2.
double joint_amplitude(const JointSpec& j, Rng& rng) {
  const auto range = shape_range(j.shape);
  const double L = j.length_dots;
  double a = j.amplitude_dots > 0 ? j.amplitude_dots : rng.uniform(range.amplitude_min, range.amplitude_max);
  if (j.amplitude_dots > 0) return a;
  switch (j.shape) {
    case ShapeClass::concave:
    case ShapeClass::curvilinear_no_curvature: a = std::min(a, 0.0125 * L * L); break;
    case ShapeClass::curvilinear_with_curvature: a = std::min(a, 0.16 * L); break;
    case ShapeClass::laying: a = std::min(a, L / 5); break;
    case ShapeClass::linear: a = 0; break;
  }
  return a;
}

}  // namespace

std::pair<BinaryRaster, GroundTruth> synth_subword(const SynthSpec& spec) {
  validate(spec);
  const double d = spec.pen_width_px;
  const double r = d / 2;
  Rng rng(spec.seed);
  const std::size_t nl = spec.letters.size();

  // Layout in local coordinates: baseline y = 0, first letter's right edge x = 0.
  std::vector<LetterLayout> lay(nl);
  std::vector<JointTruth> joints(nl - 1);
  std::vector<std::vector<PenSample>> joint_samples(nl - 1);
  for (std::size_t i = 0; i < nl; ++i) {
    const auto& lp = spec.letters[i];
    auto& L = lay[i];
    if (i == 0) {
      L.right = 0;
      L.base = 0;
    } else {
      const auto& js = spec.joints[i - 1];
      const bool stacked = lp.kind == Archetype::stacked;
      L.right = lay[i - 1].left - (stacked ? std::max(js.length_dots, 1.0) : js.length_dots) * d;
      L.base = stacked ? lay[i - 1].base - 3 * d : lay[i - 1].base;
    }
    if (lp.kind == Archetype::bowl) {
      const double wd = lp.width_dots > 0 ? lp.width_dots : 3.5;
      const double hd = lp.height_dots > 0 ? lp.height_dots : 2.2;
      if (wd < 2.5 || hd < 1.5) throw Error(ErrorCode::SpecInvalid, "bowl needs width >= 2.5 and height >= 1.5 dots");
      L.left = L.right - wd * d;
      const double xr = L.right - r;
      const double xl = L.left + r;
      const double side = (hd - 1.0) * d;
      const double top = L.base - side;
      add_segment(L.radical, {xr, L.base}, {xr, top}, r);
      const double xm = 0.5 * (xr + xl);
      const double rx = 0.5 * (xr - xl);
      const int n = static_cast<int>(std::ceil(std::numbers::pi * std::max(rx, d) / kSampleStep));
      for (int k = 0; k <= n; ++k) {
        const double th = std::numbers::pi * k / n;
        L.radical.push_back({xm + rx * std::cos(th), top - 1.0 * d * std::sin(th), r});
      }
      add_segment(L.radical, {xl, top}, {xl, L.base}, r);
      add_segment(L.radical, {xl, L.base}, {xr, L.base}, r);
    } else {
      const double hd = lp.height_dots > 0 ? lp.height_dots : (lp.kind == Archetype::stacked ? 2.5 : 3.5);
      if (hd < 1.5) throw Error(ErrorCode::SpecInvalid, "letter height must be >= 1.5 dots");
      L.left = L.right - d;
      const double xc = L.right - r;
      add_segment(L.radical, {xc, L.base}, {xc, L.base - hd * d}, r);
    }
  }

  for (std::size_t j = 0; j + 1 < nl; ++j) {
    const auto& js = spec.joints[j];
    auto& jt = joints[j];
    jt.shape = js.shape;
    jt.stacked = spec.letters[j + 1].kind == Archetype::stacked;
    jt.x_right = lay[j].left;
    jt.x_left = lay[j + 1].right;
    const Point2<double> start(lay[j].left, lay[j].base);
    const Point2<double> end(lay[j + 1].right, lay[j + 1].base);
    jt.length_dots = (start - end).norm() / d;
    std::vector<Point2<double>> pts;
    if (jt.length_dots <= 0) {
      jt.centerline.points = start;
      jt.arc = {0};
      jt.kappa = {0};
      jt.width = {1};
      jt.input_point = jt.output_point = start;
      continue;
    }
    if (jt.stacked) {
      const int n = std::max(2, static_cast<int>(std::ceil((end - start).norm() / kSampleStep)));
      for (int k = 0; k <= n; ++k) {
        pts.push_back(start + (end - start) * (static_cast<double>(k) / n));
        jt.kappa.push_back(0);
      }
    } else {
      const JointGeometry g{js.shape, js.length_dots, joint_amplitude(js, rng), js.warp};
      jt.amplitude_dots = g.amp;
      const double span = js.length_dots * d;
      const int n = std::max(2, static_cast<int>(std::ceil(span / kSampleStep)));
      for (int k = 0; k <= n; ++k) {
        const double s = span * k / n;
        const Profile p = g.eval(s / d);
        pts.emplace_back(start.x() - s, start.y() + p.f * d);
        // Signed like curvature_profile on the right-to-left path.
        jt.kappa.push_back(-p.f2 / std::pow(1 + p.f1 * p.f1, 1.5));
      }
    }
    jt.centerline.points.resize(2, static_cast<Eigen::Index>(pts.size()));
    double acc = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k > 0) acc += (pts[k] - pts[k - 1]).norm();
      jt.centerline.points.col(static_cast<Eigen::Index>(k)) = pts[k];
      jt.arc.push_back(acc / d);
      const double u = static_cast<double>(k) / static_cast<double>(pts.size() - 1);
      jt.width.push_back(1 + (js.taper - 1) * u);
    }
    jt.arc_length_dots = jt.arc.back();
    if (!jt.stacked) jt.curvature_peaks = prominent_peaks(jt.arc, jt.kappa);
    std::tie(jt.input_arc, jt.output_arc) = truth_cuts(jt.arc, jt.width, jt.curvature_peaks);
    for (std::size_t k = 0; k < pts.size(); ++k)
      joint_samples[j].push_back({pts[k].x(), pts[k].y(), r * jt.width[k]});
  }

  // Canvas: integer shift so the baseline and first edge stay on pixel boundaries.
  double minx = 0, maxx = 0, miny = 0, maxy = 0;
  bool first = true;
  const auto extend = [&](const PenSample& s) {
    if (first) {
      minx = s.x - s.r; maxx = s.x + s.r; miny = s.y - s.r; maxy = s.y + s.r;
      first = false;
    }
    minx = std::min(minx, s.x - s.r);
    maxx = std::max(maxx, s.x + s.r);
    miny = std::min(miny, s.y - s.r);
    maxy = std::max(maxy, s.y + s.r);
  };
  for (const auto& L : lay)
    for (const auto& s : L.radical) extend(s);
  for (const auto& js : joint_samples)
    for (const auto& s : js) extend(s);
  double headroom = 0;
  for (const auto& m : spec.marks) headroom = std::max(headroom, (m.y_units + 0.5) * (maxy - miny));
  const double margin = spec.margin_dots * d;
  const double ox = std::ceil(margin - minx);
  const double oy = std::ceil(margin + headroom - miny);
  const int width = static_cast<int>(std::ceil(maxx + ox + margin));
  const int height = static_cast<int>(std::ceil(maxy + oy + margin));

  const auto shift = [&](PenSample s) {
    s.x += ox;
    s.y += oy;
    return s;
  };
  for (auto& L : lay) {
    L.right += ox;
    L.left += ox;
    L.base += oy;
    for (auto& s : L.radical) s = shift(s);
  }
  for (std::size_t j = 0; j + 1 < nl; ++j) {
    auto& jt = joints[j];
    jt.x_right += ox;
    jt.x_left += ox;
    jt.centerline.points.row(0).array() += ox;
    jt.centerline.points.row(1).array() += oy;
    for (auto& s : joint_samples[j]) s = shift(s);
    if (jt.length_dots > 0) {
      jt.input_point = centerline_at(jt, jt.input_arc);
      jt.output_point = centerline_at(jt, jt.output_arc);
    } else {
      jt.input_point = jt.output_point = jt.centerline.points.col(0);
    }
  }

  GroundTruth gt;
  gt.pen_width_px = d;
  gt.baseline_y = lay[0].base;
  gt.joints = joints;
  BinaryRaster img(width, height, d);
  for (std::size_t i = 0; i < nl; ++i) {
    LetterTruth lt;
    lt.kind = spec.letters[i].kind;
    lt.baseline_y = lay[i].base;
    lt.grapheme = BinaryRaster(width, height, d);
    for (const auto& s : lay[i].radical) stamp(lt.grapheme, s);
    if (i > 0) {
      const auto& jt = gt.joints[i - 1];
      for (std::size_t k = 0; k < joint_samples[i - 1].size(); ++k)
        if (jt.arc[k] >= jt.input_arc) stamp(lt.grapheme, joint_samples[i - 1][k]);
      lt.input_point = jt.input_point;
    } else {
      lt.input_point = Point2<double>(lay[0].right, lay[0].base);
    }
    if (i + 1 < nl) {
      const auto& jt = gt.joints[i];
      for (std::size_t k = 0; k < joint_samples[i].size(); ++k)
        if (jt.arc[k] <= jt.output_arc) stamp(lt.grapheme, joint_samples[i][k]);
    }
    const auto bb = ink_bbox(lt.grapheme);
    lt.bbox = *bb;
    lt.frame_origin = Point2<double>(lt.input_point.x(), lt.baseline_y);
    lt.frame_unit = Point2<double>(bb->at(2) - bb->at(0) + 1, bb->at(3) - bb->at(1) + 1);
    img = raster_union(img, lt.grapheme);
    gt.letters.push_back(std::move(lt));
  }

  for (const auto& m : spec.marks) {
    const auto& lt = gt.letters[static_cast<std::size_t>(m.letter)];
    MarkTruth mt;
    mt.letter = m.letter;
    mt.kind = m.kind;
    mt.x_units = m.x_units;
    mt.y_units = m.y_units;
    mt.center = Point2<double>(lt.frame_origin.x() - m.x_units * lt.frame_unit.x(),
                               lt.frame_origin.y() - m.y_units * lt.frame_unit.y());
    std::vector<PenSample> strokes;
    if (m.kind == MarkKind::dot) {
      strokes.push_back({mt.center.x(), mt.center.y(), d / std::numbers::sqrt2});
    } else {
      const Point2<double> dir = Point2<double>(0.94, 0.34).normalized();
      add_segment(strokes, mt.center - 0.75 * d * dir, mt.center + 0.75 * d * dir, 0.3 * d);
    }
    for (const auto& s : strokes) stamp(img, s);
    gt.marks.push_back(mt);
  }
  gt.ink_count = img.foreground_count();

  double tremor = 0;
  std::vector<FractureSpec> fractures;
  for (std::size_t j = 0; j < spec.joints.size(); ++j) {
    tremor = std::max(tremor, spec.joints[j].tremor_dots);
    for (auto f : spec.joints[j].fractures) {
      f.joint = static_cast<int>(j);
      fractures.push_back(f);
    }
  }
  if (tremor > 0 || !fractures.empty())
    return perturb(img, gt, tremor, fractures, spec.seed ^ 0x5DEECE66DULL);
  return {img, gt};
}

std::pair<BinaryRaster, GroundTruth> perturb(const BinaryRaster& img, const GroundTruth& gt,
                                             double tremor_dots,
                                             const std::vector<FractureSpec>& fractures,
                                             std::uint64_t seed) {
  if (tremor_dots < 0) throw Error(ErrorCode::InvalidArgument, "tremor must be >= 0");
  BinaryRaster out = img;
  GroundTruth g = gt;
  const double d = gt.pen_width_px > 0 ? gt.pen_width_px : img.require_dot();
  if (tremor_dots > 0 && !img.empty()) {
    // Band-limited field: a few plane waves with wavelengths of 1-2 dots,
    // scaled so that its magnitude never exceeds tremor_dots.
    Rng rng(seed);
    constexpr int kWaves = 6;
    struct Wave {
      double kx, ky, phase, weight;
    };
    std::vector<Wave> waves;
    double wsum = 0;
    for (int k = 0; k < kWaves; ++k) {
      const double lambda = rng.uniform(1.0, 2.0) * d;
      const double theta = rng.uniform(0, 2 * std::numbers::pi);
      const double freq = 2 * std::numbers::pi / lambda;
      Wave w{freq * std::cos(theta), freq * std::sin(theta), rng.uniform(0, 2 * std::numbers::pi),
             rng.uniform(0.5, 1.0)};
      wsum += w.weight;
      waves.push_back(w);
    }
    const double amp = tremor_dots * d / wsum;
    const Eigen::ArrayXXd sd = signed_distance(img);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        const double s = sd(y, x);
        if (std::abs(s) > tremor_dots * d + 1) continue;
        double n = 0;
        for (const auto& w : waves) n += w.weight * std::cos(w.kx * (x + 0.5) + w.ky * (y + 0.5) + w.phase);
        out.set(x, y, s + amp * n > 0);
      }
    g.tremor_dots = std::max(g.tremor_dots, tremor_dots);
  }
  for (const auto& f : fractures) {
    if (f.joint < 0 || f.joint >= static_cast<int>(g.joints.size()))
      throw Error(ErrorCode::InvalidArgument, "fracture refers to a missing joint");
    auto& jt = g.joints[static_cast<std::size_t>(f.joint)];
    const Point2<double> p = centerline_at(jt, f.arc_dots);
    const Point2<double> a = centerline_at(jt, std::max(0.0, f.arc_dots - 0.1));
    const Point2<double> b = centerline_at(jt, std::min(jt.arc.back(), f.arc_dots + 0.1));
    Point2<double> t = b - a;
    if (t.norm() < 1e-9) t = Point2<double>(-1, 0);
    t.normalize();
    const Point2<double> n(-t.y(), t.x());
    const int reach = static_cast<int>(std::ceil(2 * d + f.gap_px));
    for (int y = static_cast<int>(p.y()) - reach; y <= static_cast<int>(p.y()) + reach; ++y)
      for (int x = static_cast<int>(p.x()) - reach; x <= static_cast<int>(p.x()) + reach; ++x) {
        const Point2<double> q(x + 0.5 - p.x(), y + 0.5 - p.y());
        if (std::abs(q.dot(t)) < f.gap_px / 2 && std::abs(q.dot(n)) <= d) out.set(x, y, false);
      }
    jt.fractures.push_back({f.arc_dots, f.gap_px / d});
  }
  for (auto& jt : g.joints)
    std::sort(jt.fractures.begin(), jt.fractures.end(),
              [](const Fracture& a, const Fracture& b) { return a.arc < b.arc; });
  g.ink_count = out.foreground_count();
  return {out, g};
}

SynthSpec random_spec(std::uint64_t seed, int letters, double pen_width_px,
                      std::optional<ShapeClass> shape, double tremor_dots) {
  if (letters < 1) throw Error(ErrorCode::SpecInvalid, "need at least one letter");
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
  SynthSpec s;
  s.seed = seed;
  s.pen_width_px = pen_width_px;
  for (int i = 0; i < letters; ++i) {
    LetterPrimitive lp;
    lp.kind = rng.uniform() < 0.35 ? Archetype::bowl : Archetype::tooth;
    if (lp.kind == Archetype::tooth) lp.height_dots = rng.uniform(3.0, 4.0);
    else lp.width_dots = rng.uniform(3.0, 4.0);
    s.letters.push_back(lp);
  }
  for (int j = 0; j + 1 < letters; ++j) {
    JointSpec js;
    js.shape = shape ? *shape : kAllShapeClasses[rng.next() % 5];
    const auto range = shape_range(js.shape);
    if (js.shape == ShapeClass::laying) {
      js.amplitude_dots = rng.uniform(range.amplitude_min, range.amplitude_max);
      js.length_dots = 5 * js.amplitude_dots + rng.uniform(0, 1);
    } else {
      js.length_dots = rng.uniform(range.length_min, range.length_max);
      if (js.shape == ShapeClass::curvilinear_with_curvature) {
        js.amplitude_dots = std::min(rng.uniform(range.amplitude_min, range.amplitude_max), 0.16 * js.length_dots);
        js.warp = rng.uniform(-0.15, 0.15);
      } else if (js.shape != ShapeClass::linear) {
        js.amplitude_dots = std::min(rng.uniform(range.amplitude_min, range.amplitude_max),
                                     0.0125 * js.length_dots * js.length_dots);
      }
    }
    js.tremor_dots = tremor_dots;
    s.joints.push_back(js);
  }
  return s;
}

Point2<double> CubicBezier::at(double t) const {
  const double u = 1 - t;
  return u * u * u * p0 + 3 * u * u * t * p1 + 3 * u * t * t * p2 + t * t * t * p3;
}

Point2<double> CubicBezier::d1(double t) const {
  const double u = 1 - t;
  return 3 * u * u * (p1 - p0) + 6 * u * t * (p2 - p1) + 3 * t * t * (p3 - p2);
}

Point2<double> CubicBezier::d2(double t) const {
  return 6 * (1 - t) * (p2 - 2 * p1 + p0) + 6 * t * (p3 - 2 * p2 + p1);
}

double CubicBezier::curvature(double t) const {
  const Point2<double> a = d1(t);
  const Point2<double> b = d2(t);
  return (a.x() * b.y() - a.y() * b.x()) / std::pow(a.squaredNorm(), 1.5);
}

Contour CubicBezier::polyline(int samples) const {
  Contour c{Polyline<double>(2, samples), false};
  for (int i = 0; i < samples; ++i) c.points.col(i) = at(static_cast<double>(i) / (samples - 1));
  return c;
}

}  // namespace cursive
