#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "cursive/band.hpp"
#include "cursive/raster.hpp"

namespace cursive {

/// Seeded generator with platform-independent uniform and normal draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal();
  std::uint64_t next() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  std::optional<double> spare_;
};

enum class Archetype {
  tooth,    // vertical stroke rising from the baseline
  bowl,     // closed loop sitting on the baseline
  stacked,  // tooth written above the line, reached by a steep join
};
std::string_view archetype_name(Archetype a);
Archetype parse_archetype(std::string_view s);

struct LetterPrimitive {
  Archetype kind = Archetype::tooth;
  double height_dots = 0;  // 0: archetype default
  double width_dots = 0;   // bowls only; 0: default
};

struct FractureSpec {
  int joint = 0;
  double arc_dots = 0;  // along the joint centreline from its right end
  double gap_px = 2;
};

struct JointSpec {
  ShapeClass shape = ShapeClass::linear;
  double length_dots = 2;
  double tremor_dots = 0;
  std::vector<FractureSpec> fractures;  // `joint` is filled in from the position
  double amplitude_dots = 0;  // 0: drawn from the seed within the class range
  double warp = 0;            // S-curve phase warp in [-0.25, 0.25]
  double taper = 1;           // pen width factor at the left end
};

enum class MarkKind { dot, fatha };

struct MarkSpec {
  int letter = 0;
  MarkKind kind = MarkKind::dot;
  double x_units = 0.5;  // in the letter's diacritic frame
  double y_units = 1.2;
};

struct SynthSpec {
  std::vector<LetterPrimitive> letters;
  double pen_width_px = 10;
  std::vector<JointSpec> joints;
  std::vector<MarkSpec> marks;
  std::uint64_t seed = 0;
  double margin_dots = 3;
};

struct JointTruth {
  ShapeClass shape = ShapeClass::linear;
  bool stacked = false;
  double length_dots = 0;      // chord between the radical attachments
  double arc_length_dots = 0;  // along the centreline
  double x_right = 0;          // attachment to the preceding letter (px)
  double x_left = 0;           // attachment to the following letter (px)
  double amplitude_dots = 0;
  Contour centerline{Polyline<double>(2, 0), false};  // px, right to left, ~0.25 px spacing
  std::vector<double> arc;     // dots at each centreline vertex
  std::vector<double> kappa;   // analytic curvature, 1/dots
  std::vector<double> width;   // pen width in dots at each vertex
  std::vector<double> curvature_peaks;  // dots, prominent analytic |kappa| maxima
  double input_arc = 0;   // where the following letter's stroke begins
  double output_arc = 0;  // where the preceding letter's stroke ends
  Point2<double> input_point = Point2<double>::Zero();
  Point2<double> output_point = Point2<double>::Zero();
  std::vector<Fracture> fractures;
};

struct LetterTruth {
  Archetype kind = Archetype::tooth;
  BinaryRaster grapheme;                 // the letter alone, with its stubs
  Point2<double> input_point = Point2<double>::Zero();
  double baseline_y = 0;
  std::array<int, 4> bbox{};             // of the grapheme
  Point2<double> frame_origin = Point2<double>::Zero();
  Point2<double> frame_unit = Point2<double>::Ones();  // (width, height) px
};

struct MarkTruth {
  int letter = 0;
  MarkKind kind = MarkKind::dot;
  Point2<double> center = Point2<double>::Zero();
  double x_units = 0;
  double y_units = 0;
};

struct GroundTruth {
  std::size_t ink_count = 0;
  double pen_width_px = 0;
  double baseline_y = 0;
  double tremor_dots = 0;
  std::vector<JointTruth> joints;
  std::vector<LetterTruth> letters;
  std::vector<MarkTruth> marks;
};

/// Renders a subword right to left with a lozenge pen. Deterministic in
/// (spec, seed).
std::pair<BinaryRaster, GroundTruth> synth_subword(const SynthSpec& spec);

/// Smooth tremor of peak amplitude `tremor_dots` on the outline plus erased
/// fracture gaps. Zero tremor and no fractures return the input unchanged.
std::pair<BinaryRaster, GroundTruth> perturb(const BinaryRaster& img, const GroundTruth& gt,
                                             double tremor_dots,
                                             const std::vector<FractureSpec>& fractures,
                                             std::uint64_t seed);

/// Random spec for corpus runs: `letters` archetypes (tooth/bowl), one shape
/// class per joint, parameters inside each class's generating range.
SynthSpec random_spec(std::uint64_t seed, int letters, double pen_width_px,
                      std::optional<ShapeClass> shape = std::nullopt, double tremor_dots = 0);

/// Generating ranges for each class: length and amplitude in dots.
struct ShapeRange {
  double length_min, length_max;
  double amplitude_min, amplitude_max;
};
ShapeRange shape_range(ShapeClass s);

/// Cubic Bezier with exact derivatives, for curvature checks.
struct CubicBezier {
  Point2<double> p0, p1, p2, p3;
  Point2<double> at(double t) const;
  Point2<double> d1(double t) const;
  Point2<double> d2(double t) const;
  double curvature(double t) const;  // signed, left turns positive
  Contour polyline(int samples) const;  // `samples` points, both ends included
};

}  // namespace cursive
