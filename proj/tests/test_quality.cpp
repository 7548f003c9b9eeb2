#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cursive/quality.hpp"
#include "cursive/segmentation.hpp"
#include "cursive/synth.hpp"
#include "support.hpp"

using namespace cursive;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

// Horizontal path through the middle of a bar, right to left.
Contour bar_path(double x_right, double x_left, double y) {
  return testing::polygon({{x_right, y}, {x_left, y}}, false);
}

CursiveBand oracle_band(const SynthSpec& spec, BinaryRaster* out = nullptr, GroundTruth* truth = nullptr) {
  auto [img, gt] = synth_subword(spec);
  img.set_dot_px(gt.pen_width_px);
  auto bands = locate_cursive_bands(img, static_cast<int>(spec.letters.size()), gt.baseline_y);
  if (out) *out = img;
  if (truth) *truth = gt;
  return bands.front();
}

}  // namespace

TEST_CASE("dot unit examples") {
  CHECK(estimate_dot_unit(testing::filled_rect(20, 20, 3, 3, 8, 8)) == 6.0);
  // Stroke of constant width 8: a long bar and a tall bar.
  BinaryRaster r(80, 80);
  for (int y = 10; y < 18; ++y)
    for (int x = 5; x < 70; ++x) r.set(x, y);
  for (int y = 18; y < 70; ++y)
    for (int x = 40; x < 48; ++x) r.set(x, y);
  CHECK(std::abs(estimate_dot_unit(r) - 8) <= 1);
  CHECK(code_of([] { estimate_dot_unit(BinaryRaster(5, 5)); }) == ErrorCode::NoForeground);
}

TEST_CASE("dot unit on oracle words with tremor") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [img, gt] = synth_subword(random_spec(seed, 3, 10, std::nullopt, 0.2));
    CHECK(std::abs(estimate_dot_unit(img) - 10) <= 1);
  }
}

TEST_CASE("thickness of a one-dot bar") {
  BinaryRaster r = testing::filled_rect(60, 30, 5, 10, 54, 19);
  r.set_dot_px(10);
  const auto path = bar_path(50, 10, 15);
  const auto v = thickness_profile(r, path, ThicknessMethod::vertical_projection);
  const auto c = thickness_profile(r, path, ThicknessMethod::contour_pairing);
  REQUIRE(v.arc.size() == c.arc.size());
  for (std::size_t i = 0; i < v.arc.size(); ++i) {
    CHECK(std::abs(v.thickness[i] - 1.0) <= 0.15);
    CHECK(std::abs(c.thickness[i] - v.thickness[i]) <= 0.15);
    if (i > 0) CHECK(v.arc[i] > v.arc[i - 1]);
  }
  CHECK(code_of([&] { thickness_profile(BinaryRaster(60, 30, 10), path, ThicknessMethod::vertical_projection); }) ==
        ErrorCode::PathOutsideInk);
  CHECK(code_of([&] { thickness_profile(testing::filled_rect(60, 30, 5, 10, 54, 19), path,
                                        ThicknessMethod::vertical_projection); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("thickness follows an oracle taper") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto spec = random_spec(seed, 2, 10, ShapeClass::linear);
    spec.joints[0].length_dots = 5;
    spec.joints[0].amplitude_dots = 0.01;
    spec.joints[0].taper = 0.6;
    BinaryRaster img;
    GroundTruth gt;
    const auto band = oracle_band(spec, &img, &gt);
    const auto& jt = gt.joints[0];
    for (const auto method : {ThicknessMethod::vertical_projection, ThicknessMethod::contour_pairing}) {
      const auto p = thickness_profile(img, band.path, method);
      for (std::size_t i = 0; i < p.arc.size(); ++i) {
        // The letter strokes overlap the band within half a dot of its ends.
        if (p.arc[i] < 0.5 || p.arc[i] > p.arc.back() - 0.5) continue;
        const double x = band.path.points(0, static_cast<Eigen::Index>(i));
        Eigen::Index k = 0;
        (jt.centerline.points.row(0).array() - x).abs().minCoeff(&k);
        const double w = jt.width[static_cast<std::size_t>(k)];
        CHECK(std::abs(p.thickness[i] - w) <= 0.15 * w);
      }
    }
  }
}

TEST_CASE("thickness methods agree on oracle straight strokes") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    BinaryRaster img;
    const auto band = oracle_band(random_spec(seed, 2, 10, ShapeClass::linear), &img);
    const auto a = thickness_profile(img, band.path, ThicknessMethod::vertical_projection);
    const auto b = thickness_profile(img, band.path, ThicknessMethod::contour_pairing);
    double mad = 0;
    for (std::size_t i = 0; i < a.arc.size(); ++i) mad += std::abs(a.thickness[i] - b.thickness[i]);
    CHECK(mad / static_cast<double>(a.arc.size()) <= 0.15);
  }
}

TEST_CASE("fractures on bars") {
  BinaryRaster r = testing::filled_rect(80, 30, 5, 10, 74, 19);
  r.set_dot_px(10);
  const auto path = bar_path(70, 10, 15);
  SUBCASE("unbroken") {
    CHECK(detect_fractures(thickness_profile(r, path, ThicknessMethod::vertical_projection), r, path).empty());
  }
  SUBCASE("one and two erased gaps") {
    for (int x = 40; x < 42; ++x)
      for (int y = 10; y < 20; ++y) r.set(x, y, false);
    auto f = detect_fractures(thickness_profile(r, path, ThicknessMethod::vertical_projection), r, path);
    REQUIRE(f.size() == 1);
    // Gap centre at x = 41 is 2.9 dots from the path start.
    CHECK(std::abs(f[0].arc - 2.9) <= 0.5);
    for (int x = 20; x < 22; ++x)
      for (int y = 10; y < 20; ++y) r.set(x, y, false);
    f = detect_fractures(thickness_profile(r, path, ThicknessMethod::vertical_projection), r, path);
    REQUIRE(f.size() == 2);
    CHECK(f[0].arc < f[1].arc);
    CHECK(std::abs(f[1].arc - 4.9) <= 0.5);
  }
}

TEST_CASE("oracle fracture injection") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto spec = random_spec(seed, 2, 10, kAllShapeClasses[seed % 5]);
    const auto [img, gt] = synth_subword(spec);
    const double arc = gt.joints[0].arc_length_dots;
    const std::vector<FractureSpec> gaps{{0, arc / 3, 2}, {0, 2 * arc / 3, 2}};
    for (std::size_t n = 0; n <= gaps.size(); ++n) {
      auto [broken, truth] = perturb(img, gt, 0, {gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(n)}, seed);
      broken.set_dot_px(gt.pen_width_px);
      const auto band = locate_cursive_bands(broken, 2, gt.baseline_y)[0];
      const auto f = detect_fractures(band.thickness, broken, band.path);
      REQUIRE(f.size() == n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto pb = point_at(band.path, cumulative_length(band.path), f[i].arc * gt.pen_width_px);
        const auto& jt = truth.joints[0];
        const auto pt = point_at(jt.centerline, cumulative_length(jt.centerline), jt.fractures[i].arc * gt.pen_width_px);
        CHECK((pb - pt).norm() <= 0.5 * gt.pen_width_px);
      }
    }
  }
}

TEST_CASE("fracture count never drops when a disjoint gap is added") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    BinaryRaster r = testing::filled_rect(120, 30, 5, 10, 114, 19);
    r.set_dot_px(10);
    const auto path = bar_path(110, 10, 15);
    std::size_t last = 0;
    for (int g = 0; g < 4; ++g) {
      const int x = 14 + 20 * g + static_cast<int>(rng.uniform() * 6);
      const int w = 1 + static_cast<int>(rng.uniform() * 3);
      for (int dx = 0; dx < w; ++dx)
        for (int y = 10; y < 20; ++y) r.set(x + dx, y, false);
      const auto n = detect_fractures(thickness_profile(r, path, ThicknessMethod::vertical_projection), r, path).size();
      CHECK(n >= last);
      last = n;
    }
  }
}

TEST_CASE("regularity entropy examples") {
  const auto line = testing::polygon({{0, 0}, {5, 2}, {10, 4}}, false);
  const auto r = regularity_entropy(line);
  CHECK(r.entropy == 0.0);
  CHECK(r.regular);
  // Sixteen equal edges, one per direction bin.
  Contour gon{Polyline<double>(2, 16), true};
  for (int i = 0; i < 16; ++i) {
    const double a = 2 * std::numbers::pi * i / 16 - std::numbers::pi / 2 + std::numbers::pi / 16;
    gon.points.col(i) << std::cos(a), std::sin(a);
  }
  const auto u = regularity_entropy(gon);
  CHECK(std::abs(u.entropy - 4.0) <= 1e-9);
  CHECK_FALSE(u.regular);
  CHECK(code_of([] { regularity_entropy(testing::polygon({{1, 1}, {1, 1}}, false)); }) ==
        ErrorCode::DegenerateContour);
}

TEST_CASE("entropy bounds and scale invariance") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const int n = 3 + static_cast<int>(rng.uniform() * 30);
    Contour c{Polyline<double>(2, n), rng.uniform() < 0.5};
    for (int i = 0; i < n; ++i) c.points.col(i) << rng.uniform(-10, 10), rng.uniform(-10, 10);
    for (int bins : {2, 8, 16, 32}) {
      const double e = regularity_entropy(c, bins).entropy;
      CHECK(e >= 0);
      CHECK(e <= std::log2(bins) + 1e-12);
    }
    const double s = rng.uniform(0.1, 10);
    CHECK(std::abs(regularity_entropy(scaled(c, s)).entropy - regularity_entropy(c).entropy) <= 1e-6);
  }
}

TEST_CASE("tremor raises the entropy of the band boundary") {
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    for (const auto cls : kAllShapeClasses) {
      const auto [clean, gt] = synth_subword(random_spec(seed, 2, 10, cls));
      const auto [noisy, gt2] = perturb(clean, gt, 0.4, {}, seed + 50);
      BinaryRaster a = clean, b = noisy;
      a.set_dot_px(10);
      b.set_dot_px(10);
      const auto ba = locate_cursive_bands(a, 2, gt.baseline_y)[0];
      const auto bb = locate_cursive_bands(b, 2, gt.baseline_y)[0];
      CHECK(assess_band(bb, b, std::nullopt).regularity_entropy > assess_band(ba, a, std::nullopt).regularity_entropy);
    }
}

TEST_CASE("portion distance checks") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto spec = random_spec(seed, 2, 10, ShapeClass::linear);
    spec.joints[0].length_dots = 2.0;
    const auto two = portion_distance_check(oracle_band(spec), 2.0);
    CHECK_FALSE(two.violation);
    spec.joints[0].length_dots = 3.5;
    const auto far = portion_distance_check(oracle_band(spec), 2.0);
    CHECK(far.violation);
    CHECK(std::abs(far.measured - 3.5) <= 0.25);
    const auto self = portion_distance_check(oracle_band(spec), far.measured);
    CHECK_FALSE(self.violation);
    CHECK(self.deviation() == 0.0);
  }
}

TEST_CASE("assess_band reports violations only when expected is given") {
  BinaryRaster img;
  auto spec = random_spec(1, 2, 10, ShapeClass::linear);
  spec.joints[0].length_dots = 4;
  const auto band = oracle_band(spec, &img);
  CHECK(assess_band(band, img, std::nullopt).portion_distance_violations.empty());
  const auto rep = assess_band(band, img, 2.0);
  REQUIRE(rep.portion_distance_violations.size() == 1);
  CHECK(rep.portion_distance_violations[0].expected == 2.0);
  CHECK(rep.fractures.empty());
  CHECK(rep.regularity_entropy >= 0);
  CHECK(rep.regularity_entropy <= 4.0);
}
