#include <doctest.h>

#include <cmath>

#include "cursive/segmentation.hpp"
#include "cursive/synth.hpp"
#include "cursive/tracing.hpp"
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

WordContext oracle_context(const GroundTruth& gt) {
  WordContext ctx;
  ctx.letters = testing::oracle_letters(gt);
  return ctx;
}

Point2<double> at_arc(const Contour& c, double arc_px) { return point_at(c, cumulative_length(c), arc_px); }

// Arc position (dots) of the centreline sample nearest to p.
double arc_of_nearest(const JointTruth& jt, const Point2<double>& p) {
  Eigen::Index best = 0;
  (jt.centerline.points.colwise() - p).colwise().squaredNorm().minCoeff(&best);
  return jt.arc[static_cast<std::size_t>(best)];
}

// Straight horizontal band between two radicals, built through the engine.
CursiveBand straight_band(int length_px, BinaryRaster* out = nullptr) {
  const int x0 = 20, x1 = x0 + length_px;
  BinaryRaster r(x1 + 30, 80, 10);
  for (int y = 20; y < 60; ++y)
    for (int x = 0; x < 10; ++x) {
      r.set(x0 + x - 10, y);
      r.set(x1 + x, y);
    }
  for (int y = 50; y < 60; ++y)
    for (int x = x0; x < x1; ++x) r.set(x, y);
  if (out) *out = r;
  return locate_cursive_bands(r, 2, 55.0).front();
}

}  // namespace

TEST_CASE("baseline estimate sits on the oracle baseline") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto [img, gt] = synth_subword(random_spec(seed, 3, 10));
    CHECK(std::abs(estimate_baseline(img) - gt.baseline_y) <= 5);
  }
}

TEST_CASE("bands of oracle subwords") {
  SUBCASE("two letters give one band over the joint") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto [img, gt] = synth_subword(random_spec(seed, 2, 10, kAllShapeClasses[seed % 5]));
      img.set_dot_px(10);
      const auto bands = locate_cursive_bands(img, 2, gt.baseline_y);
      REQUIRE(bands.size() == 1);
      const auto& b = bands[0].path;
      const auto& jt = gt.joints[0];
      CHECK(std::abs(b.points(0, 0) - jt.x_right) <= 5);
      CHECK(std::abs(b.points(0, b.size() - 1) - jt.x_left) <= 5);
    }
  }
  SUBCASE("four letters give three bands right to left") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto [img, gt] = synth_subword(random_spec(seed, 4, 10));
      img.set_dot_px(10);
      const auto bands = locate_cursive_bands(img, 4, gt.baseline_y);
      REQUIRE(bands.size() == 3);
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(bands[k].path.points(0, 0) - gt.joints[k].x_right) <= 5);
        if (k > 0) CHECK(bands[k].column_end < bands[k - 1].column_begin);
      }
    }
  }
  SUBCASE("a stacked letter leaves no band") {
    SynthSpec spec;
    spec.letters = {{Archetype::tooth}, {Archetype::stacked}};
    spec.joints = {JointSpec{}};
    spec.joints[0].length_dots = 0;
    auto [img, gt] = synth_subword(spec);
    img.set_dot_px(10);
    CHECK(gt.joints[0].stacked);
    CHECK(code_of([&] { locate_cursive_bands(img, 2, gt.baseline_y); }) == ErrorCode::BandCountMismatch);
  }
  SUBCASE("argument errors") {
    auto [img, gt] = synth_subword(random_spec(1, 2, 10));
    CHECK(code_of([&] { locate_cursive_bands(img, 1, gt.baseline_y); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { locate_cursive_bands(img, 5, gt.baseline_y); }) == ErrorCode::BandCountMismatch);
  }
}

TEST_CASE("band path runs in the writing direction") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto [img, gt] = synth_subword(random_spec(seed, 3, 10, std::nullopt, 0.3));
    img.set_dot_px(10);
    for (const auto& band : locate_cursive_bands(img, 3, gt.baseline_y)) {
      for (Eigen::Index i = 1; i < band.path.size(); ++i) CHECK(band.path.points(0, i) < band.path.points(0, i - 1));
      REQUIRE(band.thickness.arc.size() == static_cast<std::size_t>(band.path.size()));
      CHECK(band.length_dots >= 0);
    }
  }
}

TEST_CASE("anomaly masking") {
  SUBCASE("clean band is unchanged apart from the flag") {
    BinaryRaster img;
    const auto band = straight_band(40, &img);
    const auto masked = mask_anomalies(band, assess_band(band, img, std::nullopt));
    CHECK(masked.cleaned);
    CHECK(masked.path.points == band.path.points);
    CHECK(masked.thickness.thickness == band.thickness.thickness);
    CHECK(masked.annotations.empty());
  }
  SUBCASE("a fracture is bridged") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto spec = random_spec(seed, 2, 10, kAllShapeClasses[seed % 5]);
      const auto [img, gt] = synth_subword(spec);
      auto [broken, truth] = perturb(img, gt, 0, {{0, gt.joints[0].arc_length_dots / 2, 2}}, seed);
      broken.set_dot_px(10);
      const auto band = locate_cursive_bands(broken, 2, gt.baseline_y)[0];
      const auto rep = assess_band(band, broken, std::nullopt);
      REQUIRE(rep.fractures.size() == 1);
      const auto masked = mask_anomalies(band, rep);
      CHECK(masked.has(Annotation::fracture_bridged));
      CHECK(masked.anomalies.size() == 1);
      for (double t : masked.thickness.thickness) CHECK(t >= 0.25);
      CHECK(detect_fractures(masked.thickness, img, masked.path).empty());
    }
  }
  SUBCASE("long band under a forbidden context") {
    auto spec = random_spec(3, 2, 10, ShapeClass::linear);
    spec.joints[0].length_dots = 5;
    auto [img, gt] = synth_subword(spec);
    img.set_dot_px(10);
    const auto band = locate_cursive_bands(img, 2, gt.baseline_y)[0];
    const ElongationRule forbidden{ElongationKind::forbidden, 0, 0, true};
    const auto masked = mask_anomalies(band, assess_band(band, img, std::nullopt), forbidden);
    CHECK(masked.has(Annotation::false_elongation));
    const auto ok = mask_anomalies(band, assess_band(band, img, std::nullopt), RuleTables::naskh().elongation_rule(
                                                                                   {Letter::beh, Position::initial},
                                                                                   {Letter::teh, Position::final}));
    CHECK_FALSE(ok.has(Annotation::false_elongation));
  }
  SUBCASE("portion distance violation marks a false approach") {
    auto spec = random_spec(4, 2, 10, ShapeClass::linear);
    spec.joints[0].length_dots = 4;
    auto [img, gt] = synth_subword(spec);
    img.set_dot_px(10);
    const auto band = locate_cursive_bands(img, 2, gt.baseline_y)[0];
    CHECK(mask_anomalies(band, assess_band(band, img, 2.0)).has(Annotation::false_approach));
    CHECK_FALSE(mask_anomalies(band, assess_band(band, img, 4.0)).has(Annotation::false_approach));
  }
}

TEST_CASE("band decomposition") {
  SUBCASE("straight band is one segment") {
    const auto d = decompose_band(straight_band(40));
    CHECK(d.splits.empty());
    REQUIRE(d.segments.size() == 1);
    CHECK(d.segments[0].first == 0.0);
  }
  SUBCASE("S-shaped oracle bands split near the analytic peaks") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto [img, gt] = synth_subword(random_spec(seed, 2, 10, ShapeClass::curvilinear_with_curvature));
      img.set_dot_px(10);
      const auto& jt = gt.joints[0];
      if (jt.curvature_peaks.size() != 2) continue;
      ++checked;
      const auto band = locate_cursive_bands(img, 2, gt.baseline_y)[0];
      const auto d = decompose_band(band);
      REQUIRE(d.splits.size() == 2);
      CHECK(d.segments.size() == 3);
      for (std::size_t i = 0; i < 2; ++i) {
        const double along = arc_of_nearest(jt, at_arc(band.path, d.splits[i] * 10));
        CHECK(std::abs(along - jt.curvature_peaks[i]) <= 0.3);
      }
    }
    CHECK(checked >= 10);
  }
  SUBCASE("a shallow dip stays whole") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto [img, gt] = synth_subword(random_spec(seed, 2, 10, ShapeClass::concave));
      img.set_dot_px(10);
      const double peak = gt.joints[0].kappa.empty()
                              ? 0
                              : Eigen::Map<const Eigen::ArrayXd>(gt.joints[0].kappa.data(),
                                                                  static_cast<Eigen::Index>(gt.joints[0].kappa.size()))
                                    .abs()
                                    .maxCoeff();
      REQUIRE(peak < 0.15);
      const auto d = decompose_band(locate_cursive_bands(img, 2, gt.baseline_y)[0]);
      CHECK(d.segments.size() == 1);
    }
  }
  SUBCASE("segments cover the band") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      auto [img, gt] = synth_subword(random_spec(seed, 2, 10, std::nullopt, 0.3));
      img.set_dot_px(10);
      const auto band = locate_cursive_bands(img, 2, gt.baseline_y)[0];
      const auto d = decompose_band(band);
      REQUIRE(!d.segments.empty());
      CHECK(d.segments.front().first == 0.0);
      CHECK(std::abs(d.segments.back().second - band.arc_length_dots()) < 1e-9);
      for (std::size_t i = 1; i < d.segments.size(); ++i) CHECK(d.segments[i].first == d.segments[i - 1].second);
      for (std::size_t i = 1; i < d.splits.size(); ++i) CHECK(d.splits[i] - d.splits[i - 1] >= 0.5);
    }
  }
}

TEST_CASE("cut points") {
  SUBCASE("featureless 2-dot band falls back to 25/75") {
    const auto band = straight_band(20);
    REQUIRE(std::abs(band.arc_length_dots() - 2.0) < 0.05);
    const auto d = decompose_band(band);
    const auto c = select_cut_points(band, d);
    CHECK(std::abs(c.input_second - 0.5) < 0.05);
    CHECK(std::abs(c.output_first - 1.5) < 0.05);
    CHECK(c.input_fallback);
    CHECK(c.output_fallback);
  }
  SUBCASE("a band under one dot is too short") {
    CursiveBand band;
    band.dot_px = 10;
    band.path = testing::polygon({{18, 5}, {16, 5}, {14, 5}, {12, 5}, {10, 5}}, false);
    Decomposition d;
    d.segments = {{0.0, 0.8}};
    CHECK(code_of([&] { select_cut_points(band, d); }) == ErrorCode::BandTooShort);
  }
  SUBCASE("order and separation on oracle bands") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      auto [img, gt] = synth_subword(random_spec(seed, 2, 10, std::nullopt, 0.2 * static_cast<double>(seed % 3)));
      img.set_dot_px(10);
      const auto band = locate_cursive_bands(img, 2, gt.baseline_y)[0];
      const auto c = select_cut_points(band, decompose_band(band));
      CHECK(c.input_second < c.output_first);
      CHECK(c.output_first - c.input_second >= 0.5 - 1e-9);
    }
  }
}

TEST_CASE("extract and merge") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto [img, gt] = synth_subword(random_spec(seed, 2, 10, kAllShapeClasses[seed % 5], 0.2 * static_cast<double>(seed % 3)));
    img.set_dot_px(10);
    const auto band = locate_cursive_bands(img, 2, gt.baseline_y)[0];
    const auto cuts = select_cut_points(band, decompose_band(band));
    const auto pair = extract_and_merge(img, band, cuts);
    CHECK(testing::differing_pixels(raster_union(pair.left, pair.right), img) == 0);
    CHECK(testing::differing_pixels(raster_intersection(pair.left, pair.right), pair.common) == 0);
    // Lower bound: half a dot of band at its thinnest.
    double tmin = 1e9;
    for (double t : band.thickness.thickness) tmin = std::min(tmin, t);
    CHECK(static_cast<double>(pair.common.foreground_count()) >= 0.5 * 10 * tmin * 10 * 0.9);
    // The shared part lies inside the band columns.
    const auto bb = ink_bbox(pair.common);
    REQUIRE(bb.has_value());
    CHECK((*bb)[0] >= band.column_begin - 1);
    CHECK((*bb)[2] <= band.column_end + 1);
  }
}

TEST_CASE("graphemes match the generator's own letters") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [img, gt] = synth_subword(random_spec(seed, 2 + static_cast<int>(seed % 3), 10));
    const auto res = segment_word(img, oracle_context(gt));
    REQUIRE(res.graphemes.size() == gt.letters.size());
    for (std::size_t i = 0; i < gt.letters.size(); ++i) {
      const auto a = trace_boundary(res.graphemes[i]);
      const auto b = trace_boundary(gt.letters[i].grapheme);
      const auto outer = [](const std::vector<Contour>& cs) {
        const Contour* best = &cs.front();
        for (const auto& c : cs)
          if (signed_area(c) > signed_area(*best)) best = &c;
        return *best;
      };
      const auto ca = outer(a), cb = outer(b);
      const double d = 0.5 * (mean_distance(ca, cb) + mean_distance(cb, ca));
      CHECK_MESSAGE(d < 0.5 * 10, "seed ", seed, " letter ", i);
    }
  }
}

TEST_CASE("whole words") {
  SUBCASE("reconstruction and determinism") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto [img, gt] = synth_subword(random_spec(seed, 2 + static_cast<int>(seed % 3), 10, std::nullopt, 0.2));
      const auto a = segment_word(img, oracle_context(gt));
      const auto b = segment_word(img, oracle_context(gt));
      REQUIRE(a.joints.size() == gt.joints.size());
      BinaryRaster all(img.width(), img.height());
      for (const auto& g : a.graphemes) all = raster_union(all, g);
      CHECK(testing::differing_pixels(all, img) == 0);
      for (std::size_t k = 0; k < a.joints.size(); ++k) {
        CHECK(a.joints[k].index == static_cast<int>(k));
        CHECK(a.joints[k].pair.common.foreground_count() > 0);
        CHECK(a.joints[k].pair.cuts.input_second == b.joints[k].pair.cuts.input_second);
        CHECK(a.joints[k].pair.cuts.output_first == b.joints[k].pair.cuts.output_first);
        CHECK(same_pixels(a.joints[k].pair.left, b.joints[k].pair.left));
      }
    }
  }
  SUBCASE("three letters chain through the middle one") {
    const auto [img, gt] = synth_subword(random_spec(5, 3, 10));
    const auto res = segment_word(img, oracle_context(gt));
    REQUIRE(res.joints.size() == 2);
    REQUIRE(res.graphemes.size() == 3);
    const auto& p0 = res.joints[0].pair;
    const auto& p1 = res.joints[1].pair;
    CHECK(same_pixels(res.graphemes[0], p0.right));
    CHECK(same_pixels(res.graphemes[1], raster_intersection(p0.left, p1.right)));
    CHECK(same_pixels(res.graphemes[2], p1.left));
    // The middle letter carries both shared parts.
    CHECK(raster_intersection(res.graphemes[1], p0.common).foreground_count() == p0.common.foreground_count());
    CHECK(raster_intersection(res.graphemes[1], p1.common).foreground_count() == p1.common.foreground_count());
    REQUIRE(res.inputs[1].has_value());
    CHECK((*res.inputs[1] - p0.cuts.input_point).norm() == 0.0);
  }
  SUBCASE("one isolated letter") {
    BinaryRaster img = testing::filled_rect(40, 60, 15, 10, 24, 50);
    WordContext ctx;
    ctx.letters = {{Letter::alef, Position::isolated}};
    const auto res = segment_word(img, ctx);
    CHECK(res.joints.empty());
    CHECK(res.isolated.size() == 1);
    CHECK(same_pixels(res.graphemes[0], img));
  }
  SUBCASE("forbidden joint drawn with no elongation") {
    SynthSpec spec;
    spec.letters = {{Archetype::tooth}, {Archetype::tooth}};
    spec.joints = {JointSpec{}};
    spec.joints[0].length_dots = 0;
    const auto [img, gt] = synth_subword(spec);
    WordContext ctx;
    ctx.letters = {{Letter::beh, Position::initial}, {Letter::hah, Position::final}};
    const auto res = segment_word(img, ctx);
    REQUIRE(res.joints.size() == 1);
    const auto& j = res.joints[0];
    REQUIRE(j.rule.has_value());
    CHECK(j.rule->kind == ElongationKind::forbidden);
    CHECK(j.band.has(Annotation::zero_length_area));
    CHECK(j.pair.cuts.input_second < j.pair.cuts.output_first);
    CHECK(testing::differing_pixels(raster_union(j.pair.left, j.pair.right), img) == 0);
    CHECK(j.pair.common.foreground_count() > 0);
  }
  SUBCASE("context errors") {
    const auto [img, gt] = synth_subword(random_spec(2, 3, 10));
    WordContext ctx = oracle_context(gt);
    ctx.letters.back().position = Position::medial;
    ctx.letters.push_back({Letter::beh, Position::final});
    CHECK(code_of([&] { segment_word(img, ctx); }) == ErrorCode::BandCountMismatch);
    CHECK(code_of([&] { segment_word(img, WordContext{}); }) == ErrorCode::InvalidArgument);
    WordContext bad = oracle_context(gt);
    bad.letters[0] = {Letter::reh, Position::initial};
    CHECK(code_of([&] { segment_word(img, bad); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { segment_word(BinaryRaster(10, 10), oracle_context(gt)); }) == ErrorCode::NoForeground);
  }
  SUBCASE("errors name the joint") {
    const auto [img, gt] = synth_subword(random_spec(2, 3, 10));
    WordContext ctx = oracle_context(gt);
    ctx.letters[1] = {Letter::reh, Position::final};
    ctx.letters[2] = {Letter::beh, Position::isolated};
    try {
      segment_word(img, ctx);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BandCountMismatch);
    }
  }
}

TEST_CASE("cut error grows with tremor on average") {
  double prev = -1;
  for (const double sigma : {0.0, 0.2, 0.4}) {
    double sum = 0;
    int n = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto [img, gt] = synth_subword(random_spec(seed, 2, 10, std::nullopt, sigma));
      try {
        const auto res = segment_word(img, oracle_context(gt));
        const auto& c = res.joints[0].pair.cuts;
        const auto& t = gt.joints[0];
        sum += 0.5 * ((c.input_point - t.input_point).norm() + (c.output_point - t.output_point).norm()) / 10;
        ++n;
      } catch (const Error&) {
      }
    }
    REQUIRE(n >= 45);
    const double mean = sum / n;
    CHECK(mean >= prev);
    prev = mean;
  }
}
