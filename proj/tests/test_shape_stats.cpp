#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cursive/segmentation.hpp"
#include "cursive/shape_stats.hpp"
#include "cursive/synth.hpp"
#include "cursive/tracing.hpp"
#include "support.hpp"

using namespace cursive;
using Shape = LandmarkShape<double>;

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

Shape rotated(const Shape& s, double deg) {
  const double a = deg * std::numbers::pi / 180;
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r * s;
}

Shape centred_unit(const Shape& s) {
  Shape c = s.colwise() - s.rowwise().mean();
  return c / c.norm();
}

// Residual between centred unit shapes minimised over a rotation grid, then
// refined by ternary search inside the best cell.
std::pair<double, double> brute_rotation(const Shape& a, const Shape& b, double step_deg) {
  const Shape na = centred_unit(a), nb = centred_unit(b);
  const auto resid = [&](double deg) { return (na - rotated(nb, deg)).norm(); };
  double best = 0, best_r = resid(0);
  for (double deg = step_deg; deg < 360; deg += step_deg)
    if (const double r = resid(deg); r < best_r) {
      best_r = r;
      best = deg;
    }
  double lo = best - step_deg, hi = best + step_deg;
  for (int i = 0; i < 200; ++i) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    (resid(m1) < resid(m2) ? hi : lo) = (resid(m1) < resid(m2) ? m2 : m1);
  }
  const double deg = 0.5 * (lo + hi);
  return {deg, resid(deg)};
}

Shape random_shape(std::uint64_t seed, int k) {
  Rng rng(seed);
  Shape s(2, k);
  for (int i = 0; i < k; ++i) s.col(i) << rng.uniform(-5, 5), rng.uniform(-5, 5);
  return s;
}

Shape oracle_landmarks(std::uint64_t seed, int k) {
  const auto [img, gt] = synth_subword(random_spec(seed, 1, 10));
  const auto outlines = trace_boundary(gt.letters[0].grapheme);
  const Contour* outer = &outlines.front();
  for (const auto& c : outlines)
    if (signed_area(c) > signed_area(*outer)) outer = &c;
  return resample_arclength(*outer, k);
}

BinaryRaster upscale(const BinaryRaster& r, int f) {
  BinaryRaster out(r.width() * f, r.height() * f);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out.set(x, y, r.at(x / f, y / f));
  return out;
}

Component component_of(const BinaryRaster& r) {
  auto cs = connected_components(r);
  REQUIRE(cs.size() == 1);
  return cs.front();
}

}  // namespace

TEST_CASE("procrustes alignment") {
  const Shape sq = (Shape(2, 4) << 0, 1, 1, 0, 0, 0, 1, 1).finished();
  SUBCASE("a shape against itself") {
    const auto fit = procrustes_align(sq, sq);
    CHECK(fit.distance < 1e-12);
    CHECK(std::abs(fit.transform.scale - 1) < 1e-12);
    CHECK(std::abs(fit.transform.angle) < 1e-12);
    CHECK(fit.transform.translation.norm() < 1e-12);
  }
  SUBCASE("similarity copies are at distance zero") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const Shape a = random_shape(seed, 3 + static_cast<int>(seed % 10));
      Rng rng(seed + 100);
      const double deg = rng.uniform(-180, 180), s = rng.uniform(0.2, 5);
      const Eigen::Vector2d t(rng.uniform(-50, 50), rng.uniform(-50, 50));
      const Shape b = (s * rotated(a, deg)).colwise() + t;
      const auto fit = procrustes_align(a, b);
      CHECK(fit.distance < 1e-9);
      CHECK((fit.transform.apply(b) - a).norm() < 1e-9 * a.norm());
    }
    const Shape b = (2.5 * rotated(sq, 37)).colwise() + Eigen::Vector2d(3, -7);
    CHECK(procrustes_distance(sq, b) < 1e-9);
  }
  SUBCASE("displaced corner matches a grid search") {
    Shape moved = sq;
    moved(0, 2) += 0.1;
    const double d = procrustes_distance(sq, moved);
    CHECK(d > 0.01);
    CHECK(std::abs(d - brute_rotation(sq, moved, 0.01).second) < 1e-4);
  }
  SUBCASE("distance is symmetric and bounded") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const int k = 3 + static_cast<int>(seed % 8);
      const Shape a = random_shape(seed, k), b = random_shape(seed + 1000, k);
      const double ab = procrustes_distance(a, b);
      CHECK(std::abs(ab - procrustes_distance(b, a)) < 1e-9);
      CHECK(ab >= 0);
      CHECK(ab <= 2);
      CHECK(std::abs(ab - brute_rotation(a, b, 0.5).second) < 1e-6);
    }
  }
  SUBCASE("reflections are not undone") {
    const Shape l = (Shape(2, 3) << 0, 2, 0, 0, 0, 1).finished();
    Shape lm = l;
    lm.row(0) *= -1;
    CHECK(procrustes_distance(l, lm) > 0.1);
  }
  SUBCASE("errors") {
    CHECK(code_of([&] { procrustes_align(sq, Shape(sq.leftCols(3))); }) == ErrorCode::MismatchedLandmarkCount);
    const Shape flat = Shape::Ones(2, 4);
    CHECK(code_of([&] { procrustes_align(sq, flat); }) == ErrorCode::DegenerateShape);
    CHECK(code_of([&] { procrustes_align(Shape(sq.leftCols(2)), Shape(sq.leftCols(2))); }) ==
          ErrorCode::DegenerateShape);
  }
}

TEST_CASE("procrustes mean") {
  SUBCASE("copies of one shape") {
    const Shape s = oracle_landmarks(1, 24);
    const std::vector<Shape> copies(7, s);
    const auto m = procrustes_mean(copies);
    CHECK(m.converged);
    CHECK(m.iterations == 1);
    CHECK((m.mean - centred_unit(s)).norm() < 1e-8);
    CHECK(std::abs(m.mean.norm() - 1) < 1e-12);
  }
  SUBCASE("two mirror images") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Shape a = random_shape(seed, 6);
      Shape b = a;
      b.row(0) *= -1;
      const auto m = procrustes_mean(std::vector<Shape>{a, b});
      REQUIRE(m.converged);
      const double deg = brute_rotation(a, b, 0.01).first;
      const Shape direct = centred_unit(centred_unit(a) + rotated(centred_unit(b), deg));
      CHECK(procrustes_distance(m.mean, direct) < 1e-6);
    }
  }
  SUBCASE("mean of perturbed copies is close to the base") {
    const int k = 32;
    const Shape base = oracle_landmarks(7, k);
    const Shape nb = centred_unit(base);
    for (const double sigma : {0.02, 0.05, 0.1}) {
      Rng rng(static_cast<std::uint64_t>(sigma * 1000));
      std::vector<Shape> noisy;
      for (int i = 0; i < 50; ++i) {
        Shape e(2, k);
        for (int j = 0; j < k; ++j) e.col(j) << rng.normal(), rng.normal();
        // Noise of Procrustes size sigma, then an arbitrary pose.
        const Shape p = nb + sigma * e / std::sqrt(2.0 * k);
        noisy.push_back((rng.uniform(0.5, 3) * rotated(p, rng.uniform(-180, 180))).colwise() +
                        Eigen::Vector2d(rng.uniform(-20, 20), 0));
      }
      const auto m = procrustes_mean(noisy);
      CHECK(m.converged);
      CHECK(procrustes_distance(m.mean, base) < sigma / 2);
    }
  }
  SUBCASE("errors and flags") {
    CHECK(code_of([] { procrustes_mean(std::vector<Shape>{}); }) == ErrorCode::NoShapes);
    CHECK(code_of([] { procrustes_mean(std::vector<Shape>{random_shape(1, 4), random_shape(2, 5)}); }) ==
          ErrorCode::MismatchedLandmarkCount);
    std::vector<Shape> many;
    for (std::uint64_t s = 0; s < 10; ++s) many.push_back(random_shape(s, 8));
    const auto m = procrustes_mean(many, 1e-30, 1);
    CHECK_FALSE(m.converged);
    CHECK(m.iterations == 1);
  }
}

TEST_CASE("variability report") {
  SUBCASE("coefficient of variation") {
    CHECK(coefficient_of_variation({2, 2, 2}) == 0);
    // mean 2, sample std 1
    CHECK(std::abs(coefficient_of_variation({1, 2, 3}) - 50) < 1e-12);
  }
  SUBCASE("identical instances") {
    std::vector<VariabilitySample> s(5, VariabilitySample{ShapeClass::concave, 7, 1});
    const auto r = variability_report(s);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].size_variability == 0);
    CHECK(r.rows[0].thickness_variability == 0);
    CHECK(r.rows[0].n_instances == 5);
  }
  SUBCASE("classes with one instance are left out") {
    const auto r = variability_report(std::vector<VariabilitySample>{
        {ShapeClass::linear, 3, 1}, {ShapeClass::laying, 8, 1}, {ShapeClass::laying, 9, 1.1}});
    CHECK(r.find(ShapeClass::linear) == nullptr);
    REQUIRE(r.find(ShapeClass::laying) != nullptr);
    CHECK(r.find(ShapeClass::laying)->size_variability > 0);
  }
  SUBCASE("length noise above thickness noise shows in the report") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      std::vector<VariabilitySample> s;
      for (const auto cls : kAllShapeClasses)
        for (int i = 0; i < 30; ++i)
          s.push_back({cls, 6 * (1 + 0.2 * rng.normal()), 1 * (1 + 0.1 * rng.normal())});
      const auto r = variability_report(s);
      REQUIRE(r.rows.size() == 5);
      for (const auto& row : r.rows) {
        CHECK(row.size_variability > row.thickness_variability);
        CHECK(row.thickness_variability >= 0);
      }
    }
  }
  SUBCASE("bands") {
    std::vector<CursiveBand> bands;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      auto [img, gt] = synth_subword(random_spec(seed, 2, 10, ShapeClass::linear));
      img.set_dot_px(10);
      auto b = locate_cursive_bands(img, 2, gt.baseline_y)[0];
      b.shape = ShapeClass::linear;
      bands.push_back(b);
    }
    const auto r = variability_report(bands);
    REQUIRE(r.find(ShapeClass::linear) != nullptr);
    CHECK(r.find(ShapeClass::linear)->n_instances == 6);
    CHECK(r.find(ShapeClass::linear)->size_variability > 0);
  }
}

TEST_CASE("diacritic frame") {
  SUBCASE("square with its input at the lower right corner") {
    const auto g = testing::filled_rect(60, 60, 10, 20, 29, 49);  // 20 x 30
    const auto f = diacritic_frame(g, Point2<double>(30, 50), 50);
    CHECK(f.origin == Point2<double>(30, 50));
    CHECK(f.unit == Point2<double>(20, 30));
    CHECK(std::abs(f.x_axis.dot(f.y_axis)) < 1e-12);
    CHECK(std::abs(f.x_axis.norm() - 1) < 1e-12);
    CHECK(std::abs(f.y_axis.norm() - 1) < 1e-12);
  }
  SUBCASE("translation moves the origin only") {
    const auto g = testing::filled_rect(60, 60, 10, 20, 29, 49);
    const auto h = testing::filled_rect(80, 80, 17, 31, 36, 60);
    const auto f = diacritic_frame(g, Point2<double>(25, 40), 50);
    const auto t = diacritic_frame(h, Point2<double>(32, 51), 61);
    CHECK(t.origin - f.origin == Point2<double>(7, 11));
    CHECK(t.unit == f.unit);
  }
  SUBCASE("dot-sized pieces do not widen the unit") {
    auto g = testing::filled_rect(100, 100, 10, 20, 49, 49);
    for (int y = 5; y < 10; ++y)
      for (int x = 60; x < 65; ++x) g.set(x, y);
    g.set_dot_px(10);
    CHECK(diacritic_frame(g, Point2<double>(50, 50), 50).unit == Point2<double>(40, 30));
  }
  SUBCASE("no input point") {
    CHECK(code_of([] { diacritic_frame(testing::filled_rect(5, 5, 0, 0, 4, 4), std::nullopt, 4); }) ==
          ErrorCode::MissingInputPoint);
  }
  SUBCASE("engine frame against the oracle frame") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto [img, gt] = synth_subword(random_spec(seed, 2 + static_cast<int>(seed % 2), 10));
      WordContext ctx;
      ctx.letters = testing::oracle_letters(gt);
      const auto res = segment_word(img, ctx);
      for (std::size_t i = 0; i < gt.letters.size(); ++i) {
        if (!res.inputs[i]) continue;
        ++checked;
        const auto f = diacritic_frame(res.graphemes[i], res.inputs[i], res.baseline_y);
        CHECK((f.origin - gt.letters[i].frame_origin).norm() <= 0.5 * 10);
      }
    }
    CHECK(checked >= 20);
  }
}

TEST_CASE("diacritic coordinates") {
  DiacriticFrame f;
  f.origin = Point2<double>(200, 100);
  f.unit = Point2<double>(100, 50);
  SUBCASE("one pixel at the origin") {
    BinaryRaster r(300, 200);
    r.set(199, 99);
    const auto c = diacritic_coords(f, component_of(r));
    CHECK(std::abs(c.x) <= 0.01);
    CHECK(std::abs(c.y) <= 0.02);
    CHECK(std::abs(c.extent) <= 0.01);
  }
  SUBCASE("horizontal bar above the baseline") {
    const int x0 = 40, len = 24;
    BinaryRaster r(300, 200);
    for (int x = 200 - x0 - len / 2; x < 200 - x0 + len / 2; ++x)
      for (int y = 68; y < 72; ++y) r.set(x, y);
    const auto c = diacritic_coords(f, component_of(r));
    CHECK(c.x == doctest::Approx(static_cast<double>(x0) / 100).epsilon(1e-12));
    CHECK(c.extent == doctest::Approx(static_cast<double>(len) / 100).epsilon(1e-12));
    CHECK(c.y == doctest::Approx(30.0 / 50).epsilon(1e-12));
  }
  SUBCASE("common translation and scaling leave coordinates alone") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const int gx = 20 + static_cast<int>(rng.uniform() * 20), gw = 10 + static_cast<int>(rng.uniform() * 20);
      const auto g = testing::filled_rect(120, 100, gx, 50, gx + gw, 69);
      BinaryRaster m(120, 100);
      const int mx = static_cast<int>(rng.uniform() * 60), my = 10 + static_cast<int>(rng.uniform() * 20);
      for (int x = mx; x < mx + 8; ++x)
        for (int y = my; y < my + 3 + static_cast<int>(seed % 3); ++y) m.set(x, y);
      const Point2<double> in(gx + gw + 1, 70);
      const auto ref = diacritic_coords(diacritic_frame(g, in, 70), component_of(m));
      const int f2 = 2 + static_cast<int>(seed % 2);
      const auto big = diacritic_coords(diacritic_frame(upscale(g, f2), in * f2, 70.0 * f2), component_of(upscale(m, f2)));
      CHECK(big.x == doctest::Approx(ref.x).epsilon(1e-9));
      CHECK(big.y == doctest::Approx(ref.y).epsilon(1e-9));
      CHECK(big.extent == doctest::Approx(ref.extent).epsilon(1e-9));
      BinaryRaster gs(150, 130), ms(150, 130);
      for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 120; ++x) {
          gs.set(x + 13, y + 21, g.at(x, y));
          ms.set(x + 13, y + 21, m.at(x, y));
        }
      const auto moved = diacritic_coords(diacritic_frame(gs, in + Point2<double>(13, 21), 91), component_of(ms));
      CHECK(moved.x == doctest::Approx(ref.x).epsilon(1e-12));
      CHECK(moved.y == doctest::Approx(ref.y).epsilon(1e-12));
      CHECK(moved.extent == doctest::Approx(ref.extent).epsilon(1e-12));
    }
  }
  SUBCASE("oracle fatha") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto spec = random_spec(seed, 2, 10);
      Rng rng(seed + 7);
      spec.marks = {{static_cast<int>(seed % 2), MarkKind::fatha, rng.uniform(0.2, 0.8), rng.uniform(1.1, 1.6)}};
      const auto [img, gt] = synth_subword(spec);
      REQUIRE(gt.marks.size() == 1);
      const auto& mt = gt.marks[0];
      const auto& lt = gt.letters[static_cast<std::size_t>(mt.letter)];
      DiacriticFrame f;
      f.origin = lt.frame_origin;
      f.unit = lt.frame_unit;
      std::optional<Component> mark;
      for (auto& c : connected_components(img))
        if (c.bbox[0] <= mt.center.x() && mt.center.x() <= c.bbox[2] + 1 && c.bbox[1] <= mt.center.y() &&
            mt.center.y() <= c.bbox[3] + 1 && c.area < 400)
          mark = c;
      REQUIRE(mark.has_value());
      const auto c = diacritic_coords(f, *mark);
      CHECK(std::abs(c.x - mt.x_units) <= 0.05);
      CHECK(std::abs(c.y - mt.y_units) <= 0.05);
    }
  }
}
