#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "cursive/context_model.hpp"
#include "cursive/contour.hpp"
#include "cursive/raster.hpp"
#include "cursive/synth.hpp"

namespace testing {

using cursive::BinaryRaster;
using cursive::Contour;
using cursive::Polyline;

inline BinaryRaster filled_rect(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryRaster r(w, h);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) r.set(x, y);
  return r;
}

/// Random blobby raster: a few filled discs and bars, plus sparse specks.
inline BinaryRaster random_raster(std::uint64_t seed, int w = 40, int h = 30) {
  cursive::Rng rng(seed);
  BinaryRaster r(w, h);
  const int shapes = 1 + static_cast<int>(rng.uniform() * 5);
  for (int s = 0; s < shapes; ++s) {
    const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
    if (rng.uniform() < 0.5) {
      const double rad = rng.uniform(1, 7);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (std::hypot(x + 0.5 - cx, y + 0.5 - cy) < rad) r.set(x, y);
    } else {
      const int bw = 1 + static_cast<int>(rng.uniform() * 15), bh = 1 + static_cast<int>(rng.uniform() * 4);
      for (int y = 0; y < bh; ++y)
        for (int x = 0; x < bw; ++x) r.set(static_cast<int>(cx) + x, static_cast<int>(cy) + y);
    }
  }
  const int specks = static_cast<int>(rng.uniform() * 8);
  for (int s = 0; s < specks; ++s) r.set(static_cast<int>(rng.uniform() * w), static_cast<int>(rng.uniform() * h));
  return r;
}

/// Independent component count by iterative flood fill.
inline int flood_count(const BinaryRaster& r, int connectivity) {
  std::vector<char> seen(static_cast<std::size_t>(r.width() * r.height()), 0);
  int count = 0;
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x) {
      if (!r.at(x, y) || seen[static_cast<std::size_t>(y * r.width() + x)]) continue;
      ++count;
      std::vector<std::pair<int, int>> stack{{x, y}};
      seen[static_cast<std::size_t>(y * r.width() + x)] = 1;
      while (!stack.empty()) {
        auto [px, py] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx == 0 && dy == 0) || (connectivity == 4 && dx != 0 && dy != 0)) continue;
            const int nx = px + dx, ny = py + dy;
            if (!r.at(nx, ny) || seen[static_cast<std::size_t>(ny * r.width() + nx)]) continue;
            seen[static_cast<std::size_t>(ny * r.width() + nx)] = 1;
            stack.push_back({nx, ny});
          }
      }
    }
  return count;
}

/// Closed polygon on a circle, counterclockwise in image coordinates
/// (positive shoelace area with y down).
inline Contour circle(double r, int n, double cx = 0, double cy = 0) {
  Contour c{Polyline<double>(2, n), true};
  for (int i = 0; i < n; ++i) {
    const double a = 2 * std::numbers::pi * i / n;
    c.points.col(i) << cx + r * std::cos(a), cy + r * std::sin(a);
  }
  return c;
}

inline Contour polygon(std::initializer_list<std::pair<double, double>> pts, bool closed = true) {
  Contour c{Polyline<double>(2, static_cast<Eigen::Index>(pts.size())), closed};
  Eigen::Index i = 0;
  for (auto [x, y] : pts) c.points.col(i++) << x, y;
  return c;
}

inline std::size_t differing_pixels(const BinaryRaster& a, const BinaryRaster& b) {
  return static_cast<std::size_t>((a.bits() != b.bits()).count());
}

/// Letters for an oracle subword: teeth read as beh, bowls as meem and
/// stacked teeth as hah, so a tooth followed by a stacked one is a forbidden
/// (zero-length) joint.
inline std::vector<cursive::LetterId> oracle_letters(const cursive::GroundTruth& gt) {
  using cursive::Letter;
  using cursive::Position;
  std::vector<cursive::LetterId> out;
  const std::size_t n = gt.letters.size();
  for (std::size_t i = 0; i < n; ++i) {
    Letter l = Letter::beh;
    if (gt.letters[i].kind == cursive::Archetype::bowl) l = Letter::meem;
    if (gt.letters[i].kind == cursive::Archetype::stacked) l = Letter::hah;
    Position p = Position::medial;
    if (n == 1) p = Position::isolated;
    else if (i == 0) p = Position::initial;
    else if (i + 1 == n) p = Position::final;
    out.push_back({l, p});
  }
  return out;
}

}  // namespace testing
