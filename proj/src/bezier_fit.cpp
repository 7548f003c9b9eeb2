#include "cursive/bezier_fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace cursive {

namespace {

using P2 = Point2<double>;

double b0(double u) { return (1 - u) * (1 - u) * (1 - u); }
double b1(double u) { return 3 * u * (1 - u) * (1 - u); }
double b2(double u) { return 3 * u * u * (1 - u); }
double b3(double u) { return u * u * u; }

class Fitter {
 public:
  Fitter(std::vector<P2> pts, double tol) : p_(std::move(pts)), tol2_(tol * tol) {}

  void fit(std::size_t first, std::size_t last, P2 t1, P2 t2, int depth = 0) {
    const std::size_t n = last - first + 1;
    if (n == 2 || depth > 40) {
      const double dist = (p_[last] - p_[first]).norm() / 3;
      out.push_back({p_[first], p_[first] + t1 * dist, p_[last] + t2 * dist, p_[last]});
      return;
    }
    std::vector<double> u = chord_params(first, last);
    CubicBezier bez = generate(first, last, u, t1, t2);
    std::size_t split = first + n / 2;
    double err = max_error(first, last, bez, u, split);
    if (err < tol2_) {
      out.push_back(bez);
      return;
    }
    if (err < 4 * tol2_) {
      for (int i = 0; i < 20; ++i) {
        reparameterize(first, last, u, bez);
        bez = generate(first, last, u, t1, t2);
        err = max_error(first, last, bez, u, split);
        if (err < tol2_) {
          out.push_back(bez);
          return;
        }
      }
    }
    P2 tc = p_[split - 1] - p_[split + 1];
    tc = tc.norm() > 1e-12 ? tc.normalized() : (p_[split - 1] - p_[split]).normalized();
    fit(first, split, t1, tc, depth + 1);
    fit(split, last, -tc, t2, depth + 1);
  }

  std::vector<CubicBezier> out;

 private:
  std::vector<double> chord_params(std::size_t first, std::size_t last) const {
    std::vector<double> u(last - first + 1, 0.0);
    for (std::size_t i = first + 1; i <= last; ++i) u[i - first] = u[i - first - 1] + (p_[i] - p_[i - 1]).norm();
    const double total = u.back();
    for (auto& v : u) v /= total;
    return u;
  }

  CubicBezier generate(std::size_t first, std::size_t last, const std::vector<double>& u, P2 t1, P2 t2) const {
    const P2 a = p_[first];
    const P2 b = p_[last];
    double c00 = 0, c01 = 0, c11 = 0, x0 = 0, x1 = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const P2 a0 = t1 * b1(u[i]);
      const P2 a1 = t2 * b2(u[i]);
      c00 += a0.dot(a0);
      c01 += a0.dot(a1);
      c11 += a1.dot(a1);
      const P2 tmp = p_[first + i] - (a * (b0(u[i]) + b1(u[i])) + b * (b2(u[i]) + b3(u[i])));
      x0 += a0.dot(tmp);
      x1 += a1.dot(tmp);
    }
    const double det = c00 * c11 - c01 * c01;
    double al = 0, ar = 0;
    if (std::abs(det) > 1e-12) {
      al = (x0 * c11 - x1 * c01) / det;
      ar = (c00 * x1 - c01 * x0) / det;
    }
    const double seg = (b - a).norm();
    const double eps = 1e-6 * seg;
    if (al < eps || ar < eps) al = ar = seg / 3;
    return {a, a + t1 * al, b + t2 * ar, b};
  }

  double max_error(std::size_t first, std::size_t last, const CubicBezier& bez, const std::vector<double>& u,
                   std::size_t& split) const {
    double worst = 0;
    split = first + (last - first + 1) / 2;
    for (std::size_t i = first + 1; i < last; ++i) {
      const double d = (bez.at(u[i - first]) - p_[i]).squaredNorm();
      if (d >= worst) {
        worst = d;
        split = i;
      }
    }
    return worst;
  }

  void reparameterize(std::size_t first, std::size_t last, std::vector<double>& u, const CubicBezier& bez) const {
    for (std::size_t i = first; i <= last; ++i) {
      double& t = u[i - first];
      const P2 q = bez.at(t) - p_[i];
      const P2 q1 = bez.d1(t);
      const P2 q2 = bez.d2(t);
      const double den = q1.dot(q1) + q.dot(q2);
      if (std::abs(den) > 1e-12) t = std::clamp(t - q.dot(q1) / den, 0.0, 1.0);
    }
  }

  std::vector<P2> p_;
  double tol2_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

}  // namespace

std::vector<CubicBezier> fit_cubic_beziers(const Contour& contour, double max_error) {
  if (!(max_error > 0)) throw Error(ErrorCode::InvalidArgument, "fit tolerance must be > 0");
  const Eigen::Index m = contour.size();
  if (m < 3) throw Error(ErrorCode::DegenerateContour, "a closed outline needs at least 3 vertices");
  // Dense loop, at most half a pixel between samples.
  std::vector<P2> pts;
  for (Eigen::Index i = 0; i < m; ++i) {
    const P2 a = contour.points.col(i);
    const P2 b = contour.points.col((i + 1) % m);
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a).norm() / 0.5)));
    for (int s = 0; s < steps; ++s) pts.push_back(a + (b - a) * (static_cast<double>(s) / steps));
  }
  const std::size_t n = pts.size();
  const std::size_t w = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(2 * max_error)));
  const auto tangent = [&](std::size_t i) {
    P2 t = pts[(i + w) % n] - pts[(i + n - w) % n];
    if (t.norm() < 1e-12) t = pts[(i + 1) % n] - pts[i];
    return P2(t.normalized());
  };
  // Four starting pieces around the loop.
  std::vector<std::size_t> breaks;
  for (std::size_t k = 0; k < 4; ++k) breaks.push_back(k * n / 4);
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<P2> loop = pts;
  loop.push_back(pts.front());
  Fitter f(loop, max_error);
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    const std::size_t a = breaks[k];
    const std::size_t b = k + 1 < breaks.size() ? breaks[k + 1] : n;
    if (b - a < 1) continue;
    f.fit(a, b, tangent(a % n), -tangent(b % n));
  }
  return f.out;
}

double max_fit_deviation(const Contour& contour, const std::vector<CubicBezier>& curve) {
  std::vector<P2> samples;
  for (const auto& c : curve)
    for (int i = 0; i <= 200; ++i) samples.push_back(c.at(i / 200.0));
  double worst = 0;
  const Eigen::Index m = contour.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    const P2 a = contour.points.col(i);
    const P2 b = contour.points.col((i + 1) % m);
    for (int s = 0; s < 4; ++s) {
      const P2 q = a + (b - a) * (s / 4.0);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : samples) best = std::min(best, (p - q).squaredNorm());
      worst = std::max(worst, std::sqrt(best));
    }
  }
  return worst;
}

std::string svg_path_data(const std::vector<std::vector<CubicBezier>>& loops) {
  std::string d;
  for (const auto& loop : loops) {
    if (loop.empty()) continue;
    if (!d.empty()) d += ' ';
    d += "M " + fmt(loop.front().p0.x()) + " " + fmt(loop.front().p0.y());
    for (const auto& c : loop)
      d += " C " + fmt(c.p1.x()) + " " + fmt(c.p1.y()) + " " + fmt(c.p2.x()) + " " + fmt(c.p2.y()) + " " +
           fmt(c.p3.x()) + " " + fmt(c.p3.y());
    d += " Z";
  }
  return d;
}

std::string grapheme_svg(const std::vector<Contour>& contours, int width, int height, double max_error) {
  std::vector<std::vector<CubicBezier>> loops;
  for (const auto& c : contours)
    if (c.size() >= 3) loops.push_back(fit_cubic_beziers(c, max_error));
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                  std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " +
                  std::to_string(height) + "\">\n";
  s += "  <path fill=\"black\" fill-rule=\"evenodd\" d=\"" + svg_path_data(loops) + "\"/>\n</svg>\n";
  return s;
}

}  // namespace cursive
