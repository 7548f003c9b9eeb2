#include "cursive/tracing.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace cursive {

namespace {

struct Dir {
  int dx;
  int dy;
};

// Side bit of the ink pixel lying left of an edge walked in direction d.
int side_bit(Dir d) {
  if (d.dx == 1) return 0;   // top
  if (d.dy == 1) return 1;   // right
  if (d.dx == -1) return 2;  // bottom
  return 3;                  // left
}

Dir turn_right(Dir d) { return {d.dy, -d.dx}; }
Dir turn_left(Dir d) { return {-d.dy, d.dx}; }

// Pixel whose centre is v + (d +/- n) / 2 with n the left normal of d.
Pixel left_pixel(int vx, int vy, Dir d) {
  const Dir n = turn_left(d);
  return {static_cast<int>(std::floor(vx + 0.5 * (d.dx + n.dx))),
          static_cast<int>(std::floor(vy + 0.5 * (d.dy + n.dy)))};
}
Pixel right_pixel(int vx, int vy, Dir d) {
  const Dir n = turn_left(d);
  return {static_cast<int>(std::floor(vx + 0.5 * (d.dx - n.dx))),
          static_cast<int>(std::floor(vy + 0.5 * (d.dy - n.dy)))};
}

}  // namespace

std::vector<Contour> trace_boundary(const BinaryRaster& img) {
  if (img.empty() || img.foreground_count() == 0)
    throw Error(ErrorCode::NoForeground, "image has no ink");
  const int w = img.width();
  const int h = img.height();
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
  const auto is_edge = [&](int vx, int vy, Dir d) {
    const Pixel l = left_pixel(vx, vy, d);
    const Pixel r = right_pixel(vx, vy, d);
    return img.at(l.x, l.y) && !img.at(r.x, r.y);
  };
  const auto mark = [&](int vx, int vy, Dir d) -> bool {
    const Pixel l = left_pixel(vx, vy, d);
    auto& v = visited[static_cast<std::size_t>(l.y) * w + l.x];
    const auto bit = static_cast<std::uint8_t>(1U << side_bit(d));
    const bool seen = (v & bit) != 0;
    v |= bit;
    return seen;
  };

  std::vector<Contour> out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!img.at(x, y) || img.at(x, y - 1)) continue;
      if (visited[static_cast<std::size_t>(y) * w + x] & 1U) continue;

      // Walk crack edges keeping ink on the left. At a saddle corner the
      // right-most turn is taken first, which keeps diagonal neighbours in
      // one boundary (8-connected ink).
      const int sx = x;
      const int sy = y;
      const Dir sd{1, 0};
      int vx = sx;
      int vy = sy;
      Dir d = sd;
      std::vector<Eigen::Vector2d> corners;
      Dir prev{0, 0};
      const std::size_t limit = 4 * static_cast<std::size_t>(w + 1) * (h + 1);
      for (std::size_t step = 0;; ++step) {
        if (step > limit) throw Error(ErrorCode::DegenerateContour, "boundary walk did not close");
        mark(vx, vy, d);
        if (d.dx != prev.dx || d.dy != prev.dy) corners.emplace_back(vx, vy);
        prev = d;
        vx += d.dx;
        vy += d.dy;
        Dir next = turn_right(d);
        if (!is_edge(vx, vy, next)) {
          next = d;
          if (!is_edge(vx, vy, next)) next = turn_left(d);
        }
        d = next;
        // Jacob-style stop: back on the starting edge, heading the same way.
        if (vx == sx && vy == sy && d.dx == sd.dx && d.dy == sd.dy) break;
      }
      Contour c;
      c.closed = true;
      c.points.resize(2, static_cast<Eigen::Index>(corners.size()));
      for (std::size_t i = 0; i < corners.size(); ++i)
        c.points.col(static_cast<Eigen::Index>(i)) = corners[i];
      out.push_back(std::move(c));
    }
  }
  return out;
}

// Felzenszwalb-Huttenlocher lower envelope, squared distances.
namespace {

void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    if (s <= z[k]) {
      v[k] = q;
      z[k] = -inf;
    } else {
      ++k;
      v[k] = q;
      z[k] = s;
    }
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double diff = q - v[j];
    d[q] = diff * diff + f[v[j]];
  }
}

}  // namespace

Eigen::ArrayXXd distance_transform(const Mask& target) {
  const auto rows = static_cast<int>(target.rows());
  const auto cols = static_cast<int>(target.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();
  Eigen::ArrayXXd g(rows, cols);
  const int n = std::max(rows, cols);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < cols; ++x) {
    f.assign(rows, 0.0);
    d.assign(rows, 0.0);
    for (int y = 0; y < rows; ++y) f[y] = target(y, x) ? 0.0 : inf;
    edt_1d(f, d, v, z);
    for (int y = 0; y < rows; ++y) g(y, x) = d[y];
  }
  for (int y = 0; y < rows; ++y) {
    f.assign(cols, 0.0);
    d.assign(cols, 0.0);
    for (int x = 0; x < cols; ++x) f[x] = g(y, x);
    edt_1d(f, d, v, z);
    for (int x = 0; x < cols; ++x) g(y, x) = d[x];
  }
  return g.sqrt();
}

Eigen::ArrayXXd signed_distance(const BinaryRaster& img) {
  const Mask ink = (img.bits() != 0).cast<std::uint8_t>();
  const Mask background = (img.bits() == 0).cast<std::uint8_t>();
  const Eigen::ArrayXXd to_bg = distance_transform(background);
  const Eigen::ArrayXXd to_ink = distance_transform(ink);
  Eigen::ArrayXXd sd(img.height(), img.width());
  const double big = static_cast<double>(img.width() + img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (img.at(x, y)) {
        // The image border counts as background.
        const double border = std::min({x + 1.0, y + 1.0, double(img.width() - x),
                                        double(img.height() - y)});
        sd(y, x) = std::min({to_bg(y, x), border, big}) - 0.5;
      } else {
        sd(y, x) = -(std::min(to_ink(y, x), big) - 0.5);
      }
    }
  return sd;
}

double sample_bilinear(const Eigen::ArrayXXd& field, double x, double y) {
  const double fx = std::clamp(x - 0.5, 0.0, static_cast<double>(field.cols() - 1));
  const double fy = std::clamp(y - 0.5, 0.0, static_cast<double>(field.rows() - 1));
  const auto x0 = static_cast<Eigen::Index>(std::floor(fx));
  const auto y0 = static_cast<Eigen::Index>(std::floor(fy));
  const auto x1 = std::min<Eigen::Index>(x0 + 1, field.cols() - 1);
  const auto y1 = std::min<Eigen::Index>(y0 + 1, field.rows() - 1);
  const double u = fx - static_cast<double>(x0);
  const double v = fy - static_cast<double>(y0);
  return (1 - u) * (1 - v) * field(y0, x0) + u * (1 - v) * field(y0, x1) +
         (1 - u) * v * field(y1, x0) + u * v * field(y1, x1);
}

Contour refine_active_contour(const Contour& c, const BinaryRaster& img, int iterations,
                              double alpha, double beta, const ActiveContourOptions& opts) {
  if (iterations < 0 || alpha < 0 || beta < 0)
    throw Error(ErrorCode::InvalidArgument, "iterations, alpha and beta must be >= 0");
  if (iterations == 0 || c.size() < 3) return c;
  const Eigen::Index n = c.size();

  // Pentadiagonal cyclic stiffness matrix of the discrete snake energy.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  const double k0 = 2 * alpha + 6 * beta;
  const double k1 = -alpha - 4 * beta;
  const double k2 = beta;
  const auto wrap = [n](Eigen::Index i) { return ((i % n) + n) % n; };
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) += k0;
    a(i, wrap(i - 1)) += k1;
    a(i, wrap(i + 1)) += k1;
    a(i, wrap(i - 2)) += k2;
    a(i, wrap(i + 2)) += k2;
  }
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) + opts.step * a;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);

  const Eigen::ArrayXXd sd = signed_distance(img);
  Eigen::MatrixXd x = c.points.row(0).transpose();
  Eigen::MatrixXd y = c.points.row(1).transpose();
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd fx(n), fy(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      // Gradient of sd^2 / 2 by central differences on the sampled field.
      const double px = x(i);
      const double py = y(i);
      const double s = sample_bilinear(sd, px, py);
      const double gx = (sample_bilinear(sd, px + 0.5, py) - sample_bilinear(sd, px - 0.5, py));
      const double gy = (sample_bilinear(sd, px, py + 0.5) - sample_bilinear(sd, px, py - 0.5));
      const double gn = std::hypot(gx, gy);
      fx(i) = gn > 1e-9 ? -opts.external_weight * s * gx / gn : 0.0;
      fy(i) = gn > 1e-9 ? -opts.external_weight * s * gy / gn : 0.0;
    }
    x = lu.solve(x + opts.step * fx);
    y = lu.solve(y + opts.step * fy);
  }
  Contour out{Polyline<double>(2, n), true};
  out.points.row(0) = x.transpose();
  out.points.row(1) = y.transpose();
  return out;
}

}  // namespace cursive
