#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "cursive/error.hpp"

namespace cursive {

/// Row-major ink mask, indexed (y, x). Nonzero = foreground.
using Mask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Pixel (x, y) covers [x, x+1) x [y, y+1) in continuous image coordinates,
/// so its centre sits at (x + 0.5, y + 0.5). y grows downward.
struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

class BinaryRaster {
 public:
  BinaryRaster() = default;
  BinaryRaster(int width, int height, std::optional<double> dot_px = std::nullopt);
  BinaryRaster(Mask bits, std::optional<double> dot_px = std::nullopt);

  int width() const noexcept { return static_cast<int>(bits_.cols()); }
  int height() const noexcept { return static_cast<int>(bits_.rows()); }
  bool empty() const noexcept { return bits_.size() == 0; }

  bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width() && y < height();
  }
  /// Out-of-bounds reads are background.
  bool at(int x, int y) const noexcept { return in_bounds(x, y) && bits_(y, x) != 0; }
  void set(int x, int y, bool ink = true) {
    if (in_bounds(x, y)) bits_(y, x) = ink ? 1 : 0;
  }

  const Mask& bits() const noexcept { return bits_; }
  Mask& bits() noexcept { return bits_; }

  std::optional<double> dot_px() const noexcept { return dot_px_; }
  void set_dot_px(std::optional<double> dot);
  /// dot_px or InvalidArgument when it is unknown.
  double require_dot() const;

  std::size_t foreground_count() const;

  friend bool operator==(const BinaryRaster& a, const BinaryRaster& b) {
    return a.bits_.rows() == b.bits_.rows() && a.bits_.cols() == b.bits_.cols() &&
           (a.bits_ == b.bits_).all() && a.dot_px_ == b.dot_px_;
  }

 private:
  Mask bits_;
  std::optional<double> dot_px_;
};

/// Pixelwise set operations on equally-sized rasters. dot_px comes from `a`.
BinaryRaster raster_union(const BinaryRaster& a, const BinaryRaster& b);
BinaryRaster raster_intersection(const BinaryRaster& a, const BinaryRaster& b);
bool same_pixels(const BinaryRaster& a, const BinaryRaster& b);

/// Reads PBM (P1/P4) and PGM (P2/P5). PBM bit 1 is ink; for PGM a pixel is
/// ink when its value, rescaled to 0..255, is below `threshold`.
BinaryRaster load_raster(const std::filesystem::path& path, int threshold = 128);
BinaryRaster decode_pnm(const std::vector<std::uint8_t>& bytes, int threshold = 128);

/// Writes binary PBM (P4).
std::vector<std::uint8_t> encode_pbm(const BinaryRaster& img);
void save_pbm(const BinaryRaster& img, const std::filesystem::path& path);

enum class RoleHint { subword, dot_mark, diacritic, unknown };

struct Component {
  std::vector<Pixel> pixels;  // sorted by (y, x)
  std::array<int, 4> bbox{};  // x0, y0, x1, y1 inclusive
  std::size_t area = 0;
  RoleHint role_hint = RoleHint::unknown;

  /// The component alone on a raster of the given size.
  BinaryRaster to_raster(int width, int height, std::optional<double> dot_px = std::nullopt) const;
};

/// Components sorted right-to-left by bbox max-x, ties by min-y then min-x.
/// With a known dot unit, components smaller than 4 dot^2 are dot marks.
std::vector<Component> connected_components(const BinaryRaster& img, int connectivity = 8);

/// Bounding box of the ink, or nullopt for an empty raster.
std::optional<std::array<int, 4>> ink_bbox(const BinaryRaster& img);

const char* role_name(RoleHint role);

}  // namespace cursive
