#include "cursive/raster.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

namespace cursive {

BinaryRaster::BinaryRaster(int width, int height, std::optional<double> dot_px) {
  if (width < 1 || height < 1)
    throw Error(ErrorCode::EmptyImage, "raster dimensions must be positive");
  bits_ = Mask::Zero(height, width);
  set_dot_px(dot_px);
}

BinaryRaster::BinaryRaster(Mask bits, std::optional<double> dot_px) : bits_(std::move(bits)) {
  if (bits_.rows() < 1 || bits_.cols() < 1)
    throw Error(ErrorCode::EmptyImage, "raster dimensions must be positive");
  set_dot_px(dot_px);
}

void BinaryRaster::set_dot_px(std::optional<double> dot) {
  if (dot && !(*dot > 0.0)) throw Error(ErrorCode::InvalidArgument, "dot_px must be positive");
  dot_px_ = dot;
}

double BinaryRaster::require_dot() const {
  if (!dot_px_) throw Error(ErrorCode::InvalidArgument, "dot unit unknown for raster");
  return *dot_px_;
}

std::size_t BinaryRaster::foreground_count() const {
  return static_cast<std::size_t>((bits_ != 0).count());
}

namespace {

void require_same_size(const BinaryRaster& a, const BinaryRaster& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw Error(ErrorCode::InvalidArgument, "raster sizes differ");
}

}  // namespace

BinaryRaster raster_union(const BinaryRaster& a, const BinaryRaster& b) {
  require_same_size(a, b);
  Mask m = ((a.bits() != 0) || (b.bits() != 0)).cast<std::uint8_t>();
  return BinaryRaster(std::move(m), a.dot_px());
}

BinaryRaster raster_intersection(const BinaryRaster& a, const BinaryRaster& b) {
  require_same_size(a, b);
  Mask m = ((a.bits() != 0) && (b.bits() != 0)).cast<std::uint8_t>();
  return BinaryRaster(std::move(m), a.dot_px());
}

bool same_pixels(const BinaryRaster& a, const BinaryRaster& b) {
  return a.width() == b.width() && a.height() == b.height() &&
         ((a.bits() != 0) == (b.bits() != 0)).all();
}

// --- PNM -------------------------------------------------------------------

namespace {

class PnmReader {
 public:
  explicit PnmReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  // Header token: skips whitespace and '#' comments.
  long number() {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      throw Error(ErrorCode::UnsupportedFormat, "malformed PNM header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1L << 30)) throw Error(ErrorCode::UnsupportedFormat, "PNM header value too large");
    }
    return v;
  }

  // Plain-PBM pixels may be packed without separators.
  int bit() {
    skip_space();
    if (pos_ >= bytes_.size()) throw Error(ErrorCode::UnsupportedFormat, "truncated PBM data");
    const auto c = bytes_[pos_++];
    if (c != '0' && c != '1') throw Error(ErrorCode::UnsupportedFormat, "bad PBM pixel");
    return c - '0';
  }

  // Exactly one whitespace byte separates the header from binary data.
  void end_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw Error(ErrorCode::UnsupportedFormat, "malformed PNM header");
    ++pos_;
  }

  std::uint8_t byte() {
    if (pos_ >= bytes_.size()) throw Error(ErrorCode::UnsupportedFormat, "truncated PNM data");
    return bytes_[pos_++];
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

BinaryRaster decode_pnm(const std::vector<std::uint8_t>& bytes, int threshold) {
  if (bytes.size() < 2 || bytes[0] != 'P')
    throw Error(ErrorCode::UnsupportedFormat, "not a PBM/PGM file");
  const char kind = static_cast<char>(bytes[1]);
  if (kind != '1' && kind != '2' && kind != '4' && kind != '5')
    throw Error(ErrorCode::UnsupportedFormat, std::string("unsupported PNM type P") + kind);

  PnmReader in(bytes);
  const long w = in.number();
  const long h = in.number();
  if (w == 0 || h == 0) throw Error(ErrorCode::EmptyImage, "image has zero dimensions");
  const bool gray = kind == '2' || kind == '5';
  long maxval = 1;
  if (gray) {
    maxval = in.number();
    if (maxval < 1 || maxval > 65535) throw Error(ErrorCode::UnsupportedFormat, "bad PGM maxval");
  }

  BinaryRaster img(static_cast<int>(w), static_cast<int>(h));
  auto& bits = img.bits();
  const auto ink_gray = [&](long v) {
    if (v > maxval) throw Error(ErrorCode::UnsupportedFormat, "PGM value exceeds maxval");
    return static_cast<double>(v) * 255.0 / static_cast<double>(maxval) < threshold;
  };

  switch (kind) {
    case '1':
      for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) bits(y, x) = static_cast<std::uint8_t>(in.bit());
      break;
    case '4': {
      in.end_header();
      for (long y = 0; y < h; ++y) {
        std::uint8_t cur = 0;
        for (long x = 0; x < w; ++x) {
          if (x % 8 == 0) cur = in.byte();
          bits(y, x) = (cur >> (7 - x % 8)) & 1U;
        }
      }
      break;
    }
    case '2':
      for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) bits(y, x) = ink_gray(in.number()) ? 1 : 0;
      break;
    case '5': {
      in.end_header();
      for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
          long v = in.byte();
          if (maxval > 255) v = (v << 8) | in.byte();
          bits(y, x) = ink_gray(v) ? 1 : 0;
        }
      break;
    }
  }
  return img;
}

BinaryRaster load_raster(const std::filesystem::path& path, int threshold) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::UnreadableFile, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  if (f.bad()) throw Error(ErrorCode::UnreadableFile, "read failed for " + path.string());
  return decode_pnm(bytes, threshold);
}

std::vector<std::uint8_t> encode_pbm(const BinaryRaster& img) {
  const std::string header =
      "P4\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const int row_bytes = (img.width() + 7) / 8;
  out.reserve(out.size() + static_cast<std::size_t>(row_bytes) * img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int b = 0; b < row_bytes; ++b) {
      std::uint8_t cur = 0;
      for (int k = 0; k < 8; ++k) {
        const int x = b * 8 + k;
        if (x < img.width() && img.at(x, y)) cur |= static_cast<std::uint8_t>(0x80U >> k);
      }
      out.push_back(cur);
    }
  }
  return out;
}

void save_pbm(const BinaryRaster& img, const std::filesystem::path& path) {
  const auto bytes = encode_pbm(img);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::UnreadableFile, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// --- components -------------------------------------------------------------

BinaryRaster Component::to_raster(int width, int height, std::optional<double> dot_px) const {
  BinaryRaster r(width, height, dot_px);
  for (const auto& p : pixels) r.set(p.x, p.y);
  return r;
}

std::optional<std::array<int, 4>> ink_bbox(const BinaryRaster& img) {
  std::array<int, 4> box{img.width(), img.height(), -1, -1};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img.at(x, y)) {
        box[0] = std::min(box[0], x);
        box[1] = std::min(box[1], y);
        box[2] = std::max(box[2], x);
        box[3] = std::max(box[3], y);
      }
  if (box[2] < 0) return std::nullopt;
  return box;
}

std::vector<Component> connected_components(const BinaryRaster& img, int connectivity) {
  if (connectivity != 4 && connectivity != 8)
    throw Error(ErrorCode::InvalidArgument, "connectivity must be 4 or 8");
  const int w = img.width();
  const int h = img.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<Component> out;
  std::vector<Pixel> stack;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!img.at(x, y) || label[static_cast<std::size_t>(y) * w + x] >= 0) continue;
      const int id = static_cast<int>(out.size());
      Component c;
      c.bbox = {x, y, x, y};
      stack.push_back({x, y});
      label[static_cast<std::size_t>(y) * w + x] = id;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        c.pixels.push_back(p);
        c.bbox[0] = std::min(c.bbox[0], p.x);
        c.bbox[1] = std::min(c.bbox[1], p.y);
        c.bbox[2] = std::max(c.bbox[2], p.x);
        c.bbox[3] = std::max(c.bbox[3], p.y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx == 0 && dy == 0) || (connectivity == 4 && dx != 0 && dy != 0)) continue;
            const int nx = p.x + dx;
            const int ny = p.y + dy;
            if (!img.at(nx, ny)) continue;
            auto& l = label[static_cast<std::size_t>(ny) * w + nx];
            if (l >= 0) continue;
            l = id;
            stack.push_back({nx, ny});
          }
      }
      std::sort(c.pixels.begin(), c.pixels.end(),
                [](const Pixel& a, const Pixel& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      c.area = c.pixels.size();
      out.push_back(std::move(c));
    }
  }

  if (const auto dot = img.dot_px()) {
    for (auto& c : out)
      c.role_hint = static_cast<double>(c.area) < 4.0 * *dot * *dot ? RoleHint::dot_mark
                                                                    : RoleHint::unknown;
  }
  std::stable_sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
    if (a.bbox[2] != b.bbox[2]) return a.bbox[2] > b.bbox[2];
    if (a.bbox[1] != b.bbox[1]) return a.bbox[1] < b.bbox[1];
    return a.bbox[0] < b.bbox[0];
  });
  return out;
}

const char* role_name(RoleHint role) {
  switch (role) {
    case RoleHint::subword: return "subword";
    case RoleHint::dot_mark: return "dot_mark";
    case RoleHint::diacritic: return "diacritic";
    case RoleHint::unknown: return "unknown";
  }
  return "unknown";
}

}  // namespace cursive
