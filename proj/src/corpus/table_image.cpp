#include "tablatex/corpus/table_image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tablatex/error.hpp"

namespace tablatex::corpus {

const char* to_string(AspectMode m) { return m == AspectMode::ACT ? "act" : "fat"; }

AspectMode parse_aspect(std::string_view name) {
  if (name == "act" || name == "ACT") return AspectMode::ACT;
  if (name == "fat" || name == "FAT") return AspectMode::FAT;
  throw Error(ErrorKind::ConfigError, "unknown aspect mode '" + std::string(name) + "'");
}

namespace {

// weights[o] = list of (source index, overlap) for output cell o.
std::vector<std::vector<std::pair<int, double>>> overlaps(int src, int dst) {
  std::vector<std::vector<std::pair<int, double>>> w(static_cast<std::size_t>(dst));
  const double ratio = static_cast<double>(src) / dst;
  for (int o = 0; o < dst; ++o) {
    const double lo = o * ratio, hi = (o + 1) * ratio;
    for (int s = static_cast<int>(std::floor(lo)); s < std::min(src, static_cast<int>(std::ceil(hi))); ++s) {
      const double ov = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      if (ov > 1e-12) w[static_cast<std::size_t>(o)].emplace_back(s, ov / ratio);
    }
  }
  return w;
}

}  // namespace

GrayImage resize(const GrayImage& src, int width, int height) {
  if (src.width <= 0 || src.height <= 0) throw Error(ErrorKind::EmptyImage, "cannot resize an empty image");
  if (width <= 0 || height <= 0) throw Error(ErrorKind::ShapeError, "resize target must be positive");
  if (width == src.width && height == src.height) return src;
  const auto wx = overlaps(src.width, width), wy = overlaps(src.height, height);
  // Horizontal pass then vertical pass.
  std::vector<double> tmp(static_cast<std::size_t>(width) * static_cast<std::size_t>(src.height));
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0;
      for (const auto& [s, w] : wx[static_cast<std::size_t>(x)]) acc += w * src.at(s, y);
      tmp[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = acc;
    }
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0;
      for (const auto& [s, w] : wy[static_cast<std::size_t>(y)])
        acc += w * tmp[static_cast<std::size_t>(s) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
      out.at(x, y) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
    }
  return out;
}

TableImage fit_to_square(const GrayImage& src, AspectMode mode, int side) {
  if (src.width <= 0 || src.height <= 0 || src.pixels.empty()) throw Error(ErrorKind::EmptyImage, "image has no pixels");
  if (side <= 0) throw Error(ErrorKind::ShapeError, "target side must be positive");
  TableImage out;
  out.width = out.height = side;
  out.aspect_mode = mode;
  if (mode == AspectMode::FAT) {
    out.pixels = resize(src, side, side).pixels;
    out.content_width = out.content_height = side;
    return out;
  }
  const double scale = static_cast<double>(side) / std::max(src.width, src.height);
  const int w = std::clamp(static_cast<int>(std::lround(src.width * scale)), 1, side);
  const int h = std::clamp(static_cast<int>(std::lround(src.height * scale)), 1, side);
  const GrayImage content = resize(src, w, h);
  out.pixels.assign(static_cast<std::size_t>(side) * static_cast<std::size_t>(side), 1.0f);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.pixels[static_cast<std::size_t>(y * side + x)] = content.at(x, y);
  out.content_width = w;
  out.content_height = h;
  return out;
}

}  // namespace tablatex::corpus
