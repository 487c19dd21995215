#pragma once

#include <string_view>
#include <vector>

namespace tablatex::corpus {

enum class AspectMode { ACT, FAT };

const char* to_string(AspectMode m);
AspectMode parse_aspect(std::string_view name);  // "act" | "fat"

// Grayscale raster, row-major, intensities in [0,1] with white = 1.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, float fill = 1.0f)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}
  float& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
  float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
};

// Model-ready square image. For ACT the original content occupies the
// top-left content_width x content_height region and the rest is white.
struct TableImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;
  AspectMode aspect_mode = AspectMode::FAT;
  int content_width = 0;
  int content_height = 0;

  float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
};

// Area-weighted resampling (exact pixel-overlap averaging), used for both
// down- and up-scaling.
GrayImage resize(const GrayImage& src, int width, int height);

// ACT: scale so the larger side equals `side`, then pad with white to
// side x side. FAT: stretch to side x side. Throws EmptyImage for a 0-sized
// input.
TableImage fit_to_square(const GrayImage& src, AspectMode mode, int side = 400);

}  // namespace tablatex::corpus
