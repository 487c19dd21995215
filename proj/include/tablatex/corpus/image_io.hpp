#pragma once

#include <string>

#include "tablatex/corpus/table_image.hpp"

namespace tablatex::corpus {

// Decodes a PNG or JPEG file (detected by signature) to grayscale using
// Rec. 601 luminance; alpha is composited over white. Throws DecodeError or
// EmptyImage.
GrayImage decode_image(const std::string& path);

// decode_image followed by the aspect-mode sizing rule.
TableImage load_external_image(const std::string& path, AspectMode mode, int side = 400);

// 8-bit grayscale PNG. Intensities are rounded to the nearest of 256 levels.
void write_png(const std::string& path, const GrayImage& image);
void write_png(const std::string& path, const TableImage& image);

}  // namespace tablatex::corpus
