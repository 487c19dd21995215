#pragma once

#include <cstdint>
#include <vector>

namespace tablatex::corpus {

// Binarized fixed-cell monospace glyphs for printable ASCII.
struct Glyph {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> ink;  // row-major, 1 = dark

  bool at(int x, int y) const { return ink[static_cast<std::size_t>(y * width + x)] != 0; }
  int dark_pixels() const;
};

enum class FontFace { Regular, Bold };

int glyph_width();
int glyph_height();
bool has_glyph(char c);
// Throws UnsupportedGlyph outside 0x20..0x7E.
const Glyph& glyph(char c, FontFace face = FontFace::Regular);

}  // namespace tablatex::corpus
