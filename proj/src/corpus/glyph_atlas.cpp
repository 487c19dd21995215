#include "tablatex/corpus/glyph_atlas.hpp"

#include <array>
#include <numeric>
#include <string>

#include "tablatex/error.hpp"

namespace tablatex::corpus {

namespace {

#include "glyph_atlas_data.inc"

using Atlas = std::array<Glyph, 95>;

Atlas decode(const char* const (&rows)[95][kGlyphHeight]) {
  Atlas atlas;
  for (int g = 0; g < 95; ++g) {
    Glyph& out = atlas[static_cast<std::size_t>(g)];
    out.width = kGlyphWidth;
    out.height = kGlyphHeight;
    out.ink.resize(static_cast<std::size_t>(kGlyphWidth * kGlyphHeight));
    for (int y = 0; y < kGlyphHeight; ++y)
      for (int x = 0; x < kGlyphWidth; ++x)
        out.ink[static_cast<std::size_t>(y * kGlyphWidth + x)] = rows[g][y][x] == '#' ? 1 : 0;
  }
  return atlas;
}

}  // namespace

int Glyph::dark_pixels() const { return std::accumulate(ink.begin(), ink.end(), 0); }

int glyph_width() { return kGlyphWidth; }
int glyph_height() { return kGlyphHeight; }

bool has_glyph(char c) { return c >= 0x20 && c <= 0x7E; }

const Glyph& glyph(char c, FontFace face) {
  static const Atlas regular = decode(kGlyphs_regular);
  static const Atlas bold = decode(kGlyphs_bold);
  if (!has_glyph(c)) {
    const auto code = static_cast<unsigned>(static_cast<unsigned char>(c));
    throw Error(ErrorKind::UnsupportedGlyph, "no glyph for byte value " + std::to_string(code));
  }
  return (face == FontFace::Bold ? bold : regular)[static_cast<std::size_t>(c - 0x20)];
}

}  // namespace tablatex::corpus
