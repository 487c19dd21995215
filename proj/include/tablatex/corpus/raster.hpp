#pragma once

#include <string_view>
#include <vector>

#include "tablatex/corpus/glyph_atlas.hpp"
#include "tablatex/corpus/table_image.hpp"

namespace tablatex::corpus {

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
};

struct PlacedGlyph {
  char c = ' ';
  FontFace face = FontFace::Regular;
  int x = 0, y = 0;  // top-left of the glyph cell
};

// Geometry of a rendered table at native resolution.
struct TableLayout {
  int width = 0, height = 0;
  int n_rows = 0, n_cols = 0;
  std::vector<int> col_x, col_w;  // per column
  std::vector<int> row_y;         // per row; every row is row_h tall
  int row_h = 0;
  std::vector<Rect> rules;        // dark rule rectangles (may overlap)
  std::vector<PlacedGlyph> glyphs;
};

// Lays out a normalized tabular source: monospace text from the glyph atlas,
// rule lines for \hline / booktabs rules and `|` column separators, spans
// merged across their columns or rows. Throws UnsupportedGlyph for content
// the atlas cannot draw (non-ASCII text, unknown commands).
TableLayout layout_table(std::string_view source);

// Native-resolution rendering of `layout_table`, white = 1, ink = 0.
GrayImage render_layout(const TableLayout& layout);
GrayImage render_table(std::string_view source);

// render_table followed by the aspect-mode sizing rule.
TableImage rasterize_synthetic(std::string_view source, AspectMode mode, int side = 400);

}  // namespace tablatex::corpus
