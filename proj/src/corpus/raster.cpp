#include "tablatex/corpus/raster.hpp"

#include <algorithm>
#include <string>

#include "core/lexer.hpp"
#include "tablatex/error.hpp"
#include "tablatex/structure.hpp"
#include "tablatex/tokenize.hpp"

namespace tablatex::corpus {

namespace {

using detail::LexCursor;
using detail::Lexeme;
using detail::LexKind;
using detail::Range;

constexpr int kMargin = 4;
constexpr int kPadX = 6;
constexpr int kPadY = 4;
constexpr int kRuleGap = 2;

struct Styled {
  char c;
  FontFace face;
};

struct Cell {
  std::vector<Styled> text;
  int col = 0;
  int colspan = 1;
  int rowspan = 1;
  char align = 'c';
  bool own_align = false;  // \multicolumn overrides the column alignment
};

struct Row {
  std::vector<Cell> cells;
  std::vector<int> rules_above;  // rule thicknesses stacked above the row
};

[[noreturn]] void unsupported(const std::string& what) { throw Error(ErrorKind::UnsupportedGlyph, what); }

int rule_thickness(const std::string& cmd) {
  if (cmd == "\\hline" || cmd == "\\midrule") return 1;
  if (cmd == "\\toprule" || cmd == "\\bottomrule") return 2;
  return 0;
}

class BodyReader {
 public:
  explicit BodyReader(const std::vector<Lexeme>& lx) : lx_(lx) {}

  std::vector<Row> read(Range body, std::vector<int>& trailing_rules) {
    std::vector<Row> rows;
    Row row;
    std::vector<Lexeme> cell;
    bool row_has_content = false;
    auto flush_cell = [&] {
      row.cells.push_back(make_cell(cell));
      cell.clear();
    };
    for (LexCursor cur(lx_, body.begin, body.end); !cur.done();) {
      const Lexeme& l = cur.peek();
      if (l.kind == LexKind::ControlWord && rule_thickness(l.text) && is_blank(cell) && row.cells.empty()) {
        row.rules_above.push_back(rule_thickness(l.text));
        cur.next();
        continue;
      }
      if (l.kind == LexKind::Align) {
        cur.next();
        flush_cell();
        row_has_content = true;
        continue;
      }
      if (l.kind == LexKind::RowBreak) {
        cur.next();
        flush_cell();
        rows.push_back(std::move(row));
        row = Row{};
        row_has_content = false;
        continue;
      }
      if (l.kind == LexKind::BeginGroup) {
        const std::size_t start = cur.pos();
        cur.skip_group();
        for (std::size_t k = start; k < cur.pos(); ++k) cell.push_back(lx_[k]);
        if (!is_blank(cell)) row_has_content = true;
        continue;
      }
      cell.push_back(cur.next());
      if (!is_blank(cell)) row_has_content = true;
    }
    if (row_has_content || !row.cells.empty()) {
      flush_cell();
      rows.push_back(std::move(row));
    } else {
      trailing_rules = row.rules_above;
    }
    return rows;
  }

 private:
  static bool is_blank(const std::vector<Lexeme>& v) {
    return std::all_of(v.begin(), v.end(), [](const Lexeme& l) { return l.kind == LexKind::Space; });
  }

  Cell make_cell(const std::vector<Lexeme>& lx) {
    Cell c;
    LexCursor cur(lx);
    cur.skip_spaces();
    if (!cur.done() && (cur.peek().text == "\\multicolumn" || cur.peek().text == "\\multirow")) {
      const bool mc = cur.next().text == "\\multicolumn";
      if (!mc) cur.bracket();
      auto n = cur.group();
      if (!mc) cur.bracket();
      auto spec = cur.group();
      auto text = cur.group();
      if (!n || !spec || !text) unsupported("malformed span");
      const int size = std::max(1, std::atoi(detail::concat(lx, *n).c_str()));
      if (mc) {
        c.colspan = size;
        for (char ch : detail::concat(lx, *spec))
          if (ch == 'l' || ch == 'c' || ch == 'r') {
            c.align = ch;
            c.own_align = true;
            break;
          }
      } else {
        c.rowspan = size;
      }
      append_text(lx, *text, FontFace::Regular, c.text);
    } else {
      append_text(lx, Range{0, lx.size()}, FontFace::Regular, c.text);
    }
    trim(c.text);
    return c;
  }

  static void trim(std::vector<Styled>& t) {
    std::vector<Styled> out;
    for (const auto& s : t) {
      if (s.c == ' ' && (out.empty() || out.back().c == ' ')) continue;
      out.push_back(s);
    }
    while (!out.empty() && out.back().c == ' ') out.pop_back();
    t = std::move(out);
  }

  void append_text(const std::vector<Lexeme>& lx, Range r, FontFace face, std::vector<Styled>& out) {
    LexCursor cur(lx, r.begin, r.end);
    while (!cur.done()) {
      const Lexeme& l = cur.next();
      switch (l.kind) {
        case LexKind::Space: out.push_back({' ', face}); break;
        case LexKind::BeginGroup: {
          cur.seek(cur.pos() - 1);
          auto g = cur.group();
          append_text(lx, *g, face, out);
          break;
        }
        case LexKind::EndGroup: break;
        case LexKind::ControlSymbol:
          if (l.text.size() != 2) unsupported("cannot draw " + l.text);
          out.push_back({l.text[1], face});
          break;
        case LexKind::ControlWord: {
          if (l.text == "\\textbf") {
            auto g = cur.group();
            if (!g) unsupported("\\textbf without an argument");
            append_text(lx, *g, FontFace::Bold, out);
          } else if (l.text == "\\hspace") {
            cur.group();
            out.push_back({' ', face});
          } else if (l.text == "\\multicolumn" || l.text == "\\multirow") {
            // Nested span: render its text argument only.
            if (l.text == "\\multirow") cur.bracket();
            cur.group();
            cur.group();
            auto g = cur.group();
            if (g) append_text(lx, *g, face, out);
          } else {
            unsupported("no rendering for command " + l.text);
          }
          break;
        }
        case LexKind::Char:
          for (char ch : l.text) {
            if (l.text == "~") ch = ' ';
            if (!has_glyph(ch)) unsupported("no glyph for '" + l.text + "'");
            out.push_back({ch, face});
          }
          break;
        case LexKind::Align:
        case LexKind::RowBreak: break;
      }
    }
  }

  const std::vector<Lexeme>& lx_;
};

}  // namespace

TableLayout layout_table(std::string_view source) {
  const TableStructure st = parse_structure(tokenize_tsr(source));
  const auto parts = detail::split_tabular(source);
  std::vector<int> trailing_rules;
  std::vector<Row> rows = BodyReader(parts.lx).read(parts.body, trailing_rules);

  TableLayout L;
  L.n_cols = std::max(1, st.n_cols);
  L.n_rows = static_cast<int>(rows.size());
  const int gw = glyph_width(), gh = glyph_height();

  // Column assignment; cells covered by an earlier \multirow keep their slot
  // empty in LaTeX source, so indices follow the `&` order directly.
  for (auto& row : rows) {
    int col = 0;
    for (auto& c : row.cells) {
      c.col = col;
      c.colspan = std::clamp(c.colspan, 1, std::max(1, L.n_cols - col));
      c.rowspan = std::max(1, c.rowspan);
      if (!c.own_align && col < static_cast<int>(st.column_alignments.size()))
        c.align = st.column_alignments[static_cast<std::size_t>(col)].align;
      col += c.colspan;
    }
  }

  L.col_w.assign(static_cast<std::size_t>(L.n_cols), 2 * kPadX + gw);
  auto need = [&](const Cell& c) { return static_cast<int>(c.text.size()) * gw + 2 * kPadX; };
  for (const auto& row : rows)
    for (const auto& c : row.cells)
      if (c.colspan == 1 && c.col < L.n_cols)
        L.col_w[static_cast<std::size_t>(c.col)] = std::max(L.col_w[static_cast<std::size_t>(c.col)], need(c));
  for (const auto& row : rows)
    for (const auto& c : row.cells) {
      if (c.colspan == 1 || c.col >= L.n_cols) continue;
      int have = 0;
      for (int k = c.col; k < c.col + c.colspan; ++k) have += L.col_w[static_cast<std::size_t>(k)];
      if (have < need(c)) L.col_w[static_cast<std::size_t>(c.col + c.colspan - 1)] += need(c) - have;
    }

  // Horizontal layout: boundary b (left of column b, or right edge) holds
  // its vertical rules.
  std::vector<int> vrules(static_cast<std::size_t>(L.n_cols) + 1, 0);
  for (int c = 0; c < L.n_cols && c < static_cast<int>(st.column_alignments.size()); ++c)
    vrules[static_cast<std::size_t>(c)] = st.column_alignments[static_cast<std::size_t>(c)].rules_before;
  vrules.back() = st.trailing_rules;
  std::vector<int> boundary_x(vrules.size());
  int x = kMargin;
  for (std::size_t b = 0; b < vrules.size(); ++b) {
    boundary_x[b] = x;
    if (vrules[b] > 0) x += vrules[b] + (vrules[b] - 1) * kRuleGap;
    if (b < static_cast<std::size_t>(L.n_cols)) {
      L.col_x.push_back(x);
      x += L.col_w[b];
    }
  }
  L.width = x + kMargin;

  // Vertical layout.
  L.row_h = gh + 2 * kPadY;
  int y = kMargin;
  auto place_band = [&](const std::vector<int>& rules) {
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (i) y += kRuleGap;
      L.rules.push_back(Rect{kMargin, y, L.width - 2 * kMargin, rules[i]});
      y += rules[i];
    }
  };
  const int body_top = y;
  for (const auto& row : rows) {
    place_band(row.rules_above);
    L.row_y.push_back(y);
    y += L.row_h;
  }
  place_band(trailing_rules);
  const int body_bottom = y;
  L.height = y + kMargin;

  // Vertical rules run from the top of the body to its bottom, interrupted
  // where a \multicolumn spans the boundary.
  for (std::size_t b = 0; b < vrules.size(); ++b) {
    for (int k = 0; k < vrules[b]; ++k) {
      const int rx = boundary_x[b] + k * (1 + kRuleGap);
      int seg_top = body_top;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        bool crossed = false;
        for (const auto& c : rows[r].cells)
          if (c.col < static_cast<int>(b) && static_cast<int>(b) < c.col + c.colspan) crossed = true;
        const int top = L.row_y[r], bottom = top + L.row_h;
        if (crossed) {
          if (top > seg_top) L.rules.push_back(Rect{rx, seg_top, 1, top - seg_top});
          seg_top = bottom;
        }
      }
      if (body_bottom > seg_top) L.rules.push_back(Rect{rx, seg_top, 1, body_bottom - seg_top});
    }
  }

  // Text.
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& c : rows[r].cells) {
      if (c.text.empty() || c.col >= L.n_cols) continue;
      const int x0 = L.col_x[static_cast<std::size_t>(c.col)];
      int w = 0;
      for (int k = c.col; k < c.col + c.colspan; ++k) w += L.col_w[static_cast<std::size_t>(k)];
      const int tw = static_cast<int>(c.text.size()) * gw;
      int tx = x0 + (w - tw) / 2;
      if (c.align == 'l') tx = x0 + kPadX;
      if (c.align == 'r') tx = x0 + w - kPadX - tw;
      int ty = L.row_y[r] + kPadY;
      if (c.rowspan > 1) {
        const std::size_t last = std::min(rows.size() - 1, r + static_cast<std::size_t>(c.rowspan) - 1);
        const int span_bottom = L.row_y[last] + L.row_h;
        ty = (L.row_y[r] + span_bottom) / 2 - gh / 2;
      }
      for (std::size_t i = 0; i < c.text.size(); ++i)
        if (c.text[i].c != ' ')
          L.glyphs.push_back(PlacedGlyph{c.text[i].c, c.text[i].face, tx + static_cast<int>(i) * gw, ty});
    }
  }
  return L;
}

GrayImage render_layout(const TableLayout& layout) {
  GrayImage img(layout.width, layout.height, 1.0f);
  for (const auto& r : layout.rules)
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x)
        if (x >= 0 && y >= 0 && x < img.width && y < img.height) img.at(x, y) = 0.0f;
  for (const auto& g : layout.glyphs) {
    const Glyph& gl = glyph(g.c, g.face);
    for (int y = 0; y < gl.height; ++y)
      for (int x = 0; x < gl.width; ++x) {
        const int px = g.x + x, py = g.y + y;
        if (gl.at(x, y) && px >= 0 && py >= 0 && px < img.width && py < img.height) img.at(px, py) = 0.0f;
      }
  }
  return img;
}

GrayImage render_table(std::string_view source) { return render_layout(layout_table(source)); }

TableImage rasterize_synthetic(std::string_view source, AspectMode mode, int side) {
  return fit_to_square(render_table(source), mode, side);
}

}  // namespace tablatex::corpus
