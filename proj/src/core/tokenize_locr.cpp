#include <array>

#include "core/lexer.hpp"
#include "tablatex/error.hpp"
#include "tablatex/tokenize.hpp"

namespace tablatex {

using detail::LexCursor;
using detail::LexKind;
using detail::Lexeme;
using detail::Range;

namespace {

constexpr std::array<std::string_view, 4> kRules = {"\\hline", "\\toprule", "\\midrule", "\\bottomrule"};

struct Item {
  enum Kind { Content, Space, ColumnSep, RowSep } kind;
  Token token;
};

class ContentCollector {
 public:
  explicit ContentCollector(const std::vector<Lexeme>& lx) : lx_(lx) {}

  std::vector<Item> take() {
    if (depth_ != 0) throw Error(ErrorKind::UnbalancedBraces, "unclosed '{' in table content");
    return std::move(items_);
  }

  void region(Range r, bool nested) {
    LexCursor cur(lx_, r.begin, r.end);
    while (!cur.done()) {
      const Lexeme& lx = cur.next();
      switch (lx.kind) {
        case LexKind::Space:
          space();
          break;
        case LexKind::Align:
          if (nested || depth_ > 0) {
            space();
          } else {
            items_.push_back({Item::ColumnSep, Token{std::string(kColumnSep), TokenKind::ColumnSep}});
          }
          break;
        case LexKind::RowBreak:
          cur.bracket();
          if (nested || depth_ > 0) {
            space();
          } else {
            items_.push_back({Item::RowSep, Token{std::string(kRowSep), TokenKind::RowSep}});
          }
          break;
        case LexKind::BeginGroup:
          ++depth_;
          content(lx.text, TokenKind::Character);
          break;
        case LexKind::EndGroup:
          if (--depth_ < 0) throw Error(ErrorKind::UnbalancedBraces, "unexpected '}' in table content");
          content(lx.text, TokenKind::Character);
          break;
        case LexKind::Char:
          content(lx.text, TokenKind::Character);
          break;
        case LexKind::ControlSymbol:
          content(lx.text, TokenKind::LatexCommand);
          break;
        case LexKind::ControlWord:
          control_word(lx, cur, nested);
          break;
      }
    }
  }

 private:
  void space() {
    if (!items_.empty() && items_.back().kind == Item::Space) return;
    items_.push_back({Item::Space, {}});
  }
  void content(const std::string& text, TokenKind kind) { items_.push_back({Item::Content, Token{text, kind}}); }

  Range required(LexCursor& cur) {
    auto g = cur.group();
    if (!g) throw Error(ErrorKind::UnbalancedBraces, "missing argument group");
    return *g;
  }

  void control_word(const Lexeme& lx, LexCursor& cur, bool nested) {
    for (auto rule : kRules) {
      if (lx.text == rule) {
        cur.bracket();
        space();
        return;
      }
    }
    if (lx.text == "\\tabularnewline" && !nested && depth_ == 0) {
      items_.push_back({Item::RowSep, Token{std::string(kRowSep), TokenKind::RowSep}});
      return;
    }
    if (lx.text == "\\cline" || lx.text == "\\hhline") {
      required(cur);
      space();
      return;
    }
    if (lx.text == "\\cmidrule") {
      cur.bracket();
      cur.paren();
      required(cur);
      space();
      return;
    }
    if (lx.text == "\\addlinespace" || lx.text == "\\morecmidrules") {
      cur.bracket();
      space();
      return;
    }
    if (lx.text == "\\specialrule") {
      required(cur);
      required(cur);
      required(cur);
      space();
      return;
    }
    if (lx.text == "\\multicolumn") {
      required(cur);
      required(cur);
      region(required(cur), true);
      return;
    }
    if (lx.text == "\\multirow") {
      cur.bracket();
      required(cur);
      cur.skip_spaces();
      if (!cur.done() && cur.peek().kind == LexKind::Char && cur.peek().text == "*") {
        cur.next();
      } else {
        required(cur);
      }
      cur.bracket();
      region(required(cur), true);
      return;
    }
    content(lx.text, lx.text == kLatexMask ? TokenKind::Special : TokenKind::LatexCommand);
  }

  const std::vector<Lexeme>& lx_;
  std::vector<Item> items_;
  int depth_ = 0;
};

bool is_alnum_token(const Token& t) { return t.kind == TokenKind::Character && detail::is_ascii_alnum(t.text); }

struct RunToken {
  Token token;
  bool closer;
};

// Emits one cell's content with ¦ after each word. A run is a maximal
// whitespace-free stretch; the delimiter follows its last token that is not a
// trailing `}` or closing `$`. A cell's final run only gets a delimiter when
// it contains an alphanumeric character.
void emit_cell(const std::vector<Item>& items, std::size_t begin, std::size_t end, TokenSequence& out) {
  std::vector<std::vector<RunToken>> runs;
  bool math = false;
  bool new_run = true;
  for (std::size_t i = begin; i < end; ++i) {
    const Item& it = items[i];
    if (it.kind == Item::Space) {
      new_run = true;
      continue;
    }
    bool closer = it.token.text == "}";
    if (it.token.text == "$") {
      closer = math;
      math = !math;
    }
    // Whitespace before closers carries no information; fold closer-only runs
    // into the previous run.
    if (new_run && !(closer && !runs.empty())) runs.emplace_back();
    if (runs.empty()) runs.emplace_back();
    runs.back().push_back({it.token, closer});
    new_run = false;
  }
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    bool alnum = false;
    for (const auto& t : run) alnum = alnum || is_alnum_token(t.token);
    const bool final_run = r + 1 == runs.size();
    const bool delimit = alnum || !final_run;
    std::size_t split = run.size();
    while (split > 0 && run[split - 1].closer) --split;
    if (split == 0) split = run.size();
    for (std::size_t k = 0; k < run.size(); ++k) {
      out.tokens.push_back(run[k].token);
      if (delimit && k + 1 == split) out.tokens.push_back(Token{std::string(kDelimiter), TokenKind::Delimiter});
    }
  }
}

TokenSequence emit_items(const std::vector<Item>& items) {
  TokenSequence out{Task::LOCR, {}};
  std::size_t cell_begin = 0;
  for (std::size_t i = 0; i <= items.size(); ++i) {
    if (i < items.size() && items[i].kind != Item::ColumnSep && items[i].kind != Item::RowSep) continue;
    emit_cell(items, cell_begin, i, out);
    if (i < items.size()) out.tokens.push_back(items[i].token);
    cell_begin = i + 1;
  }
  return out;
}

}  // namespace

TokenSequence tokenize_locr(std::string_view normalized) {
  const auto parts = detail::split_tabular(normalized);
  ContentCollector col(parts.lx);
  col.region(parts.body, false);
  return emit_items(col.take());
}

TokenSequence tokenize_locr_content(std::string_view content) {
  const auto lx = detail::lex(content);
  ContentCollector col(lx);
  col.region(Range{0, lx.size()}, false);
  return emit_items(col.take());
}

}  // namespace tablatex
