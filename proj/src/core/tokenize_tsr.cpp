#include <array>
#include <cctype>

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
// Structural commands that the TSR vocabulary cannot express.
constexpr std::array<std::string_view, 6> kUnsupported = {
    "\\cline", "\\cmidrule", "\\hhline", "\\specialrule", "\\addlinespace", "\\morecmidrules"};

bool in(std::string_view s, auto const& list) {
  for (auto x : list)
    if (x == s) return true;
  return false;
}

class TsrEmitter {
 public:
  explicit TsrEmitter(const std::vector<Lexeme>& lx) : lx_(lx) {}

  TokenSequence take() { return std::move(out_); }

  void emit(std::string_view text, TokenKind kind) { out_.tokens.push_back(Token{std::string(text), kind}); }

  void preamble(Range r) {
    emit(kOpenBrace, TokenKind::StructureCommand);
    column_spec(r);
    emit(kCloseBrace, TokenKind::StructureCommand);
  }

  // Column specifiers c/l/r and vertical rules; *{n}{spec} is expanded.
  void column_spec(Range r) {
    LexCursor cur(lx_, r.begin, r.end);
    while (!cur.done()) {
      const Lexeme& lx = cur.next();
      if (lx.kind == LexKind::Space) continue;
      if (lx.kind == LexKind::Char && (lx.text == "c" || lx.text == "l" || lx.text == "r" || lx.text == "|")) {
        emit(lx.text, TokenKind::AlignSpec);
        continue;
      }
      if (lx.kind == LexKind::Char && lx.text == "*") {
        auto count = cur.group();
        auto body = cur.group();
        if (!count || !body) throw Error(ErrorKind::UnknownStructure, "malformed *{n}{spec}");
        const std::string n = detail::concat(lx_, *count);
        int reps = 0;
        for (char ch : n) {
          if (ch == ' ') continue;
          if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw Error(ErrorKind::UnknownStructure, "non-numeric repeat count '" + n + "'");
          reps = reps * 10 + (ch - '0');
        }
        for (int k = 0; k < reps; ++k) column_spec(*body);
        continue;
      }
      throw Error(ErrorKind::UnknownStructure, "column specifier '" + lx.text + "'");
    }
  }

  // Digits of a span count; anything else is inexpressible.
  void digit_group(Range r, bool strict) {
    emit(kOpenBrace, TokenKind::StructureCommand);
    for (std::size_t i = r.begin; i < r.end; ++i) {
      const Lexeme& lx = lx_[i];
      if (lx.kind == LexKind::Space) continue;
      if (lx.kind == LexKind::Char && lx.text.size() == 1 && std::isdigit(static_cast<unsigned char>(lx.text[0]))) {
        emit(lx.text, TokenKind::Character);
        continue;
      }
      if (strict) throw Error(ErrorKind::UnknownStructure, "non-digit span argument '" + lx.text + "'");
    }
    emit(kCloseBrace, TokenKind::StructureCommand);
  }

  void required_group(LexCursor& cur, Range& out, const char* what) {
    auto g = cur.group();
    if (!g) throw Error(ErrorKind::UnknownStructure, std::string("missing argument to ") + what);
    out = *g;
  }

  // Scans a content region. At top level `&` and `\\` split cells; inside a
  // span's text argument (`nested`) everything non-structural is content.
  void region(Range r, bool nested) {
    LexCursor cur(lx_, r.begin, r.end);
    bool has_content = false;
    auto cell = [&] {
      if (!has_content) emit(kCell, TokenKind::CellPlaceholder);
      has_content = true;
    };
    while (!cur.done()) {
      const Lexeme& lx = cur.peek();
      if (lx.kind == LexKind::Space) {
        cur.next();
        continue;
      }
      if (!nested && lx.kind == LexKind::Align) {
        cur.next();
        emit(kColumnSep, TokenKind::ColumnSep);
        has_content = false;
        continue;
      }
      if (!nested && (lx.kind == LexKind::RowBreak ||
                      (lx.kind == LexKind::ControlWord && lx.text == "\\tabularnewline"))) {
        cur.next();
        cur.bracket();
        emit(kRowSep, TokenKind::RowSep);
        has_content = false;
        continue;
      }
      if (lx.kind == LexKind::ControlWord) {
        if (in(lx.text, kRules)) {
          cur.next();
          cur.bracket();
          emit(lx.text, TokenKind::StructureCommand);
          continue;
        }
        if (lx.text == "\\multicolumn") {
          cur.next();
          Range count, align, text;
          required_group(cur, count, "\\multicolumn");
          required_group(cur, align, "\\multicolumn");
          required_group(cur, text, "\\multicolumn");
          emit("\\multicolumn", TokenKind::StructureCommand);
          digit_group(count, true);
          emit(kOpenBrace, TokenKind::StructureCommand);
          column_spec(align);
          emit(kCloseBrace, TokenKind::StructureCommand);
          emit(kOpenBrace, TokenKind::StructureCommand);
          region(text, true);
          emit(kCloseBrace, TokenKind::StructureCommand);
          has_content = true;
          continue;
        }
        if (lx.text == "\\multirow") {
          cur.next();
          cur.bracket();
          Range count, width, text;
          required_group(cur, count, "\\multirow");
          // Legacy form \multirow{n}*{text}.
          cur.skip_spaces();
          if (!cur.done() && cur.peek().kind == LexKind::Char && cur.peek().text == "*") {
            cur.next();
            width = Range{0, 0};
          } else {
            required_group(cur, width, "\\multirow");
          }
          cur.bracket();
          required_group(cur, text, "\\multirow");
          emit("\\multirow", TokenKind::StructureCommand);
          digit_group(count, true);
          // The width argument ("*", "2cm", ...) has no TSR representation.
          emit(kOpenBrace, TokenKind::StructureCommand);
          emit(kCloseBrace, TokenKind::StructureCommand);
          emit(kOpenBrace, TokenKind::StructureCommand);
          region(text, true);
          emit(kCloseBrace, TokenKind::StructureCommand);
          has_content = true;
          continue;
        }
        if (lx.text == "\\hspace") {
          cur.next();
          if (!cur.done() && cur.peek().kind == LexKind::Char && cur.peek().text == "*") cur.next();
          Range arg;
          required_group(cur, arg, "\\hspace");
          emit("\\hspace", TokenKind::StructureCommand);
          digit_group(arg, false);
          continue;
        }
        if (in(lx.text, kUnsupported))
          throw Error(ErrorKind::UnknownStructure, "structure command " + lx.text + " is outside the TSR vocabulary");
      }
      if (lx.kind == LexKind::EndGroup) throw Error(ErrorKind::UnbalancedBraces, "unexpected '}'");
      cell();
      if (lx.kind == LexKind::BeginGroup) {
        cur.skip_group();
      } else {
        cur.next();
      }
    }
  }

 private:
  const std::vector<Lexeme>& lx_;
  TokenSequence out_{Task::TSR, {}};
};

}  // namespace

TokenSequence tokenize_tsr(std::string_view normalized) {
  const auto parts = detail::split_tabular(normalized);
  TsrEmitter em(parts.lx);
  em.preamble(parts.preamble);
  em.region(parts.body, false);
  return em.take();
}

}  // namespace tablatex
