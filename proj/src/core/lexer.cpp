#include "core/lexer.hpp"

#include <cctype>

#include "tablatex/error.hpp"

namespace tablatex::detail {

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

namespace {

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

}  // namespace

std::vector<Lexeme> lex(std::string_view src) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    const char c = src[i];
    if (is_space(c)) {
      while (i < n && is_space(src[i])) ++i;
      out.push_back({LexKind::Space, " "});
      continue;
    }
    if (c == '\\') {
      if (i + 1 >= n) {
        out.push_back({LexKind::Char, "\\"});
        ++i;
        continue;
      }
      const char d = src[i + 1];
      if (src.substr(i).starts_with("\\LATEX_TOKEN")) {
        out.push_back({LexKind::ControlWord, "\\LATEX_TOKEN"});
        i += 12;
        continue;
      }
      if (is_letter(d)) {
        std::size_t j = i + 1;
        while (j < n && is_letter(src[j])) ++j;
        out.push_back({LexKind::ControlWord, std::string(src.substr(i, j - i))});
        i = j;
        continue;
      }
      if (d == '\\') {
        out.push_back({LexKind::RowBreak, "\\\\"});
        i += 2;
        continue;
      }
      if (is_space(d)) {
        // Control space behaves as an ordinary word break here.
        out.push_back({LexKind::Space, " "});
        i += 2;
        while (i < n && is_space(src[i])) ++i;
        continue;
      }
      const std::size_t len = utf8_length(static_cast<unsigned char>(d));
      out.push_back({LexKind::ControlSymbol, std::string(src.substr(i, 1 + len))});
      i += 1 + len;
      continue;
    }
    if (c == '{') {
      out.push_back({LexKind::BeginGroup, "{"});
      ++i;
      continue;
    }
    if (c == '}') {
      out.push_back({LexKind::EndGroup, "}"});
      ++i;
      continue;
    }
    if (c == '&') {
      out.push_back({LexKind::Align, "&"});
      ++i;
      continue;
    }
    std::size_t len = utf8_length(static_cast<unsigned char>(c));
    if (i + len > n) len = n - i;
    out.push_back({LexKind::Char, std::string(src.substr(i, len))});
    i += len;
  }
  return out;
}

void LexCursor::skip_spaces() {
  while (!done() && peek().kind == LexKind::Space) ++pos_;
}

void LexCursor::skip_group() {
  int depth = 0;
  while (!done()) {
    const auto& lx = next();
    if (lx.kind == LexKind::BeginGroup) ++depth;
    if (lx.kind == LexKind::EndGroup && --depth == 0) return;
  }
  throw Error(ErrorKind::UnbalancedBraces, "group not closed");
}

std::optional<Range> LexCursor::group() {
  const std::size_t save = pos_;
  skip_spaces();
  if (done() || peek().kind != LexKind::BeginGroup) {
    pos_ = save;
    return std::nullopt;
  }
  const std::size_t open = pos_;
  skip_group();
  return Range{open + 1, pos_ - 1};
}

std::optional<Range> LexCursor::delimited(const char* open, const char* close) {
  const std::size_t save = pos_;
  skip_spaces();
  if (done() || peek().kind != LexKind::Char || peek().text != open) {
    pos_ = save;
    return std::nullopt;
  }
  const std::size_t start = ++pos_;
  int depth = 0;
  while (!done()) {
    const auto& lx = peek();
    if (lx.kind == LexKind::BeginGroup) ++depth;
    if (lx.kind == LexKind::EndGroup) --depth;
    if (depth == 0 && lx.kind == LexKind::Char && lx.text == close) {
      Range r{start, pos_};
      ++pos_;
      return r;
    }
    ++pos_;
  }
  pos_ = save;
  return std::nullopt;
}

std::optional<Range> LexCursor::bracket() { return delimited("[", "]"); }
std::optional<Range> LexCursor::paren() { return delimited("(", ")"); }

std::string concat(const std::vector<Lexeme>& lx, Range r) {
  std::string s;
  for (std::size_t i = r.begin; i < r.end; ++i) s += lx[i].text;
  return s;
}

bool is_ascii_alnum(std::string_view text) {
  return text.size() == 1 && std::isalnum(static_cast<unsigned char>(text[0])) != 0;
}

}  // namespace tablatex::detail

namespace tablatex::detail {

TabularParts split_tabular(std::string_view src) {
  TabularParts parts;
  parts.lx = lex(src);
  const auto& lx = parts.lx;
  LexCursor cur(lx);
  cur.skip_spaces();
  if (cur.done()) throw Error(ErrorKind::NoPreamble, "empty table source");
  std::size_t body_end = lx.size();
  if (cur.peek().kind == LexKind::ControlWord && cur.peek().text == "\\begin") {
    cur.next();
    auto env = cur.group();
    if (!env || concat(lx, *env) != "tabular")
      throw Error(ErrorKind::MalformedSource, "expected \\begin{tabular}");
    cur.bracket();
    // Locate the closing \end{tabular}; it must be the last thing in the block.
    std::size_t k = lx.size();
    while (k > 0 && lx[k - 1].kind == LexKind::Space) --k;
    bool found = false;
    for (std::size_t e = k; e-- > cur.pos();) {
      if (lx[e].kind == LexKind::ControlWord && lx[e].text == "\\end") {
        LexCursor tail(lx, e + 1, k);
        auto g = tail.group();
        if (g && concat(lx, *g) == "tabular") {
          tail.skip_spaces();
          if (!tail.done()) throw Error(ErrorKind::MalformedSource, "text after \\end{tabular}");
          body_end = e;
          found = true;
        }
        break;
      }
    }
    if (!found) throw Error(ErrorKind::MalformedSource, "missing \\end{tabular}");
  }
  LexCursor pre(lx, cur.pos(), body_end);
  auto spec = pre.group();
  if (!spec) throw Error(ErrorKind::NoPreamble, "missing column specification");
  parts.preamble = *spec;
  parts.body = Range{pre.pos(), body_end};
  return parts;
}

}  // namespace tablatex::detail
