#include "tablatex/normalize.hpp"

#include <array>
#include <cctype>

#include "core/lexer.hpp"
#include "tablatex/error.hpp"

namespace tablatex {

namespace {

constexpr std::string_view kBegin = "\\begin{tabular}";
constexpr std::string_view kEnd = "\\end{tabular}";

constexpr std::array<std::string_view, 15> kDroppedCommands = {
    "cite",  "citep",   "citet",   "citealp", "citeauthor", "citeyear", "nocite", "ref",
    "eqref", "autoref", "cref",    "Cref",    "pageref",    "label",    "footnotemark"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool is_dropped(std::string_view name) {
  for (auto d : kDroppedCommands)
    if (d == name) return true;
  return false;
}

// Index just past a balanced group whose opening delimiter is at `i`, or npos.
std::size_t skip_balanced(std::string_view s, std::size_t i, char open, char close) {
  int depth = 0;
  for (std::size_t k = i; k < s.size(); ++k) {
    if (s[k] == '\\') {
      ++k;
      continue;
    }
    if (s[k] == open) ++depth;
    if (s[k] == close && --depth == 0) return k + 1;
  }
  return std::string_view::npos;
}

std::string drop_reference_commands(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '\\') {
      out += s[i++];
      continue;
    }
    if (i + 1 < s.size() && !is_letter(s[i + 1])) {
      out += s[i];
      out += s[i + 1];
      i += 2;
      continue;
    }
    std::size_t j = i + 1;
    while (j < s.size() && is_letter(s[j])) ++j;
    const std::string_view name = s.substr(i + 1, j - i - 1);
    if (!is_dropped(name)) {
      out.append(s.substr(i, j - i));
      i = j;
      continue;
    }
    std::size_t k = j;
    if (k < s.size() && s[k] == '*') ++k;
    for (int opt = 0; opt < 2; ++opt) {
      std::size_t m = k;
      while (m < s.size() && is_space(s[m])) ++m;
      if (m < s.size() && s[m] == '[') {
        const std::size_t e = skip_balanced(s, m, '[', ']');
        if (e == std::string_view::npos) break;
        k = e;
      }
    }
    std::size_t m = k;
    while (m < s.size() && is_space(s[m])) ++m;
    if (m < s.size() && s[m] == '{') {
      const std::size_t e = skip_balanced(s, m, '{', '}');
      if (e == std::string_view::npos) throw Error(ErrorKind::MalformedSource, "unbalanced argument to \\" + std::string(name));
      k = e;
    }
    i = k;
  }
  return out;
}

void check_balanced(std::string_view s) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\') {
      ++i;
      continue;
    }
    if (s[i] == '{') ++depth;
    if (s[i] == '}' && --depth < 0) throw Error(ErrorKind::MalformedSource, "unbalanced '}'");
  }
  if (depth != 0) throw Error(ErrorKind::MalformedSource, "unbalanced '{'");
}

}  // namespace

std::string strip_comments(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    const char c = raw[i];
    if (c == '\\') {
      const std::size_t len =
          i + 1 < raw.size() ? 1 + detail::utf8_length(static_cast<unsigned char>(raw[i + 1])) : 1;
      out.append(raw.substr(i, len));
      i += len;
      continue;
    }
    if (c == '%') {
      while (i < raw.size() && raw[i] != '\n') ++i;
      if (i < raw.size()) ++i;
      while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t')) ++i;
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

std::string normalize_table_source(std::string_view raw) {
  const std::string text = strip_comments(raw);
  const std::string_view sv = text;
  const std::size_t begin = sv.find(kBegin);
  if (begin == std::string_view::npos) throw Error(ErrorKind::MalformedSource, "no \\begin{tabular}");
  const std::size_t end = sv.find(kEnd, begin);
  if (end == std::string_view::npos) throw Error(ErrorKind::MalformedSource, "missing \\end{tabular}");
  const std::size_t inner = sv.find(kBegin, begin + kBegin.size());
  if (inner != std::string_view::npos && inner < end)
    throw Error(ErrorKind::MalformedSource, "nested tabular environments are not supported");
  const std::string_view block = sv.substr(begin, end + kEnd.size() - begin);
  std::string cleaned = drop_reference_commands(block);
  check_balanced(cleaned);
  return collapse_whitespace(cleaned);
}

}  // namespace tablatex
