#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tablatex::detail {

enum class LexKind { ControlWord, ControlSymbol, RowBreak, Char, Space, BeginGroup, EndGroup, Align };

struct Lexeme {
  LexKind kind;
  std::string text;
};

// Byte length of the UTF-8 sequence starting with `lead` (1 for invalid bytes).
std::size_t utf8_length(unsigned char lead);

std::vector<Lexeme> lex(std::string_view src);

struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

class LexCursor {
 public:
  explicit LexCursor(const std::vector<Lexeme>& lx, std::size_t begin = 0, std::size_t end = npos)
      : lx_(lx), pos_(begin), end_(end == npos ? lx.size() : end) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool done() const { return pos_ >= end_; }
  const Lexeme& peek() const { return lx_[pos_]; }
  const Lexeme& next() { return lx_[pos_++]; }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  std::size_t end() const { return end_; }

  void skip_spaces();
  // Reads a balanced `{...}` group after optional spaces; returns the interior
  // lexeme range, or nullopt (cursor unchanged) when no group follows.
  // Throws UnbalancedBraces if the group never closes.
  std::optional<Range> group();
  // Reads a `[...]` optional argument after optional spaces.
  std::optional<Range> bracket();
  // Reads `(...)` (booktabs trim specs).
  std::optional<Range> paren();
  // Skips a balanced group starting at the current BeginGroup lexeme.
  void skip_group();

 private:
  std::optional<Range> delimited(const char* open, const char* close);

  const std::vector<Lexeme>& lx_;
  std::size_t pos_;
  std::size_t end_;
};

std::string concat(const std::vector<Lexeme>& lx, Range r);

bool is_ascii_alnum(std::string_view text);

}  // namespace tablatex::detail

namespace tablatex::detail {

struct TabularParts {
  std::vector<Lexeme> lx;
  Range preamble;
  Range body;
};

// Splits "\begin{tabular}[pos]{spec} body \end{tabular}" or bare
// "{spec} body" into lexeme ranges. Throws MalformedSource / NoPreamble.
TabularParts split_tabular(std::string_view src);

}  // namespace tablatex::detail
