#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tablatex {

enum class Task { TSR, LOCR };

const char* to_string(Task task);
Task parse_task(std::string_view name);  // "tsr" | "locr"

enum class TokenKind {
  StructureCommand,
  AlignSpec,
  CellPlaceholder,
  Character,
  LatexCommand,
  Delimiter,
  ColumnSep,
  RowSep,
  Special,
};

// UTF-8 encoding of U+00A6, the L-OCR word delimiter.
inline constexpr std::string_view kDelimiter = "\xC2\xA6";
inline constexpr std::string_view kCell = "CELL";
inline constexpr std::string_view kColumnSep = "&";
inline constexpr std::string_view kRowSep = "\\\\";
inline constexpr std::string_view kOpenBrace = "\\{";
inline constexpr std::string_view kCloseBrace = "\\}";
inline constexpr std::string_view kLatexMask = "\\LATEX_TOKEN";

inline constexpr std::string_view kPadText = "<pad>";
inline constexpr std::string_view kStartText = "<s>";
inline constexpr std::string_view kEndText = "</s>";
inline constexpr std::string_view kUnkText = "<unk>";

struct Token {
  std::string text;
  TokenKind kind = TokenKind::Character;

  friend bool operator==(const Token& a, const Token& b) = default;
};

struct TokenSequence {
  Task task = Task::TSR;
  std::vector<Token> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  const Token& operator[](std::size_t i) const { return tokens[i]; }

  friend bool operator==(const TokenSequence& a, const TokenSequence& b) = default;
};

// Kind a bare token text carries within a task's stream. Used when reading
// serialized sequences back in.
TokenKind infer_kind(std::string_view text, Task task);

Token make_token(std::string text, Task task);

// One sample per line, tokens joined by single spaces.
std::string to_line(const TokenSequence& seq);
TokenSequence from_line(std::string_view line, Task task);

std::vector<TokenSequence> read_token_file(const std::string& path, Task task);
void write_token_file(const std::string& path, const std::vector<TokenSequence>& seqs);

}  // namespace tablatex
