#include "tablatex/token.hpp"

#include <cctype>
#include <fstream>

#include "tablatex/error.hpp"

namespace tablatex {

const char* to_string(Task task) { return task == Task::TSR ? "tsr" : "locr"; }

Task parse_task(std::string_view name) {
  if (name == "tsr" || name == "TSR") return Task::TSR;
  if (name == "locr" || name == "LOCR" || name == "l-ocr") return Task::LOCR;
  throw Error(ErrorKind::ConfigError, "unknown task '" + std::string(name) + "'");
}

namespace {

bool is_special_text(std::string_view t) {
  return t == kPadText || t == kStartText || t == kEndText || t == kUnkText || t == kLatexMask;
}

}  // namespace

TokenKind infer_kind(std::string_view text, Task task) {
  if (is_special_text(text)) return TokenKind::Special;
  if (text == kColumnSep) return TokenKind::ColumnSep;
  if (text == kRowSep) return TokenKind::RowSep;
  if (task == Task::TSR) {
    if (text == kCell) return TokenKind::CellPlaceholder;
    if (text == "c" || text == "l" || text == "r" || text == "|") return TokenKind::AlignSpec;
    if (text.size() == 1 && std::isdigit(static_cast<unsigned char>(text[0])))
      return TokenKind::Character;
    return TokenKind::StructureCommand;
  }
  if (text == kDelimiter) return TokenKind::Delimiter;
  if (text.size() > 1 && text[0] == '\\') return TokenKind::LatexCommand;
  return TokenKind::Character;
}

Token make_token(std::string text, Task task) {
  TokenKind kind = infer_kind(text, task);
  return Token{std::move(text), kind};
}

std::string to_line(const TokenSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (i) out += ' ';
    out += seq.tokens[i].text;
  }
  return out;
}

TokenSequence from_line(std::string_view line, Task task) {
  TokenSequence seq{task, {}};
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == '\n'))
      ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' && line[j] != '\n')
      ++j;
    if (j > i) seq.tokens.push_back(make_token(std::string(line.substr(i, j - i)), task));
    i = j;
  }
  return seq;
}

std::vector<TokenSequence> read_token_file(const std::string& path, Task task) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open token file " + path);
  std::vector<TokenSequence> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(from_line(line, task));
  return out;
}

void write_token_file(const std::string& path, const std::vector<TokenSequence>& seqs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write token file " + path);
  for (const auto& s : seqs) out << to_line(s) << '\n';
}

}  // namespace tablatex
