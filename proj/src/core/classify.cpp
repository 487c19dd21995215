#include "tablatex/classify.hpp"

#include <cctype>

#include "core/lexer.hpp"

namespace tablatex {

const char* to_string(TokenCategory c) {
  switch (c) {
    case TokenCategory::AN: return "AN";
    case TokenCategory::LT: return "LT";
    case TokenCategory::LS: return "LS";
    case TokenCategory::NLS: return "NLS";
    case TokenCategory::OTHER: return "OTHER";
  }
  return "OTHER";
}

TokenCategory classify_token(const Token& tok) {
  switch (tok.kind) {
    case TokenKind::Delimiter:
    case TokenKind::ColumnSep:
    case TokenKind::RowSep:
    case TokenKind::Special:
      return TokenCategory::OTHER;
    default:
      break;
  }
  const std::string& t = tok.text;
  if (t == kDelimiter || t == kColumnSep || t == kRowSep) return TokenCategory::OTHER;
  if (t.size() > 1 && t[0] == '\\') {
    bool word = true;
    for (std::size_t i = 1; i < t.size(); ++i) word = word && std::isalpha(static_cast<unsigned char>(t[i]));
    if (word) return TokenCategory::LT;
    return TokenCategory::LS;
  }
  if (detail::is_ascii_alnum(t)) return TokenCategory::AN;
  return TokenCategory::NLS;
}

}  // namespace tablatex
