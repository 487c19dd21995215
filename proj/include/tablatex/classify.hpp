#pragma once

#include "tablatex/token.hpp"

namespace tablatex {

// Content categories of L-OCR tokens. OTHER covers tokenization artifacts
// (delimiter, separators, specials) and is excluded from the category metrics.
enum class TokenCategory { AN, LT, LS, NLS, OTHER };

const char* to_string(TokenCategory c);

// AN: one ASCII letter or digit. LT: backslash + letters (\textbf, \times).
// LS: backslash + one non-letter (\%, \$, \{). NLS: any other single symbol.
TokenCategory classify_token(const Token& tok);

}  // namespace tablatex
