#pragma once

#include <string>
#include <string_view>

namespace tablatex {

// Removes TeX comments (`%` through end of line, honouring `\%`).
std::string strip_comments(std::string_view raw);

// Collapses every whitespace run to one space and trims both ends.
std::string collapse_whitespace(std::string_view s);

// Extracts the first \begin{tabular}...\end{tabular} block of `raw` and
// canonicalizes it: comments dropped, \cite/\ref/\label (and their common
// variants) removed together with their arguments, whitespace collapsed.
// Idempotent. Throws MalformedSource on unbalanced braces, a missing
// \end{tabular}, or a nested tabular.
std::string normalize_table_source(std::string_view raw);

}  // namespace tablatex
