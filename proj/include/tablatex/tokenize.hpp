#pragma once

#include <string>
#include <string_view>

#include "tablatex/token.hpp"

namespace tablatex {

// Structure stream: the column-spec preamble (\{ c | ... \}), rule commands,
// \multicolumn/\multirow with digit and alignment arguments, separators, and
// one CELL per non-empty content region. Accepts a normalized
// \begin{tabular}...\end{tabular} block or the bare "{spec} body" form that
// `detokenize` produces.
//
// Throws UnbalancedBraces, or UnknownStructure when the structure needs a
// token outside the TSR vocabulary (p{..} columns, \cline, ...).
TokenSequence tokenize_tsr(std::string_view normalized);

// Content stream: preamble, \end{tabular}, rule commands and span wrappers
// removed; one token per character or backslash command; `&` and `\\` kept;
// a ¦ closes each word.
TokenSequence tokenize_locr(std::string_view normalized);

// L-OCR tokenization of bare content (no preamble), e.g. the output of
// `detokenize` on an L-OCR sequence.
TokenSequence tokenize_locr_content(std::string_view content);

// Inverse of the tokenizers up to whitespace. TSR yields the bare
// "{spec} body" form; L-OCR yields the content with & and \\ separators.
std::string detokenize(const TokenSequence& seq);

// "\begin{tabular}" + bare + " \end{tabular}".
std::string wrap_tabular(std::string_view bare);

}  // namespace tablatex
