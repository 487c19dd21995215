#pragma once

#include <string>
#include <vector>

#include "tablatex/token.hpp"

namespace tablatex {

// Detokenized non-empty cells of an L-OCR stream in reading order, split at
// top-level `&` and `\\`.
std::vector<std::string> content_cells(const TokenSequence& content);

// Substitutes the content cells, in reading order, for the CELL placeholders
// of the structure stream and returns a complete
// \begin{tabular}...\end{tabular} block. Throws CellCountMismatch when the
// two streams disagree on the number of cells.
std::string merge_tsr_locr(const TokenSequence& structure, const TokenSequence& content);

}  // namespace tablatex
