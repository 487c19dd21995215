#pragma once

#include <vector>

#include "tablatex/token.hpp"

namespace tablatex {

struct ColumnAlignment {
  char align = 'c';      // 'c' | 'l' | 'r'
  int rules_before = 0;  // vertical rules immediately left of this column

  friend bool operator==(const ColumnAlignment&, const ColumnAlignment&) = default;
};

enum class SpanKind { MultiColumn, MultiRow };

struct Span {
  SpanKind kind = SpanKind::MultiColumn;
  int size = 1;
  int row = 0;
  int col = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

struct TableStructure {
  std::vector<ColumnAlignment> column_alignments;
  int trailing_rules = 0;  // vertical rules right of the last column
  int n_rows = 0;
  int n_cols = 0;
  std::vector<Span> spans;
};

// Throws NoPreamble when the sequence does not open with a column spec,
// InvalidSpan for a malformed or out-of-range span.
TableStructure parse_structure(const TokenSequence& seq);

// Ordered first-argument sizes of every \multicolumn (or \multirow) in the
// stream. Read directly from tokens so it also works on sequences that fail
// `parse_structure`; a malformed argument is reported as 0.
std::vector<int> span_sizes(const TokenSequence& seq, SpanKind kind);

}  // namespace tablatex
