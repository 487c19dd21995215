#pragma once

// Deliberately naive reference implementations. They share no code with the
// production metrics and parsers, and exist only to cross-check them.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tablatex/metrics/metrics.hpp"
#include "tablatex/token.hpp"

namespace tablatex::verify {

// Longest common contiguous run by trying every pair of offsets.
std::size_t oracle_longest_run(const TokenSequence& pred, const TokenSequence& truth);
bool oracle_match_at_95(const TokenSequence& pred, const TokenSequence& truth);

// Edit distance by memoized recursion over the full (n+1) x (m+1) table.
std::size_t oracle_levenshtein(const TokenSequence& a, const TokenSequence& b);

struct GridCounts {
  int n_rows = 0;
  int n_cols = 0;
};

// Replays a TSR stream into a row/column cursor; nullopt when the stream
// has no valid column spec or a malformed span.
std::optional<GridCounts> oracle_grid(const TokenSequence& tsr);

// Span sizes by direct scanning; malformed arguments count as 0.
std::vector<int> oracle_span_sizes(const TokenSequence& tsr, const std::string& command);

// "AN" | "LT" | "LS" | "NLS" | "OTHER" from the token text alone.
std::string oracle_category(const std::string& text);

// Every metric of the task's report, recomputed per sample from the
// functions above.
std::map<std::string, metrics::MetricValue> oracle_evaluate(std::span<const metrics::Pair> pairs, Task task);

// Outermost tabular blocks by an explicit stack over begin/end events.
std::vector<std::string> oracle_extract(const std::string& document);

}  // namespace tablatex::verify
