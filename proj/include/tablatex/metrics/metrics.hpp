#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tablatex/classify.hpp"
#include "tablatex/token.hpp"

namespace tablatex::metrics {

// All comparisons take (prediction, ground truth). Mixed task tags throw
// TaskMismatch.

bool exact_match(const TokenSequence& pred, const TokenSequence& truth);

// Length of the longest common contiguous run of tokens.
std::size_t longest_common_run(const TokenSequence& pred, const TokenSequence& truth);

// True iff the longest common run L covers the whole truth or satisfies
// L - 1 >= 0.95 * |truth|, evaluated exactly in integers.
bool match_at_95(const TokenSequence& pred, const TokenSequence& truth);

// Row / column count agreement. A prediction that does not parse compares
// unequal. Throws when the ground truth does not parse.
bool row_match(const TokenSequence& pred, const TokenSequence& truth);
bool col_match(const TokenSequence& pred, const TokenSequence& truth);

// nullopt when the truth carries no span of that kind; otherwise whether the
// ordered lists of span sizes agree.
std::optional<bool> multicolumn_match(const TokenSequence& pred, const TokenSequence& truth);
std::optional<bool> multirow_match(const TokenSequence& pred, const TokenSequence& truth);

std::vector<Token> filter_category(const TokenSequence& seq, TokenCategory cat);
bool category_match(const TokenSequence& pred, const TokenSequence& truth, TokenCategory cat);

// Token-level edit distance.
std::size_t levenshtein(std::span<const Token> a, std::span<const Token> b);
std::size_t levenshtein(const TokenSequence& a, const TokenSequence& b);

struct Pair {
  TokenSequence pred;
  TokenSequence truth;
};

struct MetricValue {
  double value = 0.0;
  std::size_t eligible = 0;
};

// Ordered by name; TSR reports carry EA, E95, RA, CA, MCR, MRR and LOCR
// reports EA, E95, AN, LT, LS, NLS, ALD.
struct MetricReport {
  Task task = Task::TSR;
  std::size_t total = 0;
  std::map<std::string, MetricValue> metrics;
  // Prediction parse failures, span micro-averages, etc.
  std::map<std::string, double> diagnostics;

  const MetricValue& at(const std::string& name) const { return metrics.at(name); }
  std::vector<std::string> names() const;
};

// The metric names a task's report carries, in table order.
const std::vector<std::string>& metric_names(Task task);

MetricReport evaluate_corpus(std::span<const Pair> pairs, Task task);

std::string to_json(const MetricReport& report);

}  // namespace tablatex::metrics
