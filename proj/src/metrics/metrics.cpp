#include <algorithm>

#include "tablatex/error.hpp"
#include "tablatex/metrics/metrics.hpp"
#include "tablatex/structure.hpp"

namespace tablatex::metrics {

namespace {

void require_same_task(const TokenSequence& pred, const TokenSequence& truth) {
  if (pred.task != truth.task)
    throw Error(ErrorKind::TaskMismatch,
                std::string("prediction is ") + to_string(pred.task) + ", truth is " + to_string(truth.task));
}

void require_tsr(const TokenSequence& pred, const TokenSequence& truth) {
  require_same_task(pred, truth);
  if (truth.task != Task::TSR) throw Error(ErrorKind::TaskMismatch, "structure metrics need TSR sequences");
}

bool same_text(const Token& a, const Token& b) { return a.text == b.text; }

std::optional<bool> span_match(const TokenSequence& pred, const TokenSequence& truth, SpanKind kind) {
  require_tsr(pred, truth);
  const auto want = span_sizes(truth, kind);
  if (want.empty()) return std::nullopt;
  return span_sizes(pred, kind) == want;
}

}  // namespace

bool exact_match(const TokenSequence& pred, const TokenSequence& truth) {
  require_same_task(pred, truth);
  return std::equal(pred.tokens.begin(), pred.tokens.end(), truth.tokens.begin(), truth.tokens.end(), same_text);
}

std::size_t longest_common_run(const TokenSequence& pred, const TokenSequence& truth) {
  // run[j] = length of the common run ending at pred[i-1], truth[j-1].
  std::vector<std::size_t> run(truth.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= pred.size(); ++i) {
    for (std::size_t j = truth.size(); j >= 1; --j) {
      run[j] = same_text(pred[i - 1], truth[j - 1]) ? run[j - 1] + 1 : 0;
      best = std::max(best, run[j]);
    }
  }
  return best;
}

bool match_at_95(const TokenSequence& pred, const TokenSequence& truth) {
  require_same_task(pred, truth);
  if (truth.empty()) return pred.empty();
  const std::size_t run = longest_common_run(pred, truth);
  // A run over the whole truth always qualifies; shorter runs need
  // (run - 1) >= 0.95 * |truth|.
  return run == truth.size() || (run > 0 && 100 * (run - 1) >= 95 * truth.size());
}

bool row_match(const TokenSequence& pred, const TokenSequence& truth) {
  require_tsr(pred, truth);
  const int want = parse_structure(truth).n_rows;
  try {
    return parse_structure(pred).n_rows == want;
  } catch (const Error&) {
    return false;
  }
}

bool col_match(const TokenSequence& pred, const TokenSequence& truth) {
  require_tsr(pred, truth);
  const int want = parse_structure(truth).n_cols;
  try {
    return parse_structure(pred).n_cols == want;
  } catch (const Error&) {
    return false;
  }
}

std::optional<bool> multicolumn_match(const TokenSequence& pred, const TokenSequence& truth) {
  return span_match(pred, truth, SpanKind::MultiColumn);
}

std::optional<bool> multirow_match(const TokenSequence& pred, const TokenSequence& truth) {
  return span_match(pred, truth, SpanKind::MultiRow);
}

std::vector<Token> filter_category(const TokenSequence& seq, TokenCategory cat) {
  std::vector<Token> out;
  for (const auto& t : seq.tokens)
    if (classify_token(t) == cat) out.push_back(t);
  return out;
}

bool category_match(const TokenSequence& pred, const TokenSequence& truth, TokenCategory cat) {
  require_same_task(pred, truth);
  const auto a = filter_category(pred, cat);
  const auto b = filter_category(truth, cat);
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), same_text);
}

}  // namespace tablatex::metrics
