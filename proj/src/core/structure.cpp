#include "tablatex/structure.hpp"

#include <cctype>
#include <optional>

#include "tablatex/error.hpp"

namespace tablatex {

namespace {

struct TokGroup {
  std::size_t begin;  // first interior token
  std::size_t end;    // matching close brace
};

// Group opened at tokens[i]; nullopt when tokens[i] is not "\{" or the group
// never closes.
std::optional<TokGroup> token_group(const std::vector<Token>& toks, std::size_t i) {
  if (i >= toks.size() || toks[i].text != kOpenBrace) return std::nullopt;
  int depth = 0;
  for (std::size_t k = i; k < toks.size(); ++k) {
    if (toks[k].text == kOpenBrace) ++depth;
    if (toks[k].text == kCloseBrace && --depth == 0) return TokGroup{i + 1, k};
  }
  return std::nullopt;
}

std::optional<int> group_number(const std::vector<Token>& toks, const TokGroup& g) {
  if (g.begin == g.end) return std::nullopt;
  int v = 0;
  for (std::size_t k = g.begin; k < g.end; ++k) {
    const auto& t = toks[k].text;
    if (t.size() != 1 || !std::isdigit(static_cast<unsigned char>(t[0]))) return std::nullopt;
    v = v * 10 + (t[0] - '0');
    if (v > 100000) return std::nullopt;
  }
  return v;
}

class BodyParser {
 public:
  BodyParser(const std::vector<Token>& toks, TableStructure& st) : toks_(toks), st_(st) {}

  void run(std::size_t begin) {
    int row = 0, col = 0, width = 1;
    bool content_after_sep = false;
    std::size_t i = begin;
    while (i < toks_.size()) {
      const auto& t = toks_[i].text;
      if (t == kColumnSep) {
        col += width;
        width = 1;
        ++i;
      } else if (t == kRowSep) {
        ++row;
        col = 0;
        width = 1;
        content_after_sep = false;
        ++i;
      } else if (t == kCell) {
        content_after_sep = true;
        ++i;
      } else if (t == "\\multicolumn" || t == "\\multirow") {
        i = span(i, row, col, width);
        content_after_sep = true;
      } else if (t == "\\hspace") {
        auto g = token_group(toks_, i + 1);
        i = g ? g->end + 1 : i + 1;
      } else {
        ++i;
      }
    }
    st_.n_rows = row + (content_after_sep ? 1 : 0);
  }

 private:
  std::size_t span(std::size_t i, int row, int col, int& width) {
    const bool multicol = toks_[i].text == "\\multicolumn";
    auto count = token_group(toks_, i + 1);
    auto size = count ? group_number(toks_, *count) : std::nullopt;
    if (!size || *size < 1) throw Error(ErrorKind::InvalidSpan, toks_[i].text + " without a positive size");
    st_.spans.push_back(Span{multicol ? SpanKind::MultiColumn : SpanKind::MultiRow, *size, row, col});
    if (multicol) width = *size;
    std::size_t next = count->end + 1;
    for (int arg = 0; arg < 2; ++arg) {
      auto g = token_group(toks_, next);
      if (!g) throw Error(ErrorKind::InvalidSpan, toks_[i].text + " missing arguments");
      if (arg == 1) nested(g->begin, g->end, row, col);
      next = g->end + 1;
    }
    return next;
  }

  // Spans nested inside another span's text argument share its anchor cell.
  void nested(std::size_t begin, std::size_t end, int row, int col) {
    for (std::size_t k = begin; k < end;) {
      const auto& t = toks_[k].text;
      if (t == "\\multicolumn" || t == "\\multirow") {
        int ignored = 1;
        k = span(k, row, col, ignored);
      } else {
        ++k;
      }
    }
  }

  const std::vector<Token>& toks_;
  TableStructure& st_;
};

}  // namespace

TableStructure parse_structure(const TokenSequence& seq) {
  if (seq.task != Task::TSR) throw Error(ErrorKind::TaskMismatch, "parse_structure requires a TSR sequence");
  const auto& toks = seq.tokens;
  auto pre = token_group(toks, 0);
  if (!pre) throw Error(ErrorKind::NoPreamble, "sequence does not begin with a column specification");
  TableStructure st;
  int rules = 0;
  for (std::size_t k = pre->begin; k < pre->end; ++k) {
    const auto& t = toks[k].text;
    if (t == "|") {
      ++rules;
    } else if (t == "c" || t == "l" || t == "r") {
      st.column_alignments.push_back(ColumnAlignment{t[0], rules});
      rules = 0;
    } else {
      throw Error(ErrorKind::NoPreamble, "invalid column specifier '" + t + "'");
    }
  }
  st.trailing_rules = rules;
  st.n_cols = static_cast<int>(st.column_alignments.size());
  BodyParser(toks, st).run(pre->end + 1);
  for (const auto& s : st.spans)
    if (s.col >= st.n_cols) throw Error(ErrorKind::InvalidSpan, "span anchored outside the column range");
  return st;
}

std::vector<int> span_sizes(const TokenSequence& seq, SpanKind kind) {
  const std::string_view name = kind == SpanKind::MultiColumn ? "\\multicolumn" : "\\multirow";
  std::vector<int> out;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (seq.tokens[i].text != name) continue;
    auto g = token_group(seq.tokens, i + 1);
    auto v = g ? group_number(seq.tokens, *g) : std::nullopt;
    out.push_back(v.value_or(0));
  }
  return out;
}

}  // namespace tablatex
