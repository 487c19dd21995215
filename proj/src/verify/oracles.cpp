#include "tablatex/verify/oracles.hpp"

#include <algorithm>
#include <functional>
#include <regex>

#include "tablatex/normalize.hpp"

namespace tablatex::verify {

std::size_t oracle_longest_run(const TokenSequence& pred, const TokenSequence& truth) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (std::size_t j = 0; j < truth.size(); ++j) {
      std::size_t l = 0;
      while (i + l < pred.size() && j + l < truth.size() && pred[i + l].text == truth[j + l].text) ++l;
      if (l > best) best = l;
    }
  return best;
}

bool oracle_match_at_95(const TokenSequence& pred, const TokenSequence& truth) {
  if (truth.size() == 0) return pred.size() == 0;
  // Whole truth contained in the prediction.
  const auto& a = pred.tokens;
  const auto& b = truth.tokens;
  if (std::search(a.begin(), a.end(), b.begin(), b.end(),
                  [](const Token& x, const Token& y) { return x.text == y.text; }) != a.end())
    return true;
  const std::size_t run = oracle_longest_run(pred, truth);
  // l = run - 1 must satisfy l >= 19/20 * n2.
  return run >= 1 && 20 * (run - 1) >= 19 * truth.size();
}

std::size_t oracle_levenshtein(const TokenSequence& a, const TokenSequence& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<long>> memo(n + 1, std::vector<long>(m + 1, -1));
  std::function<long(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) -> long {
    if (i == 0) return static_cast<long>(j);
    if (j == 0) return static_cast<long>(i);
    long& slot = memo[i][j];
    if (slot >= 0) return slot;
    const long cost = a[i - 1].text == b[j - 1].text ? 0 : 1;
    slot = std::min({d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + cost});
    return slot;
  };
  return static_cast<std::size_t>(d(n, m));
}

namespace {

const std::string kOpen = "\\{", kClose = "\\}";

// Index of the brace closing the group opened at `i`, or npos.
std::size_t closing(const std::vector<std::string>& t, std::size_t i) {
  if (i >= t.size() || t[i] != kOpen) return std::string::npos;
  long depth = 0;
  for (std::size_t k = i; k < t.size(); ++k) {
    if (t[k] == kOpen) depth += 1;
    if (t[k] == kClose) {
      depth -= 1;
      if (depth == 0) return k;
    }
  }
  return std::string::npos;
}

// Value of a digit-only group interior, or -1.
long digits_value(const std::vector<std::string>& t, std::size_t open, std::size_t close) {
  if (close == open + 1) return -1;
  long v = 0;
  for (std::size_t k = open + 1; k < close; ++k) {
    if (t[k].size() != 1 || t[k][0] < '0' || t[k][0] > '9') return -1;
    v = v * 10 + (t[k][0] - '0');
    if (v > 100000) return -1;
  }
  return v;
}

std::vector<std::string> texts(const TokenSequence& s) {
  std::vector<std::string> out;
  for (const auto& t : s.tokens) out.push_back(t.text);
  return out;
}

struct Sim {
  const std::vector<std::string>& t;
  int n_cols;
  bool ok = true;

  // Reads a span at `i`; returns the index after it. Records its width.
  std::size_t span(std::size_t i, int col, int& width) {
    const bool multicol = t[i] == "\\multicolumn";
    const std::size_t c0 = closing(t, i + 1);
    if (c0 == std::string::npos) return fail(i);
    const long size = digits_value(t, i + 1, c0);
    if (size < 1 || col >= n_cols) return fail(i);
    if (multicol) width = static_cast<int>(size);
    const std::size_t c1 = closing(t, c0 + 1);
    if (c1 == std::string::npos) return fail(i);
    const std::size_t c2 = closing(t, c1 + 1);
    if (c2 == std::string::npos) return fail(i);
    for (std::size_t k = c1 + 2; k < c2;) {
      if (t[k] == "\\multicolumn" || t[k] == "\\multirow") {
        int ignored = 1;
        k = span(k, col, ignored);
        if (!ok) return k;
      } else {
        ++k;
      }
    }
    return c2 + 1;
  }

  std::size_t fail(std::size_t i) {
    ok = false;
    return i + 1;
  }
};

}  // namespace

std::optional<GridCounts> oracle_grid(const TokenSequence& tsr) {
  const auto t = texts(tsr);
  if (t.empty() || t[0] != kOpen) return std::nullopt;
  std::size_t end = 1;
  while (end < t.size() && t[end] != kClose) ++end;
  if (end == t.size()) return std::nullopt;
  GridCounts g;
  for (std::size_t k = 1; k < end; ++k) {
    if (t[k] == "c" || t[k] == "l" || t[k] == "r")
      ++g.n_cols;
    else if (t[k] != "|")
      return std::nullopt;
  }
  Sim sim{t, g.n_cols};
  int rows = 0, col = 0, width = 1;
  bool pending = false;
  for (std::size_t i = end + 1; i < t.size();) {
    if (t[i] == "&") {
      col += width;
      width = 1;
      ++i;
    } else if (t[i] == "\\\\") {
      ++rows;
      col = 0;
      width = 1;
      pending = false;
      ++i;
    } else if (t[i] == "CELL") {
      pending = true;
      ++i;
    } else if (t[i] == "\\multicolumn" || t[i] == "\\multirow") {
      i = sim.span(i, col, width);
      if (!sim.ok) return std::nullopt;
      pending = true;
    } else if (t[i] == "\\hspace") {
      const std::size_t c = closing(t, i + 1);
      i = c == std::string::npos ? i + 1 : c + 1;
    } else {
      ++i;
    }
  }
  g.n_rows = rows + (pending ? 1 : 0);
  return g;
}

std::vector<int> oracle_span_sizes(const TokenSequence& tsr, const std::string& command) {
  const auto t = texts(tsr);
  std::vector<int> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != command) continue;
    const std::size_t c = closing(t, i + 1);
    const long v = c == std::string::npos ? -1 : digits_value(t, i + 1, c);
    out.push_back(v < 0 ? 0 : static_cast<int>(v));
  }
  return out;
}

std::string oracle_category(const std::string& text) {
  static const std::vector<std::string> other{"\xC2\xA6", "&", "\\\\", "<pad>", "<s>", "</s>", "<unk>",
                                              "\\LATEX_TOKEN"};
  for (const auto& o : other)
    if (text == o) return "OTHER";
  if (text.size() >= 2 && text[0] == '\\') {
    for (std::size_t i = 1; i < text.size(); ++i) {
      const char c = text[i];
      if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))) return "LS";
    }
    return "LT";
  }
  if (text.size() == 1) {
    const char c = text[0];
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) return "AN";
  }
  return "NLS";
}

std::map<std::string, metrics::MetricValue> oracle_evaluate(std::span<const metrics::Pair> pairs, Task task) {
  std::map<std::string, double> sum;
  std::map<std::string, std::size_t> n;
  auto add = [&](const std::string& k, double v) {
    sum[k] += v;
    n[k] += 1;
  };
  for (const auto& p : pairs) {
    const auto a = texts(p.pred), b = texts(p.truth);
    add("EA", a == b ? 1.0 : 0.0);
    add("E95", oracle_match_at_95(p.pred, p.truth) ? 1.0 : 0.0);
    if (task == Task::TSR) {
      const auto gp = oracle_grid(p.pred), gt = oracle_grid(p.truth);
      add("RA", gp && gt && gp->n_rows == gt->n_rows ? 1.0 : 0.0);
      add("CA", gp && gt && gp->n_cols == gt->n_cols ? 1.0 : 0.0);
      for (const auto& [key, cmd] : {std::pair{"MCR", "\\multicolumn"}, std::pair{"MRR", "\\multirow"}}) {
        const auto want = oracle_span_sizes(p.truth, cmd);
        n[key];
        if (!want.empty()) add(key, oracle_span_sizes(p.pred, cmd) == want ? 1.0 : 0.0);
      }
    } else {
      for (const char* cat : {"AN", "LT", "LS", "NLS"}) {
        std::vector<std::string> fa, fb;
        for (const auto& x : a)
          if (oracle_category(x) == cat) fa.push_back(x);
        for (const auto& x : b)
          if (oracle_category(x) == cat) fb.push_back(x);
        add(cat, fa == fb ? 1.0 : 0.0);
      }
      add("ALD", static_cast<double>(oracle_levenshtein(p.pred, p.truth)));
    }
  }
  std::map<std::string, metrics::MetricValue> out;
  for (const auto& [k, cnt] : n) out[k] = {cnt ? sum[k] / static_cast<double>(cnt) : 0.0, cnt};
  return out;
}

std::vector<std::string> oracle_extract(const std::string& document) {
  const std::string text = strip_comments(document);
  static const std::regex event(R"(\\(begin|end)\{tabular\})");
  std::vector<std::string> out;
  std::vector<std::size_t> stack;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), event); it != std::sregex_iterator(); ++it) {
    const auto pos = static_cast<std::size_t>(it->position());
    if ((*it)[1] == "begin") {
      stack.push_back(pos);
    } else if (!stack.empty()) {
      const std::size_t start = stack.back();
      stack.pop_back();
      if (stack.empty()) out.push_back(text.substr(start, pos + static_cast<std::size_t>(it->length()) - start));
    }
  }
  return out;
}

}  // namespace tablatex::verify
