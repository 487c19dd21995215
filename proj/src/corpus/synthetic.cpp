#include "tablatex/corpus/synthetic.hpp"

#include <cctype>

#include "tablatex/error.hpp"
#include "tablatex/normalize.hpp"

namespace tablatex::corpus {

namespace {

enum class VRules { None, All, Outer };
enum class HRules { None, Every, Booktabs };

std::string word(Rng& rng, const SyntheticSpec& spec) {
  const int n = rng.uniform_int(spec.min_word_len, spec.max_word_len);
  std::string w;
  for (int i = 0; i < n; ++i)
    w += spec.alphabet[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(spec.alphabet.size()) - 1))];
  return w;
}

std::string text(Rng& rng, const SyntheticSpec& spec) {
  const int n = rng.uniform_int(1, spec.max_words);
  std::string t;
  for (int i = 0; i < n; ++i) t += (i ? " " : "") + word(rng, spec);
  if (rng.bernoulli(spec.bold_probability)) t = "\\textbf{" + t + "}";
  return t;
}

char align(Rng& rng) { return "lcr"[rng.uniform_int(0, 2)]; }

}  // namespace

void SyntheticSpec::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::ConfigError, "synthetic spec: " + what); };
  if (min_rows < 1 || max_rows < min_rows) bad("row range");
  if (min_cols < 1 || max_cols < min_cols) bad("column range");
  if (min_word_len < 1 || max_word_len < min_word_len || max_words < 1) bad("word lengths");
  if (alphabet.empty()) bad("empty alphabet");
  for (char c : alphabet)
    if (!std::isalnum(static_cast<unsigned char>(c))) bad("alphabet must be ASCII letters and digits");
  for (double p : {span_probability, bold_probability, empty_probability})
    if (!(p >= 0 && p <= 1)) bad("probabilities must lie in [0, 1]");
}

SyntheticTable generate_synthetic_table(Rng& rng, const SyntheticSpec& spec) {
  SyntheticTable t;
  t.n_rows = rng.uniform_int(spec.min_rows, spec.max_rows);
  t.n_cols = rng.uniform_int(spec.min_cols, spec.max_cols);
  const auto vrules = static_cast<VRules>(rng.uniform_int(0, 2));
  const auto hrules = static_cast<HRules>(rng.uniform_int(0, 2));

  std::string preamble;
  for (int c = 0; c < t.n_cols; ++c) {
    if (vrules == VRules::All || (vrules == VRules::Outer && c == 0)) preamble += '|';
    preamble += align(rng);
  }
  if (vrules != VRules::None) preamble += '|';

  // cells[r][c]; covered cells of a \multicolumn are erased afterwards.
  std::vector<std::vector<std::string>> cells(static_cast<std::size_t>(t.n_rows));
  for (auto& row : cells)
    for (int c = 0; c < t.n_cols; ++c) row.push_back(rng.bernoulli(spec.empty_probability) ? "" : text(rng, spec));

  const bool can_mc = t.n_cols >= 2, can_mr = t.n_rows >= 2;
  if ((can_mc || can_mr) && rng.bernoulli(spec.span_probability)) {
    const bool mc = can_mc && (!can_mr || rng.bernoulli(0.5));
    if (mc) {
      const int c = rng.uniform_int(0, t.n_cols - 2);
      const int size = rng.uniform_int(2, t.n_cols - c);
      const int r = rng.uniform_int(0, t.n_rows - 1);
      std::string pos(1, align(rng));
      if (vrules == VRules::All) pos = "|" + pos + "|";
      auto& row = cells[static_cast<std::size_t>(r)];
      row[static_cast<std::size_t>(c)] =
          "\\multicolumn{" + std::to_string(size) + "}{" + pos + "}{" + text(rng, spec) + "}";
      row.erase(row.begin() + c + 1, row.begin() + c + size);
      t.spans.push_back(Span{SpanKind::MultiColumn, size, r, c});
    } else {
      const int r = rng.uniform_int(0, t.n_rows - 2);
      const int size = rng.uniform_int(2, t.n_rows - r);
      const int c = rng.uniform_int(0, t.n_cols - 1);
      cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
          "\\multirow{" + std::to_string(size) + "}{*}{" + text(rng, spec) + "}";
      for (int k = 1; k < size; ++k) cells[static_cast<std::size_t>(r + k)][static_cast<std::size_t>(c)].clear();
      t.spans.push_back(Span{SpanKind::MultiRow, size, r, c});
    }
  }

  std::string body;
  if (hrules == HRules::Every) body += "\\hline ";
  if (hrules == HRules::Booktabs) body += "\\toprule ";
  for (int r = 0; r < t.n_rows; ++r) {
    const auto& row = cells[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < row.size(); ++c) body += (c ? " & " : "") + row[c];
    body += " \\\\ ";
    if (hrules == HRules::Every) body += "\\hline ";
    if (hrules == HRules::Booktabs && r == 0 && t.n_rows > 1) body += "\\midrule ";
    if (hrules == HRules::Booktabs && r == t.n_rows - 1) body += "\\bottomrule ";
  }
  t.source = normalize_table_source("\\begin{tabular}{" + preamble + "} " + body + "\\end{tabular}");
  return t;
}

std::vector<SyntheticTable> generate_synthetic_tables(std::uint64_t seed, const SyntheticSpec& spec,
                                                      std::size_t count) {
  spec.validate();
  Rng rng(seed);
  std::vector<SyntheticTable> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_synthetic_table(rng, spec));
  return out;
}

}  // namespace tablatex::corpus
