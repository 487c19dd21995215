#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "tablatex/core.hpp"

using namespace tablatex;

namespace {

TokenSequence tsr(const std::string& line) { return from_line(line, Task::TSR); }
TokenSequence locr(const std::string& line) { return from_line(line, Task::LOCR); }

// Reference comment stripper: line based, a `%` starts a comment when it is
// preceded by an even number of backslashes. A commented line swallows its
// newline and the next line's leading blanks.
std::string reference_strip(const std::string& s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '\n') {
      lines.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  std::string out;
  bool swallow_blanks = false;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    std::string line = lines[li];
    if (swallow_blanks) {
      std::size_t k = 0;
      while (k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
      line = line.substr(k);
    }
    std::size_t cut = std::string::npos;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] != '%') continue;
      std::size_t bs = 0;
      while (bs < i && line[i - 1 - bs] == '\\') ++bs;
      if (bs % 2 == 0) {
        cut = i;
        break;
      }
    }
    const bool last = li + 1 == lines.size();
    if (cut != std::string::npos) {
      out += line.substr(0, cut);
      swallow_blanks = true;
    } else {
      out += line;
      if (!last) out += '\n';
      swallow_blanks = false;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("normalize removes citations and is idempotent") {
  const std::string raw = "\\begin{tabular}{c} a \\cite{x} \\\\ \\end{tabular}";
  const std::string norm = normalize_table_source(raw);
  CHECK(norm == "\\begin{tabular}{c} a \\\\ \\end{tabular}");
  CHECK(normalize_table_source(norm) == norm);
  CHECK(normalize_table_source("\\begin{tabular}{c} x\\ref{t1} \\label{l} y~\\citep[p.~3]{a,b} \\end{tabular}") ==
        "\\begin{tabular}{c} x y~ \\end{tabular}");
}

TEST_CASE("normalize strips comments but keeps escaped percent") {
  CHECK(normalize_table_source("\\begin{tabular}{c} 5\\% % note\n\\end{tabular}") ==
        "\\begin{tabular}{c} 5\\% \\end{tabular}");
  CHECK(normalize_table_source("text before \\begin{tabular}{c}\n a \\\\% c\n b\n\\end{tabular} after") ==
        "\\begin{tabular}{c} a \\\\b \\end{tabular}");
}

TEST_CASE("comment stripping agrees with a line-based reference on random snippets") {
  std::mt19937 rng(20240611);
  const std::string alphabet = "ab %\\\n\t{}";
  for (int n = 0; n < 50; ++n) {
    std::uniform_int_distribution<int> len(5, 60), pick(0, static_cast<int>(alphabet.size()) - 1);
    std::string s;
    const int L = len(rng);
    for (int i = 0; i < L; ++i) s += alphabet[static_cast<std::size_t>(pick(rng))];
    CAPTURE(s);
    CHECK(strip_comments(s) == reference_strip(s));
  }
}

TEST_CASE("normalize error paths") {
  CHECK_THROWS_AS(normalize_table_source("\\begin{tabular}{c} a"), Error);
  CHECK_THROWS_AS(normalize_table_source("\\begin{tabular}{c} a % \\end{tabular}\n"), Error);
  CHECK_THROWS_AS(normalize_table_source("\\begin{tabular}{c} {a \\end{tabular}"), Error);
  CHECK_THROWS_AS(
      normalize_table_source("\\begin{tabular}{c} \\begin{tabular}{c} a \\end{tabular} \\end{tabular}"), Error);
  try {
    normalize_table_source("\\begin{tabular}{c} a} \\end{tabular}");
    FAIL("expected MalformedSource");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedSource);
  }
}

TEST_CASE("TSR tokenization of the four-column sample") {
  const auto seq = tokenize_tsr(normalize_table_source(fixtures::sample_source()));
  CHECK(to_line(seq) == fixtures::sample_tsr());
  const auto st = parse_structure(seq);
  CHECK(st.n_rows == 6);
  CHECK(st.n_cols == 4);
  CHECK(st.spans.empty());
  CHECK(st.column_alignments[1].rules_before == 2);
  CHECK(st.trailing_rules == 1);
}

TEST_CASE("TSR tokenization examples") {
  CHECK(to_line(tokenize_tsr("\\begin{tabular}{c} x \\end{tabular}")) == "\\{ c \\} CELL");
  const auto mc = tokenize_tsr("\\begin{tabular}{cc} \\multicolumn{2}{c}{T} \\\\ \\end{tabular}");
  CHECK(to_line(mc) == "\\{ c c \\} \\multicolumn \\{ 2 \\} \\{ c \\} \\{ CELL \\} \\\\");
  CHECK(detokenize(mc) == "{cc} \\multicolumn{2}{c}{CELL} \\\\");
  CHECK(tokenize_tsr(wrap_tabular(detokenize(mc))) == mc);
  CHECK(parse_structure(mc).n_cols == 2);

  CHECK(to_line(tokenize_tsr("\\begin{tabular}{*{3}{c|}} a & & b \\\\ \\toprule \\end{tabular}")) ==
        "\\{ c | c | c | \\} CELL & & CELL \\\\ \\toprule");
  const auto mr = tokenize_tsr("\\begin{tabular}{ll} \\multirow{12}{*}{\\textbf{x}} & y \\\\ & z \\end{tabular}");
  CHECK(to_line(mr) == "\\{ l l \\} \\multirow \\{ 1 2 \\} \\{ \\} \\{ CELL \\} & CELL \\\\ & CELL");
  CHECK(detokenize(mr) == "{ll} \\multirow{12}{*}{CELL} & CELL \\\\ & CELL");
  CHECK(tokenize_tsr(detokenize(mr)) == mr);
  CHECK(to_line(tokenize_tsr("\\begin{tabular}{c} \\hspace{5pt} a \\end{tabular}")) ==
        "\\{ c \\} \\hspace \\{ 5 \\} CELL");
}

TEST_CASE("TSR tokenization errors") {
  auto kind_of = [](const std::string& src) {
    try {
      tokenize_tsr(src);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::ConfigError;
  };
  CHECK(kind_of("\\begin{tabular}{p{3cm}c} a & b \\end{tabular}") == ErrorKind::UnknownStructure);
  CHECK(kind_of("\\begin{tabular}{cc} a & b \\\\ \\cline{1-2} \\end{tabular}") == ErrorKind::UnknownStructure);
  CHECK(kind_of("\\begin{tabular}{cc} \\multicolumn{x}{c}{a} \\end{tabular}") == ErrorKind::UnknownStructure);
  CHECK(kind_of("\\begin{tabular}{cc} {a & b \\end{tabular}") == ErrorKind::UnbalancedBraces);
  CHECK(kind_of("\\begin{tabular}{cc} a} & b \\end{tabular}") == ErrorKind::UnbalancedBraces);
}

TEST_CASE("TSR output stays inside the TSR vocabulary") {
  const auto vocab = Vocabulary::tsr();
  const auto seq = tokenize_tsr(
      "\\begin{tabular}{|l|r|} \\toprule \\multicolumn{2}{|c|}{\\multirow{2}{*}{t}} \\\\ \\midrule 3 & "
      "\\hspace{2mm}4 \\\\ \\bottomrule \\end{tabular}");
  for (const auto& t : seq.tokens) CHECK(vocab.contains(t.text));
  CHECK(vocab.size() == 26 + Vocabulary::kNumSpecial);
}

TEST_CASE("L-OCR tokenization of the four-column sample") {
  const auto seq = tokenize_locr(normalize_table_source(fixtures::sample_source()));
  CHECK(to_line(seq) == fixtures::sample_locr());
}

TEST_CASE("L-OCR tokenization examples") {
  CHECK(to_line(tokenize_locr("\\begin{tabular}{c} a \\end{tabular}")) == "a ¦");
  CHECK(to_line(tokenize_locr("\\begin{tabular}{c} $_{PFCVM}$ \\end{tabular}")) == "$ _ { P F C V M ¦ } $");
  CHECK(to_line(tokenize_locr("\\begin{tabular}{c} Accuracy (\\%) \\end{tabular}")) ==
        "A c c u r a c y ¦ ( \\% )");
  CHECK(to_line(tokenize_locr("\\begin{tabular}{cc} \\hline \\multicolumn{2}{c}{Search Strategies} \\\\ \\hline "
                              "(0.616, & $\\sigma$) \\end{tabular}")) ==
        "S e a r c h ¦ S t r a t e g i e s ¦ \\\\ ( 0 . 6 1 6 , ¦ & $ \\sigma $ )");
  CHECK(to_line(tokenize_locr("\\begin{tabular}{c} (\\%) x \\end{tabular}")) == "( \\% ) ¦ x ¦");
  CHECK_THROWS_AS(tokenize_locr("\\begin{tabular}{c} a} \\end{tabular}"), Error);
}

TEST_CASE("L-OCR detokenization") {
  CHECK(detokenize(locr("a ¦ b ¦")) == "a b");
  CHECK(detokenize(locr("R V M ¦ $ _ { P F C V M ¦ } $ & 8 5 ¦ \\\\")) == "RVM $_{PFCVM}$ & 85 \\\\");
  CHECK(detokenize(locr("\\alpha ¦ x ¦")) == "\\alpha x");
  CHECK(detokenize(locr("$ a ¦ $ b ¦")) == "$a$ b");
  const std::vector<std::string> contents = {
      "x^{2} + y",        "\\textbf{a b} c", "$a$, b", "{a }b",      "- 5 \\% (n)",
      "\\alpha{}x $\\beta$", "a~b", "--- & --",    "\\LATEX_TOKEN x \\\\ z"};
  for (const auto& c : contents) {
    CAPTURE(c);
    const auto once = tokenize_locr_content(c);
    CHECK(tokenize_locr_content(detokenize(once)) == once);
  }
}

TEST_CASE("structure parsing") {
  CHECK(parse_structure(tsr("\\{ c \\} CELL")).n_rows == 1);
  CHECK(parse_structure(tsr("\\{ c \\} CELL")).n_cols == 1);
  const auto st = parse_structure(tsr("\\{ c c \\} \\multicolumn \\{ 2 \\} \\{ c \\} \\{ CELL \\} \\\\ CELL & CELL"));
  CHECK(st.n_rows == 2);
  CHECK(st.n_cols == 2);
  REQUIRE(st.spans.size() == 1);
  CHECK(st.spans[0] == Span{SpanKind::MultiColumn, 2, 0, 0});
  CHECK(parse_structure(tsr("\\{ c c \\} CELL & CELL \\\\ \\hline")).n_rows == 1);
  CHECK(parse_structure(tsr("\\{ l \\}")).n_rows == 0);

  const auto mr = parse_structure(tsr("\\{ c c \\} CELL & \\multirow \\{ 2 \\} \\{ \\} \\{ CELL \\} \\\\ CELL &"));
  REQUIRE(mr.spans.size() == 1);
  CHECK(mr.spans[0] == Span{SpanKind::MultiRow, 2, 0, 1});
  CHECK(mr.n_rows == 2);

  auto kind_of = [](const std::string& line) {
    try {
      parse_structure(tsr(line));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::ConfigError;
  };
  CHECK(kind_of("CELL & CELL") == ErrorKind::NoPreamble);
  CHECK(kind_of("\\{ c c") == ErrorKind::NoPreamble);
  CHECK(kind_of("\\{ c \\} CELL & \\multicolumn \\{ 2 \\} \\{ c \\} \\{ CELL \\}") == ErrorKind::InvalidSpan);
  CHECK(kind_of("\\{ c \\} \\multicolumn \\{ \\} \\{ c \\} \\{ CELL \\}") == ErrorKind::InvalidSpan);
  CHECK_THROWS_AS(parse_structure(locr("a ¦")), Error);
}

TEST_CASE("span size extraction") {
  const auto seq =
      tsr("\\{ c c c \\} \\multicolumn \\{ 2 \\} \\{ c \\} \\{ CELL \\} & CELL \\\\ \\multicolumn \\{ 3 \\} \\{ l \\} "
          "\\{ \\multirow \\{ 4 \\} \\{ \\} \\{ CELL \\} \\}");
  CHECK(span_sizes(seq, SpanKind::MultiColumn) == std::vector<int>{2, 3});
  CHECK(span_sizes(seq, SpanKind::MultiRow) == std::vector<int>{4});
  CHECK(span_sizes(tsr("\\multicolumn c"), SpanKind::MultiColumn) == std::vector<int>{0});
}

TEST_CASE("token classification") {
  auto cls = [](const char* t) { return classify_token(make_token(t, Task::LOCR)); };
  CHECK(cls("\\textbf") == TokenCategory::LT);
  CHECK(cls("\\times") == TokenCategory::LT);
  CHECK(cls("\\%") == TokenCategory::LS);
  CHECK(cls("\\{") == TokenCategory::LS);
  CHECK(cls("9") == TokenCategory::AN);
  CHECK(cls("a") == TokenCategory::AN);
  CHECK(cls("=") == TokenCategory::NLS);
  CHECK(cls("$") == TokenCategory::NLS);
  CHECK(cls("{") == TokenCategory::NLS);
  CHECK(cls("¦") == TokenCategory::OTHER);
  CHECK(cls("&") == TokenCategory::OTHER);
  CHECK(cls("\\\\") == TokenCategory::OTHER);
  CHECK(cls("\\LATEX_TOKEN") == TokenCategory::OTHER);
  CHECK(cls("é") == TokenCategory::NLS);
}

TEST_CASE("classification partitions an L-OCR vocabulary") {
  const auto seq = tokenize_locr(normalize_table_source(fixtures::sample_source()));
  const std::vector<TokenSequence> corpus{seq};
  const auto vocab = Vocabulary::locr(corpus);
  std::map<TokenCategory, int> counts;
  for (int id = Vocabulary::kNumSpecial; id < vocab.size(); ++id) ++counts[classify_token(make_token(vocab.text(id), Task::LOCR))];
  int total = 0;
  for (auto& [c, n] : counts) total += n;
  CHECK(total == vocab.size() - Vocabulary::kNumSpecial);
  CHECK(counts[TokenCategory::AN] > 0);
  CHECK(counts[TokenCategory::LT] == 1);  // \textbf
  CHECK(counts[TokenCategory::LS] == 1);  // \%
}

TEST_CASE("merge examples") {
  const auto merged = merge_tsr_locr(tsr("\\{ c \\} CELL \\\\"), locr("a b ¦ \\\\"));
  CHECK(merged == "\\begin{tabular}{c} ab \\\\ \\end{tabular}");
  try {
    merge_tsr_locr(tsr("\\{ c c \\} CELL & CELL \\\\ CELL & CELL"), locr("a ¦ & b ¦ \\\\ c ¦"));
    FAIL("expected mismatch");
  } catch (const CellCountMismatch& e) {
    CHECK(e.expected() == 4);
    CHECK(e.found() == 3);
  }
}

TEST_CASE("merging the four-column sample reconstructs the normalized source") {
  const std::string norm = normalize_table_source(fixtures::sample_source());
  CHECK(merge_tsr_locr(tsr(fixtures::sample_tsr()), locr(fixtures::sample_locr())) == norm);
  CHECK(detokenize(tsr(fixtures::sample_tsr())).starts_with(
      "{|c||c|c|c|} \\hline CELL & CELL & CELL & CELL \\\\ \\hline CELL"));
}

TEST_CASE("merge places span content inside the span argument") {
  const std::string src =
      "\\begin{tabular}{c|ccc} & \\multicolumn{3}{c}{Search Strategies} \\\\ & (RMSE, $\\sigma$) & & (PAcc, $\\sigma$) "
      "\\\\ \\hline Aleph & \\multicolumn{3}{c}{(0.656, 0.047)} \\\\ \\end{tabular}";
  const std::string norm = normalize_table_source(src);
  CHECK(merge_tsr_locr(tokenize_tsr(norm), tokenize_locr(norm)) == norm);
}

TEST_CASE("serialization round-trips token kinds") {
  const auto seq = tokenize_locr(normalize_table_source(fixtures::sample_source()));
  CHECK(from_line(to_line(seq), Task::LOCR) == seq);
  const auto s2 = tokenize_tsr(normalize_table_source(fixtures::sample_source()));
  CHECK(from_line(to_line(s2), Task::TSR) == s2);
}
