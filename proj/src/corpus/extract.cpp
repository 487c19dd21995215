#include "tablatex/corpus/extract.hpp"

#include "tablatex/normalize.hpp"

namespace tablatex::corpus {

namespace {
constexpr std::string_view kBegin = "\\begin{tabular}";
constexpr std::string_view kEnd = "\\end{tabular}";
}  // namespace

ExtractResult extract_tabulars_report(std::string_view document) {
  const std::string text = strip_comments(document);
  ExtractResult res;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size();) {
    if (text.compare(i, kBegin.size(), kBegin) == 0) {
      if (depth++ == 0) start = i;
      i += kBegin.size();
    } else if (text.compare(i, kEnd.size(), kEnd) == 0) {
      i += kEnd.size();
      if (depth == 0) {
        ++res.unbalanced;
      } else if (--depth == 0) {
        res.snippets.push_back(text.substr(start, i - start));
      }
    } else {
      ++i;
    }
  }
  if (depth > 0) ++res.unbalanced;
  return res;
}

std::vector<std::string> extract_tabulars(std::string_view document) {
  return extract_tabulars_report(document).snippets;
}

}  // namespace tablatex::corpus
