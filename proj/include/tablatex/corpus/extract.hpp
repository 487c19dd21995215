#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tablatex::corpus {

struct ExtractResult {
  std::vector<std::string> snippets;
  std::size_t unbalanced = 0;  // blocks skipped for a missing begin or end
};

// Every outermost \begin{tabular}...\end{tabular} block in document order,
// after comments are stripped.
ExtractResult extract_tabulars_report(std::string_view document);
std::vector<std::string> extract_tabulars(std::string_view document);

}  // namespace tablatex::corpus
