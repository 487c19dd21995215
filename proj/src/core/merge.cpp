#include "tablatex/merge.hpp"

#include <algorithm>

#include "core/detokenize.hpp"
#include "tablatex/error.hpp"
#include "tablatex/tokenize.hpp"

namespace tablatex {

std::vector<std::string> content_cells(const TokenSequence& content) {
  std::vector<std::string> cells;
  std::vector<Token> current;
  int depth = 0;
  auto flush = [&] {
    std::string text = detail::detokenize_locr(current);
    if (!text.empty()) cells.push_back(std::move(text));
    current.clear();
  };
  for (const auto& tok : content.tokens) {
    if (tok.text == "{") ++depth;
    if (tok.text == "}") depth = std::max(0, depth - 1);
    if (depth == 0 && (tok.kind == TokenKind::ColumnSep || tok.kind == TokenKind::RowSep)) {
      flush();
      continue;
    }
    current.push_back(tok);
  }
  flush();
  return cells;
}

std::string merge_tsr_locr(const TokenSequence& structure, const TokenSequence& content) {
  if (structure.task != Task::TSR || content.task != Task::LOCR)
    throw Error(ErrorKind::TaskMismatch, "merge expects a TSR structure and an L-OCR content stream");
  const auto cells = content_cells(content);
  const auto placeholders = static_cast<std::size_t>(
      std::count_if(structure.tokens.begin(), structure.tokens.end(),
                    [](const Token& t) { return t.kind == TokenKind::CellPlaceholder || t.text == kCell; }));
  if (placeholders != cells.size()) throw CellCountMismatch(placeholders, cells.size());
  const std::string body = detail::detokenize_tsr(structure.tokens, [&](std::size_t k) { return cells[k]; });
  return wrap_tabular(body);
}

}  // namespace tablatex
