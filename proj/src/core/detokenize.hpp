#pragma once

#include <functional>
#include <span>
#include <string>

#include "tablatex/token.hpp"

namespace tablatex::detail {

// TSR detokenization; when `cell_text` is set, the k-th CELL placeholder is
// replaced by cell_text(k).
std::string detokenize_tsr(std::span<const Token> tokens,
                           const std::function<std::string(std::size_t)>& cell_text = {});

std::string detokenize_locr(std::span<const Token> tokens);

}  // namespace tablatex::detail
