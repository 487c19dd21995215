#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tablatex/token.hpp"

namespace tablatex::corpus {

// Corpus-wide occurrence count of every LatexCommand token.
std::map<std::string, std::size_t> command_frequencies(std::span<const TokenSequence> corpus);

// Replaces LatexCommand tokens whose corpus frequency is below `threshold`
// with \LATEX_TOKEN. Frequencies are counted before any replacement.
std::vector<TokenSequence> mask_rare_commands(std::span<const TokenSequence> corpus, std::size_t threshold);

}  // namespace tablatex::corpus
