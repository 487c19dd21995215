#include "tablatex/corpus/mask.hpp"

namespace tablatex::corpus {

std::map<std::string, std::size_t> command_frequencies(std::span<const TokenSequence> corpus) {
  std::map<std::string, std::size_t> freq;
  for (const auto& seq : corpus)
    for (const auto& t : seq.tokens)
      if (t.kind == TokenKind::LatexCommand) ++freq[t.text];
  return freq;
}

std::vector<TokenSequence> mask_rare_commands(std::span<const TokenSequence> corpus, std::size_t threshold) {
  const auto freq = command_frequencies(corpus);
  std::vector<TokenSequence> out(corpus.begin(), corpus.end());
  if (threshold == 0) return out;
  for (auto& seq : out)
    for (auto& t : seq.tokens)
      if (t.kind == TokenKind::LatexCommand && freq.at(t.text) < threshold)
        t = Token{std::string(kLatexMask), TokenKind::Special};
  return out;
}

}  // namespace tablatex::corpus
