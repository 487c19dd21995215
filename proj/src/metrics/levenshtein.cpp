#include <algorithm>
#include <numeric>

#include "tablatex/metrics/metrics.hpp"

namespace tablatex::metrics {

std::size_t levenshtein(std::span<const Token> a, std::span<const Token> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1].text == b[j - 1].text ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t levenshtein(const TokenSequence& a, const TokenSequence& b) {
  return levenshtein(std::span<const Token>(a.tokens), std::span<const Token>(b.tokens));
}

}  // namespace tablatex::metrics
