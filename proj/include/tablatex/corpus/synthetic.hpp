#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tablatex/corpus/random.hpp"
#include "tablatex/structure.hpp"

namespace tablatex::corpus {

struct SyntheticSpec {
  int min_rows = 2, max_rows = 5;
  int min_cols = 2, max_cols = 4;
  // Probability that a table carries one \multicolumn or \multirow.
  double span_probability = 0.3;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  int min_word_len = 1, max_word_len = 6;
  int max_words = 2;
  double bold_probability = 0.1;
  double empty_probability = 0.05;

  void validate() const;
};

// A normalized tabular source with the structure it was generated from.
struct SyntheticTable {
  std::string source;
  int n_rows = 0;
  int n_cols = 0;
  std::vector<Span> spans;
};

SyntheticTable generate_synthetic_table(Rng& rng, const SyntheticSpec& spec);
std::vector<SyntheticTable> generate_synthetic_tables(std::uint64_t seed, const SyntheticSpec& spec, std::size_t count);

}  // namespace tablatex::corpus
