#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tablatex/token.hpp"

namespace tablatex {

// Dense bijective token <-> id map. Ids 0..4 are reserved for the special
// tokens in the order PAD, START, END, UNK, LATEX_TOKEN.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kStart = 1;
  static constexpr int kEnd = 2;
  static constexpr int kUnk = 3;
  static constexpr int kLatexToken = 4;
  static constexpr int kNumSpecial = 5;

  // Fixed TSR vocabulary: the 26 structure tokens plus specials.
  static Vocabulary tsr();
  // Specials followed by every distinct token of `corpus`, sorted bytewise.
  static Vocabulary locr(std::span<const TokenSequence> corpus);
  // Rebuild from the full ordered token list (as stored in checkpoints).
  static Vocabulary from_tokens(Task task, std::vector<std::string> tokens);

  Task task() const noexcept { return task_; }
  int size() const noexcept { return static_cast<int>(tokens_.size()); }
  bool contains(std::string_view text) const;
  int id(std::string_view text) const;  // kUnk when absent
  const std::string& text(int id) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::vector<int> encode(const TokenSequence& seq) const;
  // Drops PAD/START/END ids.
  TokenSequence decode(std::span<const int> ids) const;

 private:
  Vocabulary(Task task, std::vector<std::string> tokens);

  Task task_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// The 26 TSR content tokens in table order.
const std::vector<std::string>& tsr_token_list();

}  // namespace tablatex
