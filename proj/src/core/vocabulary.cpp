#include "tablatex/vocabulary.hpp"

#include <algorithm>
#include <set>

#include "tablatex/error.hpp"

namespace tablatex {

const std::vector<std::string>& tsr_token_list() {
  static const std::vector<std::string> list = {
      "&",      "0",        "1",           "2",           "3",         "4",
      "5",      "6",        "7",           "8",           "9",         "CELL",
      "\\\\",   "\\hline",  "\\hspace",    "\\multirow",  "\\multicolumn",
      "\\toprule", "\\midrule", "\\bottomrule", "c",       "l",         "r",
      "|",      "\\{",      "\\}"};
  return list;
}

namespace {

std::vector<std::string> special_tokens() {
  return {std::string(kPadText), std::string(kStartText), std::string(kEndText),
          std::string(kUnkText), std::string(kLatexMask)};
}

}  // namespace

Vocabulary::Vocabulary(Task task, std::vector<std::string> tokens)
    : task_(task), tokens_(std::move(tokens)) {
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], i);
    if (!inserted) throw Error(ErrorKind::ConfigError, "duplicate vocabulary token '" + tokens_[i] + "'");
  }
}

Vocabulary Vocabulary::tsr() {
  auto tokens = special_tokens();
  for (const auto& t : tsr_token_list()) tokens.push_back(t);
  return Vocabulary(Task::TSR, std::move(tokens));
}

Vocabulary Vocabulary::locr(std::span<const TokenSequence> corpus) {
  auto specials = special_tokens();
  std::set<std::string> seen;
  for (const auto& seq : corpus)
    for (const auto& tok : seq.tokens) seen.insert(tok.text);
  for (const auto& s : specials) seen.erase(s);
  auto tokens = specials;
  tokens.insert(tokens.end(), seen.begin(), seen.end());
  return Vocabulary(Task::LOCR, std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(Task task, std::vector<std::string> tokens) {
  auto specials = special_tokens();
  if (tokens.size() < specials.size() || !std::equal(specials.begin(), specials.end(), tokens.begin()))
    throw Error(ErrorKind::CheckpointError, "vocabulary does not start with the special tokens");
  return Vocabulary(task, std::move(tokens));
}

bool Vocabulary::contains(std::string_view text) const {
  return index_.find(std::string(text)) != index_.end();
}

int Vocabulary::id(std::string_view text) const {
  auto it = index_.find(std::string(text));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::text(int id) const {
  if (id < 0 || id >= size()) throw Error(ErrorKind::ShapeError, "token id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const TokenSequence& seq) const {
  std::vector<int> ids;
  ids.reserve(seq.size());
  for (const auto& t : seq.tokens) ids.push_back(id(t.text));
  return ids;
}

TokenSequence Vocabulary::decode(std::span<const int> ids) const {
  TokenSequence seq{task_, {}};
  for (int i : ids) {
    if (i == kPad || i == kStart || i == kEnd) continue;
    seq.tokens.push_back(make_token(text(i), task_));
  }
  return seq;
}

}  // namespace tablatex
