#include "core/detokenize.hpp"

#include <cctype>

#include "tablatex/tokenize.hpp"

namespace tablatex {

namespace detail {

namespace {

bool is_control_word(std::string_view t) {
  return t.size() > 1 && t[0] == '\\' && std::isalpha(static_cast<unsigned char>(t[1]));
}

bool ends_with_control_word(const std::string& s) {
  std::size_t i = s.size();
  while (i > 0 && std::isalpha(static_cast<unsigned char>(s[i - 1]))) --i;
  return i < s.size() && i > 0 && s[i - 1] == '\\' && (i < 2 || s[i - 2] != '\\');
}

bool starts_with_letter(const std::string& s) {
  return !s.empty() && std::isalpha(static_cast<unsigned char>(s[0]));
}

class TsrWriter {
 public:
  TsrWriter(std::span<const Token> tokens, const std::function<std::string(std::size_t)>& cell_text)
      : tokens_(tokens), cell_text_(cell_text) {}

  std::string top() {
    std::string out;
    while (pos_ < tokens_.size()) {
      std::string piece = item();
      if (!out.empty()) out += ' ';
      out += piece;
    }
    return out;
  }

 private:
  std::string item() {
    const Token& tok = tokens_[pos_++];
    if (tok.text == kOpenBrace) return "{" + group_body(false) + "}";
    if (tok.text == kCloseBrace) return "}";
    if (tok.text == kCell) return cell_text_ ? cell_text_(cell_index_++) : std::string(kCell);
    int argc = 0;
    if (tok.text == "\\multicolumn" || tok.text == "\\multirow") argc = 3;
    if (tok.text == "\\hspace") argc = 1;
    std::string s = tok.text;
    for (int k = 0; k < argc && pos_ < tokens_.size() && tokens_[pos_].text == kOpenBrace; ++k) {
      ++pos_;
      const bool width_arg = tok.text == "\\multirow" && k == 1;
      s += "{" + group_body(width_arg) + "}";
    }
    return s;
  }

  std::string group_body(bool multirow_width) {
    std::string s;
    while (pos_ < tokens_.size() && tokens_[pos_].text != kCloseBrace) {
      std::string piece = item();
      if (ends_with_control_word(s) && starts_with_letter(piece)) s += ' ';
      s += piece;
    }
    if (pos_ < tokens_.size()) ++pos_;
    if (multirow_width && s.empty()) s = "*";
    return s;
  }

  std::span<const Token> tokens_;
  const std::function<std::string(std::size_t)>& cell_text_;
  std::size_t pos_ = 0;
  std::size_t cell_index_ = 0;
};

void rtrim(std::string& s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
}

}  // namespace

std::string detokenize_tsr(std::span<const Token> tokens, const std::function<std::string(std::size_t)>& cell_text) {
  return TsrWriter(tokens, cell_text).top();
}

std::string detokenize_locr(std::span<const Token> tokens) {
  std::string out;
  bool pending_space = false;
  bool math = false;
  bool after_word_command = false;
  for (const Token& tok : tokens) {
    if (tok.text == kDelimiter) {
      pending_space = true;
      continue;
    }
    if (tok.text == kColumnSep || tok.text == kRowSep) {
      rtrim(out);
      if (!out.empty()) out += ' ';
      out += tok.text;
      out += ' ';
      pending_space = false;
      math = false;
      after_word_command = false;
      continue;
    }
    const bool closer = tok.text == "}" || (tok.text == "$" && math);
    if (pending_space && !closer) {
      if (!out.empty() && out.back() != ' ') out += ' ';
      pending_space = false;
    }
    if (tok.text == "$") math = !math;
    if (after_word_command && starts_with_letter(tok.text) && !out.empty() && out.back() != ' ') out += ' ';
    out += tok.text;
    after_word_command = is_control_word(tok.text);
  }
  rtrim(out);
  return out;
}

}  // namespace detail

std::string detokenize(const TokenSequence& seq) {
  return seq.task == Task::TSR ? detail::detokenize_tsr(seq.tokens) : detail::detokenize_locr(seq.tokens);
}

std::string wrap_tabular(std::string_view bare) {
  std::string s = "\\begin{tabular}";
  s += bare;
  s += " \\end{tabular}";
  return s;
}

}  // namespace tablatex
