#pragma once

#include <fstream>
#include <sstream>
#include <string>

namespace fixtures {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string sample_source() { return read_file(std::string(TABLATEX_TEST_DATA) + "/accuracy_table.tex"); }

inline std::string sample_tsr() {
  std::string s = "\\{ | c | | c | c | c | \\} \\hline";
  for (int r = 0; r < 6; ++r) s += " CELL & CELL & CELL & CELL \\\\ \\hline";
  return s;
}

// Content stream of the four-column sample, including the closing `\\` that
// the structure stream also carries.
inline std::string sample_locr() {
  return "A c c u r a c y ¦ ( \\% ) & C o l o n ¦ C a n c e r ¦ & D u k e ¦ C a n c e r ¦ & "
         "L e u k e m i a ¦ \\\\ "
         "R V M ¦ & 8 5 . 4 8 ¦ & 8 0 . 9 5 ¦ & 9 3 . 0 6 ¦ \\\\ "
         "S V M ¦ & 8 3 . 8 7 ¦ & 8 5 . 7 1 ¦ & 8 7 . 5 0 ¦ \\\\ "
         "R V M ¦ $ _ { P F C V M ¦ } $ & 8 7 . 1 0 ¦ & 9 2 . 8 6 ¦ & 9 5 . 8 3 ¦ \\\\ "
         "S V M ¦ $ _ { P F C V M ¦ } $ & 8 5 . 4 8 ¦ & \\textbf { 9 7 . 6 2 ¦ } & 9 5 . 8 3 ¦ \\\\ "
         "P F C V M ¦ $ _ { L P ¦ } $ & \\textbf { 9 6 . 7 7 ¦ } & 9 5 . 2 4 ¦ & \\textbf { 9 8 . 6 1 ¦ } \\\\";
}

}  // namespace fixtures
