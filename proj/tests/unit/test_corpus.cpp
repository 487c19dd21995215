#include <filesystem>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "tablatex/core.hpp"
#include "tablatex/corpus/dataset.hpp"
#include "tablatex/corpus/extract.hpp"
#include "tablatex/corpus/image_io.hpp"
#include "tablatex/corpus/mask.hpp"
#include "tablatex/corpus/raster.hpp"
#include "tablatex/corpus/synthetic.hpp"

using namespace tablatex;
using namespace tablatex::corpus;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("tablatex_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Ink mask predicted from the layout alone: union of rule rectangles and
// glyph bitmaps at their placed offsets.
std::vector<char> predicted_ink(const TableLayout& l) {
  std::vector<char> ink(static_cast<std::size_t>(l.width * l.height), 0);
  auto mark = [&](int x, int y) {
    if (x >= 0 && y >= 0 && x < l.width && y < l.height) ink[static_cast<std::size_t>(y * l.width + x)] = 1;
  };
  for (const auto& r : l.rules)
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x) mark(x, y);
  for (const auto& g : l.glyphs) {
    const auto& bm = glyph(g.c, g.face);
    for (int y = 0; y < bm.height; ++y)
      for (int x = 0; x < bm.width; ++x)
        if (bm.at(x, y)) mark(g.x + x, g.y + y);
  }
  return ink;
}

}  // namespace

TEST_CASE("extract tabulars") {
  CHECK(extract_tabulars("a \\begin{tabular}{c} x \\end{tabular} b \\begin{tabular}{cc} y & z \\end{tabular}").size() == 2);
  CHECK(extract_tabulars("% \\begin{tabular}{c} x \\end{tabular}\n").empty());
  const auto nested =
      extract_tabulars("\\begin{tabular}{c} \\begin{tabular}{c} in \\end{tabular} \\\\ out \\end{tabular}");
  REQUIRE(nested.size() == 1);
  CHECK(nested[0].find("out") != std::string::npos);
  const auto r = extract_tabulars_report("\\begin{tabular}{c} x \\end{tabular} \\begin{tabular}{c} open");
  CHECK(r.snippets.size() == 1);
  CHECK(r.unbalanced == 1);
}

TEST_CASE("masking thresholds") {
  std::vector<TokenSequence> corpus;
  for (int i = 0; i < 1000; ++i) {
    std::string line = "\\beta ¦";
    if (i < 999) line += " \\alpha ¦";
    corpus.push_back(from_line(line, Task::LOCR));
  }
  const auto masked = mask_rare_commands(corpus, 1000);
  CHECK(to_line(masked[0]) == "\\beta ¦ \\LATEX_TOKEN ¦");
  CHECK(masked[0][2].kind == TokenKind::Special);
  CHECK(to_line(masked[999]) == "\\beta ¦");
  CHECK(command_frequencies(corpus).at("\\alpha") == 999);
  CHECK(mask_rare_commands(corpus, 0) == corpus);
}

TEST_CASE("masking is monotone in the threshold") {
  const auto tables = generate_synthetic_tables(2, SyntheticSpec{}, 60);
  std::vector<TokenSequence> corpus;
  for (const auto& t : tables) corpus.push_back(tokenize_locr(t.source));
  corpus.push_back(from_line("\\alpha ¦ \\pm ¦ \\alpha ¦", Task::LOCR));
  auto masked_positions = [&](std::size_t threshold) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    const auto m = mask_rare_commands(corpus, threshold);
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t k = 0; k < m[i].size(); ++k)
        if (m[i][k].text == kLatexMask) out.insert({i, k});
    return out;
  };
  std::set<std::pair<std::size_t, std::size_t>> prev;
  for (std::size_t t : {0, 1, 2, 3, 10, 50, 100000}) {
    const auto cur = masked_positions(t);
    for (const auto& p : prev) CHECK(cur.count(p) == 1);
    prev = cur;
  }
  CHECK(!prev.empty());
}

TEST_CASE("synthetic tables") {
  SyntheticSpec fixed;
  fixed.min_rows = fixed.max_rows = 2;
  fixed.min_cols = fixed.max_cols = 2;
  fixed.span_probability = 0;
  const auto two = generate_synthetic_tables(7, fixed, 5);
  for (const auto& t : two) {
    const auto st = parse_structure(tokenize_tsr(t.source));
    CHECK(st.n_rows == 2);
    CHECK(st.n_cols == 2);
    CHECK(st.spans.empty());
  }
  const auto a = generate_synthetic_tables(7, SyntheticSpec{}, 1000);
  const auto b = generate_synthetic_tables(7, SyntheticSpec{}, 1000);
  std::size_t with_span = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].source == b[i].source);
    CHECK(normalize_table_source(a[i].source) == a[i].source);
    with_span += !a[i].spans.empty();
    const auto st = parse_structure(tokenize_tsr(a[i].source));
    CHECK(st.n_rows == a[i].n_rows);
    CHECK(st.n_cols == a[i].n_cols);
    CHECK(st.spans == a[i].spans);
  }
  const double freq = static_cast<double>(with_span) / 1000.0;
  CHECK(freq >= 0.25);
  CHECK(freq <= 0.35);
  CHECK(generate_synthetic_tables(8, SyntheticSpec{}, 3)[0].source != a[0].source);
  SyntheticSpec bad;
  bad.min_rows = 3;
  bad.max_rows = 2;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("single glyph render is exact") {
  const std::string src = "\\begin{tabular}{|c|} \\hline x \\\\ \\hline \\end{tabular}";
  const auto layout = layout_table(src);
  CHECK(layout.glyphs.size() == 1);
  const auto img = render_layout(layout);
  const auto ink = predicted_ink(layout);
  std::size_t dark = 0, mismatched = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const float v = img.pixels[static_cast<std::size_t>(y * img.width + x)];
      CHECK((v == 0.0f || v == 1.0f));
      dark += v == 0.0f;
      mismatched += (v == 0.0f) != (ink[static_cast<std::size_t>(y * img.width + x)] != 0);
    }
  CHECK(mismatched == 0);
  CHECK(layout.rules.size() == 4);
  // Glyph ink sits inside the rule box, so it adds exactly its own pixels.
  std::size_t rule_only = 0;
  TableLayout rules = layout;
  rules.glyphs.clear();
  for (char c : predicted_ink(rules)) rule_only += c;
  CHECK(dark == rule_only + static_cast<std::size_t>(glyph('x').dark_pixels()));
}

TEST_CASE("vertical rule spans the body") {
  const std::string src = "\\begin{tabular}{c|c} a & b \\\\ c & d \\\\ \\end{tabular}";
  const auto l = layout_table(src);
  const auto img = render_layout(l);
  REQUIRE(l.n_cols == 2);
  const int top = l.row_y.front(), bottom = l.row_y.back() + l.row_h;
  int found = 0;
  for (int x = l.col_x[0] + l.col_w[0]; x < l.col_x[1]; ++x) {
    bool solid = true;
    for (int y = top; y < bottom; ++y) solid = solid && img.at(x, y) == 0.0f;
    found += solid;
  }
  CHECK(found >= 1);
  // No such line left of the first column.
  for (int x = 0; x < l.col_x[0]; ++x) CHECK(img.at(x, (top + bottom) / 2) == 1.0f);
}

TEST_CASE("rendering is deterministic and rejects unknown glyphs") {
  const auto t = generate_synthetic_tables(3, SyntheticSpec{}, 1)[0].source;
  CHECK(rasterize_synthetic(t, AspectMode::ACT).pixels == rasterize_synthetic(t, AspectMode::ACT).pixels);
  CHECK_THROWS_AS(render_table("\\begin{tabular}{c} \xC3\xA9 \\end{tabular}"), Error);
  CHECK_THROWS_AS(render_table("\\begin{tabular}{c} \\weird \\end{tabular}"), Error);
}

TEST_CASE("aspect sizing") {
  GrayImage wide(800, 400, 0.0f);
  const auto act = fit_to_square(wide, AspectMode::ACT);
  CHECK(act.width == 400);
  CHECK(act.height == 400);
  CHECK(act.content_width == 400);
  CHECK(act.content_height == 200);
  CHECK(act.at(0, 0) == 0.0f);
  CHECK(act.at(399, 199) == 0.0f);
  CHECK(act.at(0, 200) == 1.0f);
  CHECK(act.at(399, 399) == 1.0f);

  const auto fat = fit_to_square(GrayImage(100, 100, 0.5f), AspectMode::FAT);
  CHECK(fat.width == 400);
  CHECK(fat.height == 400);
  for (float v : fat.pixels) CHECK(v == doctest::Approx(0.5f));

  for (auto mode : {AspectMode::ACT, AspectMode::FAT}) {
    const auto white = fit_to_square(GrayImage(123, 45, 1.0f), mode);
    for (float v : white.pixels) CHECK(v == 1.0f);
  }
  CHECK_THROWS_AS(fit_to_square(GrayImage(), AspectMode::ACT), Error);
  // Area resampling preserves mean intensity.
  GrayImage stripes(40, 20);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 40; ++x) stripes.at(x, y) = x % 2 ? 1.0f : 0.0f;
  const auto half = resize(stripes, 20, 10);
  for (float v : half.pixels) CHECK(v == doctest::Approx(0.5f));
}

TEST_CASE("image files") {
  const auto dir = scratch_dir("io");
  GrayImage g(30, 20, 1.0f);
  g.at(3, 4) = 0.0f;
  const auto png = (dir / "g.png").string();
  write_png(png, g);
  const auto back = decode_image(png);
  CHECK(back.width == 30);
  CHECK(back.pixels == g.pixels);

  const auto jpg = load_external_image(std::string(TABLATEX_TEST_DATA) + "/white.jpg", AspectMode::FAT);
  for (float v : jpg.pixels) CHECK(v == 1.0f);
  // Transparent pixels composite over white.
  for (float v : decode_image(std::string(TABLATEX_TEST_DATA) + "/transparent.png").pixels) CHECK(v == 1.0f);

  const auto junk = (dir / "junk.png").string();
  std::ofstream(junk) << "not an image";
  CHECK_THROWS_AS(decode_image(junk), Error);
  CHECK_THROWS_AS(decode_image((dir / "missing.png").string()), Error);
}

TEST_CASE("dataset splits and filtering") {
  std::vector<std::string> snippets;
  for (const auto& t : generate_synthetic_tables(4, SyntheticSpec{}, 10)) snippets.push_back(t.source);
  BuildOptions o;
  o.mask_threshold = 0;
  o.image_size = 64;
  const auto m = build_dataset(snippets, o);
  CHECK(m.count(Split::Train) == 8);
  CHECK(m.count(Split::Val) == 1);
  CHECK(m.count(Split::Test) == 1);
  std::set<std::string> ids;
  for (const auto& s : m.samples) ids.insert(s.id);
  CHECK(ids.size() == 10);

  std::string tall = "\\begin{tabular}{c}";
  for (int i = 0; i < 150; ++i) tall += " a \\\\";
  tall += " \\end{tabular}";
  CHECK(tokenize_tsr(normalize_table_source(tall)).size() >= 300);
  auto with_tall = snippets;
  with_tall.push_back(tall);
  const auto m2 = build_dataset(with_tall, o);
  CHECK(m2.samples.size() == 10);
  CHECK(m2.diagnostics.at("too_long") == 1);
  for (const auto& s : m2.samples) CHECK(s.tsr_target.size() < 250);

  CHECK(split_counts(7, SplitFractions{}) == std::array<std::size_t, 3>{6, 1, 0});
  CHECK_THROWS_AS(split_counts(10, SplitFractions{0.5, 0.5, 0.5}), Error);
  CHECK_THROWS_AS(build_dataset(std::vector<std::string>{"\\begin{tabular}{p{3cm}} x \\end{tabular}"}, o), Error);
}

TEST_CASE("dataset output is deterministic and round-trips") {
  std::vector<std::string> snippets;
  for (const auto& t : generate_synthetic_tables(9, SyntheticSpec{}, 12)) snippets.push_back(t.source);
  BuildOptions o;
  o.mask_threshold = 0;
  o.image_size = 64;
  o.seed = 21;
  std::vector<std::string> manifests;
  std::vector<std::string> images;
  for (const char* name : {"a", "b"}) {
    o.out_dir = scratch_dir(std::string("ds_") + name).string();
    build_dataset(snippets, o);
    manifests.push_back(fixtures::read_file(o.out_dir + "/manifest.jsonl"));
    std::string all;
    for (const auto& e : std::set<fs::path>(fs::directory_iterator(o.out_dir + "/images"), {}))
      all += fixtures::read_file(e.string());
    images.push_back(all);
  }
  CHECK(manifests[0] == manifests[1]);
  CHECK(images[0] == images[1]);
  CHECK(!images[0].empty());

  const auto m = read_manifest(o.out_dir + "/manifest.jsonl");
  CHECK(m.seed == 21);
  CHECK(m.samples.size() == 12);
  for (const auto& s : m.samples) {
    CHECK(tokenize_tsr(s.source) == s.tsr_target);
    const auto img = load_external_image(o.out_dir + "/" + s.image_path, AspectMode::ACT, 64);
    CHECK(img.width == 64);
  }
  o.seed = 22;
  o.out_dir.clear();
  const auto other = build_dataset(snippets, o);
  bool differs = false;
  for (std::size_t i = 0; i < other.samples.size(); ++i) differs = differs || other.samples[i].id != m.samples[i].id;
  CHECK(differs);
}
