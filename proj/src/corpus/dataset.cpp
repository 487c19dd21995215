#include "tablatex/corpus/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tablatex/corpus/image_io.hpp"
#include "tablatex/corpus/mask.hpp"
#include "tablatex/corpus/random.hpp"
#include "tablatex/corpus/raster.hpp"
#include "tablatex/error.hpp"
#include "tablatex/normalize.hpp"
#include "tablatex/tokenize.hpp"

namespace tablatex::corpus {

namespace fs = std::filesystem;

const char* to_string(DatasetVariant v) {
  switch (v) {
    case DatasetVariant::TSRD: return "tsrd";
    case DatasetVariant::LOCRD250: return "locr250";
    case DatasetVariant::LOCRD500: return "locr500";
  }
  return "tsrd";
}

DatasetVariant parse_dataset_variant(std::string_view name) {
  if (name == "tsrd" || name == "TSRD") return DatasetVariant::TSRD;
  if (name == "locr250" || name == "LOCRD250") return DatasetVariant::LOCRD250;
  if (name == "locr500" || name == "LOCRD500") return DatasetVariant::LOCRD500;
  throw Error(ErrorKind::ConfigError, "unknown dataset variant '" + std::string(name) + "'");
}

int max_len(DatasetVariant v) { return v == DatasetVariant::LOCRD500 ? 500 : 250; }

Task variant_task(DatasetVariant v) { return v == DatasetVariant::TSRD ? Task::TSR : Task::LOCR; }

const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw Error(ErrorKind::ConfigError, "unknown split '" + std::string(name) + "'");
}

std::size_t DatasetManifest::count(Split s) const {
  std::size_t n = 0;
  for (const auto& x : samples) n += x.split == s;
  return n;
}

std::vector<const TableSample*> DatasetManifest::split(Split s) const {
  std::vector<const TableSample*> out;
  for (const auto& x : samples)
    if (x.split == s) out.push_back(&x);
  return out;
}

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitFractions& f) {
  if (f.train < 0 || f.val < 0 || f.test < 0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-9)
    throw Error(ErrorKind::ConfigError, "split fractions must be non-negative and sum to 1");
  const auto dn = static_cast<double>(n);
  std::size_t train = std::min(n, static_cast<std::size_t>(std::llround(f.train * dn)));
  std::size_t val = std::min(n - train, static_cast<std::size_t>(std::llround(f.val * dn)));
  return {train, val, n - train - val};
}

DatasetManifest build_dataset(std::span<const std::string> snippets, const BuildOptions& opts) {
  DatasetManifest m;
  m.variant = opts.variant;
  m.aspect = opts.aspect;
  m.max_len = max_len(opts.variant);
  m.image_size = opts.image_size;
  m.seed = opts.seed;
  m.mask_threshold = opts.mask_threshold;
  m.fractions = opts.fractions;
  split_counts(0, opts.fractions);  // validates the fractions up front
  for (const char* reason : {"normalize_failed", "tokenize_failed", "too_long", "render_failed"})
    m.diagnostics[reason] = 0;

  const Task task = variant_task(opts.variant);
  std::vector<TableSample> kept;
  std::vector<TokenSequence> locr;
  for (std::size_t i = 0; i < snippets.size(); ++i) {
    TableSample s;
    char id[32];
    std::snprintf(id, sizeof id, "s%06zu", i);
    s.id = id;
    try {
      s.source = normalize_table_source(snippets[i]);
    } catch (const Error&) {
      ++m.diagnostics["normalize_failed"];
      continue;
    }
    try {
      s.tsr_target = tokenize_tsr(s.source);
      s.locr_target = tokenize_locr(s.source);
    } catch (const Error&) {
      ++m.diagnostics["tokenize_failed"];
      continue;
    }
    const auto len = (task == Task::TSR ? s.tsr_target : s.locr_target).size();
    if (len >= static_cast<std::size_t>(m.max_len)) {
      ++m.diagnostics["too_long"];
      continue;
    }
    locr.push_back(s.locr_target);
    kept.push_back(std::move(s));
  }

  const auto masked = mask_rare_commands(locr, opts.mask_threshold);
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i].locr_target = masked[i];

  // Render before splitting so that render failures never shift the split.
  std::vector<TableSample> rendered;
  std::vector<TableImage> images;
  for (auto& s : kept) {
    try {
      images.push_back(rasterize_synthetic(s.source, opts.aspect, opts.image_size));
    } catch (const Error&) {
      ++m.diagnostics["render_failed"];
      continue;
    }
    s.image_path = "images/" + s.id + ".png";
    rendered.push_back(std::move(s));
  }
  if (rendered.empty()) throw Error(ErrorKind::EmptyDataset, "no snippet survived normalization and filtering");

  std::vector<std::size_t> order(rendered.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(opts.seed);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);

  const auto counts = split_counts(order.size(), opts.fractions);
  double tokens = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    TableSample s = rendered[order[k]];
    s.split = k < counts[0] ? Split::Train : (k < counts[0] + counts[1] ? Split::Val : Split::Test);
    tokens += static_cast<double>((task == Task::TSR ? s.tsr_target : s.locr_target).size());
    m.samples.push_back(std::move(s));
  }
  m.avg_tokens_per_sample = tokens / static_cast<double>(m.samples.size());

  if (!opts.out_dir.empty()) {
    fs::create_directories(fs::path(opts.out_dir) / "images");
    if (opts.write_images)
      for (std::size_t k = 0; k < order.size(); ++k)
        write_png((fs::path(opts.out_dir) / m.samples[k].image_path).string(), images[order[k]]);
    write_manifest((fs::path(opts.out_dir) / "manifest.jsonl").string(), m);
  }
  return m;
}

nlohmann::ordered_json manifest_header(const DatasetManifest& m) {
  nlohmann::ordered_json h;
  h["type"] = "header";
  h["format_version"] = m.format_version;
  h["variant"] = to_string(m.variant);
  h["task"] = to_string(variant_task(m.variant));
  h["aspect"] = to_string(m.aspect);
  h["max_len"] = m.max_len;
  h["image_size"] = m.image_size;
  h["seed"] = m.seed;
  h["mask_threshold"] = m.mask_threshold;
  h["fractions"] = {{"train", m.fractions.train}, {"val", m.fractions.val}, {"test", m.fractions.test}};
  h["counts"] = {{"train", m.count(Split::Train)},
                 {"val", m.count(Split::Val)},
                 {"test", m.count(Split::Test)},
                 {"total", m.samples.size()}};
  h["avg_tokens_per_sample"] = m.avg_tokens_per_sample;
  nlohmann::ordered_json d = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.diagnostics) d[k] = v;
  h["diagnostics"] = d;
  return h;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path);
  out << manifest_header(m).dump() << '\n';
  for (const auto& s : m.samples) {
    nlohmann::ordered_json j;
    j["type"] = "sample";
    j["id"] = s.id;
    j["image_path"] = s.image_path;
    j["split"] = to_string(s.split);
    j["tsr"] = to_line(s.tsr_target);
    j["locr"] = to_line(s.locr_target);
    j["tsr_length"] = s.tsr_target.size();
    j["locr_length"] = s.locr_target.size();
    j["source"] = s.source;
    out << j.dump() << '\n';
  }
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open manifest " + path);
  DatasetManifest m;
  std::string line;
  bool header = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      if (j.at("type") == "header") {
        m.format_version = j.at("format_version").get<int>();
        m.variant = parse_dataset_variant(j.at("variant").get<std::string>());
        m.aspect = parse_aspect(j.at("aspect").get<std::string>());
        m.max_len = j.at("max_len").get<int>();
        m.image_size = j.at("image_size").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.mask_threshold = j.at("mask_threshold").get<std::size_t>();
        const auto& f = j.at("fractions");
        m.fractions = {f.at("train").get<double>(), f.at("val").get<double>(), f.at("test").get<double>()};
        m.avg_tokens_per_sample = j.at("avg_tokens_per_sample").get<double>();
        for (const auto& [k, v] : j.at("diagnostics").items()) m.diagnostics[k] = v.get<std::size_t>();
        header = true;
      } else {
        TableSample s;
        s.id = j.at("id").get<std::string>();
        s.image_path = j.at("image_path").get<std::string>();
        s.split = parse_split(j.at("split").get<std::string>());
        s.tsr_target = from_line(j.at("tsr").get<std::string>(), Task::TSR);
        s.locr_target = from_line(j.at("locr").get<std::string>(), Task::LOCR);
        s.source = j.value("source", "");
        m.samples.push_back(std::move(s));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, "bad manifest " + path + ": " + e.what());
  }
  if (!header) throw Error(ErrorKind::ConfigError, "manifest " + path + " has no header record");
  return m;
}

}  // namespace tablatex::corpus
