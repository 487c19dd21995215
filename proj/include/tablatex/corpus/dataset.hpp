#pragma once

#include <array>
#include <cstdint>
#include <json.hpp>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tablatex/corpus/table_image.hpp"
#include "tablatex/token.hpp"

namespace tablatex::corpus {

enum class DatasetVariant { TSRD, LOCRD250, LOCRD500 };

const char* to_string(DatasetVariant v);
DatasetVariant parse_dataset_variant(std::string_view name);  // "tsrd" | "locr250" | "locr500"
int max_len(DatasetVariant v);                                 // 250 | 250 | 500
Task variant_task(DatasetVariant v);                           // the task whose length is filtered

enum class Split { Train, Val, Test };
const char* to_string(Split s);
Split parse_split(std::string_view name);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct BuildOptions {
  DatasetVariant variant = DatasetVariant::TSRD;
  AspectMode aspect = AspectMode::ACT;
  SplitFractions fractions;
  std::uint64_t seed = 0;
  std::size_t mask_threshold = 1000;
  int image_size = 400;
  std::string out_dir;  // images/ and manifest.jsonl are written here
  bool write_images = true;
};

struct TableSample {
  std::string id;
  std::string image_path;  // relative to the manifest directory
  Split split = Split::Train;
  TokenSequence tsr_target;
  TokenSequence locr_target;
  std::string source;  // normalized LaTeX
};

struct DatasetManifest {
  int format_version = 1;
  DatasetVariant variant = DatasetVariant::TSRD;
  AspectMode aspect = AspectMode::ACT;
  int max_len = 250;
  int image_size = 400;
  std::uint64_t seed = 0;
  std::size_t mask_threshold = 1000;
  SplitFractions fractions;
  double avg_tokens_per_sample = 0.0;  // over the variant's task targets
  std::map<std::string, std::size_t> diagnostics;  // dropped-snippet counts by reason
  std::vector<TableSample> samples;

  std::size_t count(Split s) const;
  std::vector<const TableSample*> split(Split s) const;
};

// Normalizes and tokenizes each snippet, drops those whose variant-task
// target length reaches max_len (or that fail to tokenize or render), masks
// rare commands, renders images, shuffles by seed and assigns splits.
// Writes <out_dir>/images/*.png and <out_dir>/manifest.jsonl when out_dir is
// set. Throws EmptyDataset when nothing survives.
DatasetManifest build_dataset(std::span<const std::string> snippets, const BuildOptions& opts);

// Split sizes for n samples: rounded train and val counts, test takes the rest.
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitFractions& f);

nlohmann::ordered_json manifest_header(const DatasetManifest& m);
void write_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::string& path);

}  // namespace tablatex::corpus
