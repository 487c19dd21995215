#pragma once

// Glue between the dataset manifests and the model: sample loading,
// vocabulary construction and the end-to-end TSR + L-OCR reconstruction.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tablatex/corpus/dataset.hpp"
#include "tablatex/corpus/image_io.hpp"
#include "tablatex/corpus/raster.hpp"
#include "tablatex/merge.hpp"
#include "tablatex/nn/train.hpp"
#include "tablatex/tokenize.hpp"
#include "tablatex/vocabulary.hpp"

namespace tablatex::pipeline {

inline const TokenSequence& target_of(const corpus::TableSample& s, Task task) {
  return task == Task::TSR ? s.tsr_target : s.locr_target;
}

// TSR uses the fixed vocabulary; L-OCR collects the tokens of `samples`.
inline Vocabulary build_vocabulary(Task task, std::span<const corpus::TableSample* const> samples) {
  if (task == Task::TSR) return Vocabulary::tsr();
  std::vector<TokenSequence> seqs;
  for (const auto* s : samples) seqs.push_back(s->locr_target);
  return Vocabulary::locr(seqs);
}

template <class S>
nn::Mat<S> model_input(const corpus::TableImage& img) {
  if (img.width != img.height) throw Error(ErrorKind::ShapeError, "model input must be square");
  return nn::image_input<S>(img.pixels, img.width);
}

// Loads the images of `samples` (paths relative to `root`) at `side`.
template <class S>
std::vector<nn::TrainSample<S>> load_samples(std::span<const corpus::TableSample* const> samples,
                                             const std::string& root, Task task, const Vocabulary& vocab,
                                             corpus::AspectMode aspect, int side) {
  std::vector<nn::TrainSample<S>> out;
  for (const auto* s : samples) {
    const auto path = (std::filesystem::path(root) / s->image_path).string();
    out.push_back({model_input<S>(corpus::load_external_image(path, aspect, side)), vocab.encode(target_of(*s, task))});
  }
  return out;
}

// Rasterizes normalized sources in memory.
template <class S>
std::vector<nn::TrainSample<S>> render_samples(std::span<const std::string> sources, Task task,
                                               const Vocabulary& vocab, corpus::AspectMode aspect, int side) {
  std::vector<nn::TrainSample<S>> out;
  for (const auto& src : sources) {
    const auto seq = task == Task::TSR ? tokenize_tsr(src) : tokenize_locr(src);
    out.push_back({model_input<S>(corpus::rasterize_synthetic(src, aspect, side)), vocab.encode(seq)});
  }
  return out;
}

struct Prediction {
  TokenSequence tokens;
  bool truncated = false;
};

template <class S>
Prediction predict(const nn::Model<S>& model, const Vocabulary& vocab, const nn::Mat<S>& image) {
  const auto r = nn::greedy_decode(model, image);
  return {vocab.decode(r.ids), r.truncated};
}

}  // namespace tablatex::pipeline
