#pragma once

// Checkpoint file layout (all integers little-endian):
//
//   magic     8 bytes  "TLXCKPT\0"
//   version   u32      kCheckpointVersion
//   meta_len  u64
//   meta      meta_len bytes of UTF-8 JSON:
//               {"model": ModelConfig, "train": TrainConfig,
//                "vocab": {"task": "tsr"|"locr", "tokens": [...]},
//                "extra": {...}}
//   n_params  u32
//   n_params tensor records, in model parameter order:
//     name_len u32, name bytes, rows u32, cols u32,
//     dtype u8 (1 = float32, 2 = float64), rows*cols values row-major
//   has_opt   u8
//   if has_opt: step i64, warmup u32, lr_scale f64, then 2*n_params tensor
//     records "adam.m.<name>" / "adam.v.<name>" in parameter order.

#include <json.hpp>
#include <string>

#include "tablatex/nn/train.hpp"
#include "tablatex/vocabulary.hpp"

namespace tablatex::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <class S>
struct Checkpoint {
  Model<S> model;
  Vocabulary vocab;
  TrainConfig train;
  std::optional<OptimizerState<S>> optimizer;
  nlohmann::json extra;
};

template <class S>
void save_checkpoint(const std::string& path, const Model<S>& model, const Vocabulary& vocab,
                     const TrainConfig& train, const OptimizerState<S>* optimizer,
                     const nlohmann::json& extra = nlohmann::json::object());

// Throws CheckpointError on a bad magic/version, truncated data, or tensors
// that do not match the stored configuration.
template <class S>
Checkpoint<S> load_checkpoint(const std::string& path);

extern template void save_checkpoint<float>(const std::string&, const Model<float>&, const Vocabulary&,
                                            const TrainConfig&, const OptimizerState<float>*, const nlohmann::json&);
extern template void save_checkpoint<double>(const std::string&, const Model<double>&, const Vocabulary&,
                                             const TrainConfig&, const OptimizerState<double>*,
                                             const nlohmann::json&);
extern template Checkpoint<float> load_checkpoint<float>(const std::string&);
extern template Checkpoint<double> load_checkpoint<double>(const std::string&);

}  // namespace tablatex::nn
