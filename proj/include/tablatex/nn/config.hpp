#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "tablatex/token.hpp"

namespace tablatex::nn {

enum class AttentionVariant { Vanilla, FullGated, PartialGated };  // RT, FGRT, PGRT

const char* to_string(AttentionVariant v);
AttentionVariant parse_variant(std::string_view name);  // "rt" | "fgrt" | "pgrt"

enum class Sublayer { EncoderSelf, DecoderSelf, Cross };

enum class Activation { ReLU, GELU };

struct ModelConfig {
  Task task = Task::TSR;
  int vocab_size = 0;
  int image_size = 400;  // square input side, multiple of the total CNN stride
  int d_model = 256;
  int n_enc_layers = 4;
  int n_dec_layers = 8;
  int n_heads = 8;
  int ffn_dim = 1024;
  double dropout = 0.1;
  double label_smoothing = 0.1;
  AttentionVariant variant = AttentionVariant::Vanilla;
  // Master switch: false turns every variant into the ungated baseline.
  bool gating_enabled = true;
  // Per-sublayer overrides of the variant's default gating.
  std::optional<bool> gate_encoder_self, gate_decoder_self, gate_cross;
  std::vector<int> cnn_channels{64, 128, 256, 512};
  std::vector<int> cnn_strides{2, 2, 2, 2};
  Activation activation = Activation::ReLU;
  int max_decode_len = 250;
  std::uint64_t seed = 1;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
  bool gated(Sublayer s) const;
  int total_stride() const;
  int grid_side() const { return image_size / total_stride(); }
  int grid_positions() const { return grid_side() * grid_side(); }
  int head_dim() const { return d_model / n_heads; }
};

struct TrainConfig {
  int steps = 3000;
  int batch_size = 8;
  double lr_scale = 0.1;  // Noam scale factor
  int warmup = 4000;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-9;
  double grad_clip = 0.0;  // global-norm clip; 0 disables
  std::uint64_t seed = 1;
  // Greedy-decode the training set every `eval_every` steps (0 = never) and
  // stop once its exact-match rate reaches `target_ea`.
  int eval_every = 0;
  double target_ea = 1.0;
  int log_every = 100;
};

// Defaults for the full-size model.
ModelConfig full_model_config(Task task, int vocab_size);
// Small model that memorizes a few dozen samples on one CPU core.
ModelConfig desk_model_config(Task task, int vocab_size);
// Tiny model for finite-difference gradient checks.
ModelConfig gradcheck_model_config(AttentionVariant variant);
TrainConfig desk_train_config();

nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);
// Overwrite the fields present in `j`; unknown keys raise ConfigError.
void update_from_json(ModelConfig& c, const nlohmann::json& j);
void update_from_json(TrainConfig& c, const nlohmann::json& j);

}  // namespace tablatex::nn
