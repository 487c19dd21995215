#include "tablatex/nn/config.hpp"

#include "tablatex/error.hpp"

namespace tablatex::nn {

const char* to_string(AttentionVariant v) {
  switch (v) {
    case AttentionVariant::Vanilla: return "rt";
    case AttentionVariant::FullGated: return "fgrt";
    case AttentionVariant::PartialGated: return "pgrt";
  }
  return "rt";
}

AttentionVariant parse_variant(std::string_view name) {
  if (name == "rt" || name == "vanilla") return AttentionVariant::Vanilla;
  if (name == "fgrt" || name == "full_gated") return AttentionVariant::FullGated;
  if (name == "pgrt" || name == "partial_gated") return AttentionVariant::PartialGated;
  throw Error(ErrorKind::ConfigError, "unknown attention variant '" + std::string(name) + "'");
}

namespace {

const char* to_string(Activation a) { return a == Activation::ReLU ? "relu" : "gelu"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "gelu") return Activation::GELU;
  throw Error(ErrorKind::ConfigError, "unknown activation '" + s + "'");
}

void fail(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

}  // namespace

int ModelConfig::total_stride() const {
  int s = 1;
  for (int v : cnn_strides) s *= v;
  return s;
}

bool ModelConfig::gated(Sublayer s) const {
  if (!gating_enabled) return false;
  const bool full = variant == AttentionVariant::FullGated;
  const bool any = variant != AttentionVariant::Vanilla;
  switch (s) {
    case Sublayer::EncoderSelf: return gate_encoder_self.value_or(full);
    case Sublayer::DecoderSelf: return gate_decoder_self.value_or(full);
    case Sublayer::Cross: return gate_cross.value_or(any);
  }
  return false;
}

void ModelConfig::validate() const {
  if (vocab_size < 2) fail("vocab_size must be at least 2");
  if (d_model <= 0 || n_heads <= 0 || d_model % n_heads != 0) fail("d_model must be a positive multiple of n_heads");
  if (n_enc_layers < 0 || n_dec_layers < 0) fail("layer counts must be non-negative");
  if (ffn_dim <= 0) fail("ffn_dim must be positive");
  if (!(dropout >= 0 && dropout < 1)) fail("dropout must lie in [0, 1)");
  if (!(label_smoothing >= 0 && label_smoothing < 1)) fail("label_smoothing must lie in [0, 1)");
  if (cnn_channels.empty() || cnn_channels.size() != cnn_strides.size())
    fail("cnn_channels and cnn_strides must be non-empty and of equal length");
  for (int c : cnn_channels)
    if (c <= 0) fail("cnn channel counts must be positive");
  for (int s : cnn_strides)
    if (s != 1 && s != 2) fail("cnn strides must be 1 or 2");
  if (total_stride() != 16) fail("cnn stride product must be 16");
  if (image_size <= 0 || image_size % 16 != 0) fail("image_size must be a positive multiple of 16");
  if (max_decode_len < 1) fail("max_decode_len must be at least 1");
}

ModelConfig full_model_config(Task task, int vocab_size) {
  ModelConfig c;
  c.task = task;
  c.vocab_size = vocab_size;
  c.max_decode_len = task == Task::TSR ? 250 : 500;
  return c;
}

ModelConfig desk_model_config(Task task, int vocab_size) {
  ModelConfig c;
  c.task = task;
  c.vocab_size = vocab_size;
  c.image_size = 64;
  c.d_model = 64;
  c.n_enc_layers = 2;
  c.n_dec_layers = 2;
  c.n_heads = 4;
  c.ffn_dim = 256;
  c.dropout = 0.0;
  c.variant = AttentionVariant::PartialGated;
  c.cnn_channels = {8, 16, 16, 32};
  c.max_decode_len = 250;
  return c;
}

ModelConfig gradcheck_model_config(AttentionVariant variant) {
  ModelConfig c;
  c.task = Task::TSR;
  c.vocab_size = 12;
  c.image_size = 32;
  c.d_model = 16;
  c.n_enc_layers = 1;
  c.n_dec_layers = 1;
  c.n_heads = 2;
  c.ffn_dim = 32;
  c.dropout = 0.0;
  c.label_smoothing = 0.1;
  c.variant = variant;
  c.cnn_channels = {2, 4, 4, 8};
  c.activation = Activation::GELU;
  c.max_decode_len = 16;
  return c;
}

TrainConfig desk_train_config() {
  TrainConfig t;
  t.steps = 3000;
  t.batch_size = 8;
  t.lr_scale = 1.0;
  t.warmup = 200;
  t.eval_every = 100;
  t.target_ea = 1.0;
  return t;
}

nlohmann::json to_json(const ModelConfig& c) {
  nlohmann::json j;
  j["task"] = tablatex::to_string(c.task);
  j["vocab_size"] = c.vocab_size;
  j["image_size"] = c.image_size;
  j["d_model"] = c.d_model;
  j["n_enc_layers"] = c.n_enc_layers;
  j["n_dec_layers"] = c.n_dec_layers;
  j["n_heads"] = c.n_heads;
  j["ffn_dim"] = c.ffn_dim;
  j["dropout"] = c.dropout;
  j["label_smoothing"] = c.label_smoothing;
  j["variant"] = to_string(c.variant);
  j["gating_enabled"] = c.gating_enabled;
  auto opt = [](const std::optional<bool>& o) { return o ? nlohmann::json(*o) : nlohmann::json(nullptr); };
  j["gate_encoder_self"] = opt(c.gate_encoder_self);
  j["gate_decoder_self"] = opt(c.gate_decoder_self);
  j["gate_cross"] = opt(c.gate_cross);
  j["cnn_channels"] = c.cnn_channels;
  j["cnn_strides"] = c.cnn_strides;
  j["activation"] = to_string(c.activation);
  j["max_decode_len"] = c.max_decode_len;
  j["seed"] = c.seed;
  return j;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"steps", c.steps},         {"batch_size", c.batch_size}, {"lr_scale", c.lr_scale},
          {"warmup", c.warmup},       {"beta1", c.beta1},           {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},   {"grad_clip", c.grad_clip},   {"seed", c.seed},
          {"eval_every", c.eval_every}, {"target_ea", c.target_ea}, {"log_every", c.log_every}};
}

void update_from_json(ModelConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) fail("model config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      auto opt = [&v]() -> std::optional<bool> {
        if (v.is_null()) return std::nullopt;
        return v.get<bool>();
      };
      if (key == "task") c.task = parse_task(v.get<std::string>());
      else if (key == "vocab_size") c.vocab_size = v.get<int>();
      else if (key == "image_size") c.image_size = v.get<int>();
      else if (key == "d_model") c.d_model = v.get<int>();
      else if (key == "n_enc_layers") c.n_enc_layers = v.get<int>();
      else if (key == "n_dec_layers") c.n_dec_layers = v.get<int>();
      else if (key == "n_heads") c.n_heads = v.get<int>();
      else if (key == "ffn_dim") c.ffn_dim = v.get<int>();
      else if (key == "dropout") c.dropout = v.get<double>();
      else if (key == "label_smoothing") c.label_smoothing = v.get<double>();
      else if (key == "variant") c.variant = parse_variant(v.get<std::string>());
      else if (key == "gating_enabled") c.gating_enabled = v.get<bool>();
      else if (key == "gate_encoder_self") c.gate_encoder_self = opt();
      else if (key == "gate_decoder_self") c.gate_decoder_self = opt();
      else if (key == "gate_cross") c.gate_cross = opt();
      else if (key == "cnn_channels") c.cnn_channels = v.get<std::vector<int>>();
      else if (key == "cnn_strides") c.cnn_strides = v.get<std::vector<int>>();
      else if (key == "activation") c.activation = parse_activation(v.get<std::string>());
      else if (key == "max_decode_len") c.max_decode_len = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else fail("unknown model config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("model config: ") + e.what());
  }
}

void update_from_json(TrainConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) fail("train config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "steps") c.steps = v.get<int>();
      else if (key == "batch_size") c.batch_size = v.get<int>();
      else if (key == "lr_scale") c.lr_scale = v.get<double>();
      else if (key == "warmup") c.warmup = v.get<int>();
      else if (key == "beta1") c.beta1 = v.get<double>();
      else if (key == "beta2") c.beta2 = v.get<double>();
      else if (key == "adam_eps") c.adam_eps = v.get<double>();
      else if (key == "grad_clip") c.grad_clip = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "eval_every") c.eval_every = v.get<int>();
      else if (key == "target_ea") c.target_ea = v.get<double>();
      else if (key == "log_every") c.log_every = v.get<int>();
      else fail("unknown train config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("train config: ") + e.what());
  }
  if (c.steps < 0 || c.batch_size < 1 || c.warmup < 1) fail("steps >= 0, batch_size >= 1 and warmup >= 1 required");
}

}  // namespace tablatex::nn
