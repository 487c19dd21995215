#pragma once

// Image-to-sequence model: residual CNN feature extractor, post-norm
// transformer encoder/decoder, optional sigmoid-gated attention on any
// attention sublayer.

#include <random>
#include <string>
#include <vector>

#include "tablatex/nn/autograd.hpp"
#include "tablatex/nn/config.hpp"
#include "tablatex/nn/params.hpp"
#include "tablatex/vocabulary.hpp"

namespace tablatex::nn {

// Single-head attention: softmax(Q K^T / sqrt(d)) V, optionally masking keys
// after the query position.
template <class S>
Var<S> scaled_dot_attention(Var<S> q, Var<S> k, Var<S> v, bool causal) {
  detail::check(k.rows() == v.rows(), "attention: keys and values differ in length");
  detail::check(q.cols() == k.cols(), "attention: query/key widths differ");
  const S inv = S(1) / std::sqrt(static_cast<S>(q.cols()));
  return matmul(softmax_rows(scale(matmul_nt(q, k), inv), causal), v);
}

template <class S>
struct GateVars {
  Var<S> wqg, wvg, bg, wqi, wvi, bi;
};

// sigmoid(Q Wqg + A Wvg + bg) * (Q Wqi + A Wvi + bi), elementwise.
template <class S>
Var<S> gated_attention(Var<S> q, Var<S> a, const GateVars<S>& p) {
  detail::check(q.rows() == a.rows() && q.cols() == a.cols(), "gated attention: query and attended differ in shape");
  Var<S> gate = sigmoid(add_rowvec(add(matmul(q, p.wqg), matmul(a, p.wvg)), p.bg));
  Var<S> info = add_rowvec(add(matmul(q, p.wqi), matmul(a, p.wvi)), p.bi);
  return mul(gate, info);
}

// Per-forward-pass settings.
template <class S>
struct RunContext {
  Tape<S>* tape = nullptr;
  bool training = false;        // enables dropout
  bool track_grad = true;       // bind parameters with gradient sinks
  std::mt19937_64* rng = nullptr;  // dropout stream (required when training with dropout > 0)
};

template <class S>
class Model {
 public:
  explicit Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    build();
  }

  const ModelConfig& config() const { return cfg_; }
  ParamStore<S>& params() { return params_; }
  const ParamStore<S>& params() const { return params_; }

  // Image as [H*W x 1] pixel intensities in [0,1], white = 1.
  Var<S> cnn_encode(RunContext<S>& ctx, const Mat<S>& image) const {
    const int side = cfg_.image_size;
    detail::check(image.rows() == static_cast<Eigen::Index>(side) * side && image.cols() == 1,
                  "cnn_encode: image does not match the configured size");
    Tape<S>& t = *ctx.tape;
    // Ink as signal, background as zero.
    Var<S> x = t.constant((Mat<S>::Ones(image.rows(), 1) - image).eval());
    int h = side, w = side, c = 1;
    for (std::size_t s = 0; s < cfg_.cnn_channels.size(); ++s) {
      const int out_c = cfg_.cnn_channels[s], stride = cfg_.cnn_strides[s];
      const std::string p = "cnn." + std::to_string(s);
      ConvGeometry g1{h, w, c, 3, stride, 1};
      if (s == 0) {
        x = act(conv2d(x, bind(ctx, p + ".conv.w"), bind(ctx, p + ".conv.b"), g1));
      } else {
        Var<S> y = act(conv2d(x, bind(ctx, p + ".conv1.w"), bind(ctx, p + ".conv1.b"), g1));
        ConvGeometry g2{g1.out_h(), g1.out_w(), out_c, 3, 1, 1};
        y = conv2d(y, bind(ctx, p + ".conv2.w"), bind(ctx, p + ".conv2.b"), g2);
        ConvGeometry gs{h, w, c, 1, stride, 0};
        Var<S> skip = conv2d(x, bind(ctx, p + ".skip.w"), bind(ctx, p + ".skip.b"), gs);
        x = act(add(y, skip));
      }
      h = g1.out_h();
      w = g1.out_w();
      c = out_c;
    }
    return add_rowvec(matmul(x, bind(ctx, "enc.proj.w")), bind(ctx, "enc.proj.b"));
  }

  // Memory from projected features (positional embeddings are added here).
  Var<S> encoder_forward(RunContext<S>& ctx, Var<S> features) const {
    detail::check(features.rows() == cfg_.grid_positions() && features.cols() == cfg_.d_model,
                  "encoder: feature sequence has the wrong shape");
    Var<S> x = dropout(ctx, add(features, bind(ctx, "enc.pos")));
    for (int l = 0; l < cfg_.n_enc_layers; ++l) {
      const std::string p = "enc." + std::to_string(l);
      Var<S> a = attention(ctx, p + ".self", x, x, false, cfg_.gated(Sublayer::EncoderSelf));
      x = norm(ctx, p + ".ln1", add(x, dropout(ctx, a)));
      x = norm(ctx, p + ".ln2", add(x, dropout(ctx, ffn(ctx, p + ".ffn", x))));
    }
    return x;
  }

  Var<S> encode(RunContext<S>& ctx, const Mat<S>& image) const {
    return encoder_forward(ctx, cnn_encode(ctx, image));
  }

  // Logits [prefix length x vocab] for a prefix that starts with START.
  Var<S> decoder_forward(RunContext<S>& ctx, const std::vector<int>& prefix, Var<S> memory) const {
    detail::check(!prefix.empty(), "decoder: empty prefix");
    detail::check(static_cast<int>(prefix.size()) <= cfg_.max_decode_len + 1, "decoder: prefix exceeds max length");
    const auto n = static_cast<Eigen::Index>(prefix.size());
    Var<S> emb = scale(gather_rows(bind(ctx, "dec.embed"), prefix), std::sqrt(static_cast<S>(cfg_.d_model)));
    Var<S> x = dropout(ctx, add(emb, head_rows(bind(ctx, "dec.pos"), n)));
    for (int l = 0; l < cfg_.n_dec_layers; ++l) {
      const std::string p = "dec." + std::to_string(l);
      Var<S> a = attention(ctx, p + ".self", x, x, true, cfg_.gated(Sublayer::DecoderSelf));
      x = norm(ctx, p + ".ln1", add(x, dropout(ctx, a)));
      Var<S> c = attention(ctx, p + ".cross", x, memory, false, cfg_.gated(Sublayer::Cross));
      x = norm(ctx, p + ".ln2", add(x, dropout(ctx, c)));
      x = norm(ctx, p + ".ln3", add(x, dropout(ctx, ffn(ctx, p + ".ffn", x))));
    }
    return add_rowvec(matmul(x, bind(ctx, "out.w")), bind(ctx, "out.b"));
  }

  // Teacher-forced loss of `target` (ids without START/END).
  Var<S> loss(RunContext<S>& ctx, const Mat<S>& image, const std::vector<int>& target) const {
    std::vector<int> input{Vocabulary::kStart};
    input.insert(input.end(), target.begin(), target.end());
    std::vector<int> expected(target);
    expected.push_back(Vocabulary::kEnd);
    Var<S> memory = encode(ctx, image);
    Var<S> logits = decoder_forward(ctx, input, memory);
    return smoothed_cross_entropy(logits, expected, static_cast<S>(cfg_.label_smoothing), Vocabulary::kPad);
  }

  Var<S> bind(RunContext<S>& ctx, const std::string& name) const {
    auto& p = const_cast<Param<S>&>(params_.at(name));
    return ctx.tape->param(p.value, ctx.track_grad ? &p.grad : nullptr);
  }

 private:
  Var<S> act(Var<S> x) const { return cfg_.activation == Activation::ReLU ? relu(x) : gelu(x); }

  Var<S> dropout(RunContext<S>& ctx, Var<S> x) const {
    if (!ctx.training || cfg_.dropout <= 0) return x;
    detail::check(ctx.rng != nullptr, "dropout needs a random stream");
    const S keep = S(1) - static_cast<S>(cfg_.dropout);
    std::bernoulli_distribution b(static_cast<double>(keep));
    Mat<S> mask(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = b(*ctx.rng) ? S(1) / keep : S(0);
    return apply_mask(x, mask);
  }

  Var<S> norm(RunContext<S>& ctx, const std::string& p, Var<S> x) const {
    return layer_norm(x, bind(ctx, p + ".g"), bind(ctx, p + ".b"));
  }

  Var<S> ffn(RunContext<S>& ctx, const std::string& p, Var<S> x) const {
    Var<S> h = act(add_rowvec(matmul(x, bind(ctx, p + ".w1")), bind(ctx, p + ".b1")));
    return add_rowvec(matmul(h, bind(ctx, p + ".w2")), bind(ctx, p + ".b2"));
  }

  Var<S> attention(RunContext<S>& ctx, const std::string& p, Var<S> xq, Var<S> xkv, bool causal, bool gated) const {
    Var<S> q = add_rowvec(matmul(xq, bind(ctx, p + ".wq")), bind(ctx, p + ".bq"));
    Var<S> k = add_rowvec(matmul(xkv, bind(ctx, p + ".wk")), bind(ctx, p + ".bk"));
    Var<S> v = add_rowvec(matmul(xkv, bind(ctx, p + ".wv")), bind(ctx, p + ".bv"));
    const Eigen::Index dh = cfg_.head_dim();
    std::vector<Var<S>> heads;
    for (int h = 0; h < cfg_.n_heads; ++h)
      heads.push_back(scaled_dot_attention(slice_cols(q, h * dh, dh), slice_cols(k, h * dh, dh),
                                           slice_cols(v, h * dh, dh), causal));
    Var<S> a = cfg_.n_heads == 1 ? heads[0] : concat_cols(heads);
    if (gated) {
      const std::string g = p + ".gate";
      a = gated_attention(q, a,
                          GateVars<S>{bind(ctx, g + ".wqg"), bind(ctx, g + ".wvg"), bind(ctx, g + ".bg"),
                                      bind(ctx, g + ".wqi"), bind(ctx, g + ".wvi"), bind(ctx, g + ".bi")});
    }
    return add_rowvec(matmul(a, bind(ctx, p + ".wo")), bind(ctx, p + ".bo"));
  }

  void linear(const std::string& w, const std::string& b, int in, int out) {
    params_.add(w, in, out, Init::XavierUniform, cfg_.seed);
    params_.add(b, 1, out, Init::Zeros, cfg_.seed);
  }

  void attention_params(const std::string& p, bool gated) {
    const int d = cfg_.d_model;
    for (const char* m : {"q", "k", "v", "o"}) linear(p + ".w" + m, p + ".b" + m, d, d);
    if (!gated) return;
    const std::string g = p + ".gate";
    for (const char* m : {"wqg", "wvg", "wqi", "wvi"}) params_.add(g + "." + m, d, d, Init::XavierUniform, cfg_.seed);
    params_.add(g + ".bg", 1, d, Init::Zeros, cfg_.seed);
    params_.add(g + ".bi", 1, d, Init::Zeros, cfg_.seed);
  }

  void norm_params(const std::string& p) {
    params_.add(p + ".g", 1, cfg_.d_model, Init::Ones, cfg_.seed);
    params_.add(p + ".b", 1, cfg_.d_model, Init::Zeros, cfg_.seed);
  }

  void ffn_params(const std::string& p) {
    linear(p + ".w1", p + ".b1", cfg_.d_model, cfg_.ffn_dim);
    linear(p + ".w2", p + ".b2", cfg_.ffn_dim, cfg_.d_model);
  }

  void build() {
    const int d = cfg_.d_model;
    int c = 1;
    for (std::size_t s = 0; s < cfg_.cnn_channels.size(); ++s) {
      const int out_c = cfg_.cnn_channels[s];
      const std::string p = "cnn." + std::to_string(s);
      if (s == 0) {
        conv_params(p + ".conv", 3, c, out_c);
      } else {
        conv_params(p + ".conv1", 3, c, out_c);
        conv_params(p + ".conv2", 3, out_c, out_c);
        conv_params(p + ".skip", 1, c, out_c);
      }
      c = out_c;
    }
    linear("enc.proj.w", "enc.proj.b", c, d);
    params_.add("enc.pos", cfg_.grid_positions(), d, Init::Normal, cfg_.seed, 0.02);
    for (int l = 0; l < cfg_.n_enc_layers; ++l) {
      const std::string p = "enc." + std::to_string(l);
      attention_params(p + ".self", cfg_.gated(Sublayer::EncoderSelf));
      norm_params(p + ".ln1");
      ffn_params(p + ".ffn");
      norm_params(p + ".ln2");
    }
    params_.add("dec.embed", cfg_.vocab_size, d, Init::Normal, cfg_.seed, 1.0 / std::sqrt(static_cast<double>(d)));
    params_.add("dec.pos", cfg_.max_decode_len + 1, d, Init::Normal, cfg_.seed, 0.02);
    for (int l = 0; l < cfg_.n_dec_layers; ++l) {
      const std::string p = "dec." + std::to_string(l);
      attention_params(p + ".self", cfg_.gated(Sublayer::DecoderSelf));
      norm_params(p + ".ln1");
      attention_params(p + ".cross", cfg_.gated(Sublayer::Cross));
      norm_params(p + ".ln2");
      ffn_params(p + ".ffn");
      norm_params(p + ".ln3");
    }
    linear("out.w", "out.b", d, cfg_.vocab_size);
  }

  void conv_params(const std::string& p, int k, int in_c, int out_c) {
    // He-uniform bound sqrt(6 / fan_in), expressed relative to the Xavier bound.
    const double fan_in = static_cast<double>(k * k * in_c);
    params_.add(p + ".w", k * k * in_c, out_c, Init::XavierUniform, cfg_.seed,
                std::sqrt((fan_in + static_cast<double>(out_c)) / fan_in));
    params_.add(p + ".b", 1, out_c, Init::Zeros, cfg_.seed);
  }

  ModelConfig cfg_;
  ParamStore<S> params_;
};

// Pixels of a square image as the [H*W x 1] model input.
template <class S>
Mat<S> image_input(const std::vector<float>& pixels, int side) {
  detail::check(static_cast<int>(pixels.size()) == side * side, "image_input: pixel count != side^2");
  Mat<S> m(side * side, 1);
  for (int i = 0; i < side * side; ++i) m(i, 0) = static_cast<S>(pixels[static_cast<std::size_t>(i)]);
  return m;
}

}  // namespace tablatex::nn
