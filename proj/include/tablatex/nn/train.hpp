#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "tablatex/nn/model.hpp"

namespace tablatex::nn {

// scale * d^-0.5 * min(step^-0.5, step * warmup^-1.5); step >= 1.
inline double noam_lr(long step, int d_model, int warmup, double scale) {
  const double s = static_cast<double>(step);
  return scale / std::sqrt(static_cast<double>(d_model)) *
         std::min(1.0 / std::sqrt(s), s * std::pow(static_cast<double>(warmup), -1.5));
}

template <class S>
struct OptimizerState {
  long step = 0;  // completed updates
  int warmup = 4000;
  double lr_scale = 0.1;
  std::vector<Mat<S>> m, v;  // aligned with the model's parameter order
};

template <class S>
struct TrainSample {
  Mat<S> image;             // [side*side x 1]
  std::vector<int> target;  // ids without START/END
};

// Adam with Noam-scheduled learning rate.
template <class S>
class Adam {
 public:
  Adam(const ParamStore<S>& params, const TrainConfig& cfg) : cfg_(cfg) {
    state_.warmup = cfg.warmup;
    state_.lr_scale = cfg.lr_scale;
    for (const auto& p : params.all()) {
      state_.m.push_back(Mat<S>::Zero(p.value.rows(), p.value.cols()));
      state_.v.push_back(Mat<S>::Zero(p.value.rows(), p.value.cols()));
    }
  }

  // Continue from saved moments (e.g. a checkpoint); shapes must match.
  void restore(OptimizerState<S> saved) {
    if (saved.m.size() != state_.m.size() || saved.v.size() != state_.v.size())
      throw Error(ErrorKind::CheckpointError, "optimizer state does not match parameters");
    for (std::size_t i = 0; i < saved.m.size(); ++i)
      if (saved.m[i].rows() != state_.m[i].rows() || saved.m[i].cols() != state_.m[i].cols() ||
          saved.v[i].rows() != state_.v[i].rows() || saved.v[i].cols() != state_.v[i].cols())
        throw Error(ErrorKind::CheckpointError, "optimizer moment shapes do not match parameters");
    state_ = std::move(saved);
  }

  OptimizerState<S>& state() { return state_; }
  const OptimizerState<S>& state() const { return state_; }

  // Learning rate the next update will use.
  double next_lr(int d_model) const { return noam_lr(state_.step + 1, d_model, state_.warmup, state_.lr_scale); }

  void update(ParamStore<S>& params, int d_model) {
    auto& all = params.all();
    if (all.size() != state_.m.size()) throw Error(ErrorKind::ShapeError, "optimizer state does not match parameters");
    const double lr = next_lr(d_model);
    ++state_.step;
    const double t = static_cast<double>(state_.step);
    const double c1 = 1.0 - std::pow(cfg_.beta1, t);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t);
    const S b1 = static_cast<S>(cfg_.beta1), b2 = static_cast<S>(cfg_.beta2);
    const S step_size = static_cast<S>(lr * std::sqrt(c2) / c1);
    const S eps = static_cast<S>(cfg_.adam_eps * std::sqrt(c2));
    for (std::size_t i = 0; i < all.size(); ++i) {
      auto& p = all[i];
      if (p.grad.size() == 0) continue;
      state_.m[i] = b1 * state_.m[i] + (S(1) - b1) * p.grad;
      state_.v[i] = b2 * state_.v[i] + (S(1) - b2) * p.grad.cwiseAbs2();
      if (lr == 0.0) continue;
      p.value.array() -= step_size * state_.m[i].array() / (state_.v[i].array().sqrt() + eps);
    }
  }

 private:
  TrainConfig cfg_;
  OptimizerState<S> state_;
};

// Dropout stream for sample `k` of update `step`.
inline std::uint64_t dropout_seed(std::uint64_t seed, long step, std::size_t k) {
  std::uint64_t h = seed * 0x9E3779B97F4A7C15ULL;
  h ^= static_cast<std::uint64_t>(step) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(k) + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
  return h;
}

// Mean loss and (batch-averaged) gradients, left in the parameter store.
template <class S>
double accumulate_batch(Model<S>& model, std::span<const TrainSample<S>> batch, bool training, std::uint64_t seed,
                        long step) {
  model.params().zero_grad();
  double total = 0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    Tape<S> tape;
    std::mt19937_64 rng(dropout_seed(seed, step, k));
    RunContext<S> ctx{&tape, training, true, &rng};
    Var<S> l = model.loss(ctx, batch[k].image, batch[k].target);
    const double lv = static_cast<double>(l.value()(0, 0));
    if (!std::isfinite(lv))
      throw Error(ErrorKind::NonFiniteLoss,
                  "loss is " + std::to_string(lv) + " at step " + std::to_string(step) + ", sample " + std::to_string(k));
    total += lv;
    tape.backward(l);
  }
  const S inv = S(1) / static_cast<S>(batch.size());
  for (auto& p : model.params().all()) p.grad *= inv;
  return total / static_cast<double>(batch.size());
}

// Global-norm gradient clipping; returns the norm before clipping.
template <class S>
double clip_gradients(ParamStore<S>& params, double max_norm) {
  double sq = 0;
  for (const auto& p : params.all()) sq += static_cast<double>(p.grad.squaredNorm());
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const S f = static_cast<S>(max_norm / norm);
    for (auto& p : params.all()) p.grad *= f;
  }
  return norm;
}

// One forward/backward/update over `batch`; returns the mean loss.
template <class S>
double train_step(Model<S>& model, Adam<S>& opt, std::span<const TrainSample<S>> batch, const TrainConfig& cfg) {
  if (batch.empty()) throw Error(ErrorKind::EmptyDataset, "empty training batch");
  const double loss = accumulate_batch(model, batch, true, cfg.seed, opt.state().step);
  if (cfg.grad_clip > 0) clip_gradients(model.params(), cfg.grad_clip);
  opt.update(model.params(), model.config().d_model);
  return loss;
}

struct DecodeResult {
  std::vector<int> ids;  // without START/END
  bool truncated = false;  // stopped at the length limit rather than END
};

// Greedy autoregressive decoding; ties go to the lowest id. `max_len` <= 0
// uses the configured limit.
template <class S>
DecodeResult greedy_decode(const Model<S>& model, const Mat<S>& image, int max_len = 0) {
  const int limit = max_len > 0 ? std::min(max_len, model.config().max_decode_len) : model.config().max_decode_len;
  Tape<S> enc_tape;
  RunContext<S> enc{&enc_tape, false, false, nullptr};
  const Mat<S> memory = model.encode(enc, image).value();
  DecodeResult out;
  std::vector<int> prefix{Vocabulary::kStart};
  for (int step = 0; step < limit; ++step) {
    Tape<S> tape;
    RunContext<S> ctx{&tape, false, false, nullptr};
    Var<S> mem = tape.constant(memory);
    const Mat<S>& logits = model.decoder_forward(ctx, prefix, mem).value();
    const auto last = logits.rows() - 1;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j)
      if (logits(last, j) > logits(last, best)) best = j;
    if (best == Vocabulary::kEnd) return out;
    out.ids.push_back(static_cast<int>(best));
    prefix.push_back(static_cast<int>(best));
  }
  out.truncated = true;
  return out;
}

// Whether greedy decoding reproduces `target` exactly (then END). Stops at
// the first wrong token, so it is cheaper than a full decode.
template <class S>
bool decodes_exactly(const Model<S>& model, const Mat<S>& image, const std::vector<int>& target) {
  if (static_cast<int>(target.size()) >= model.config().max_decode_len + 1) return false;
  Tape<S> enc_tape;
  RunContext<S> enc{&enc_tape, false, false, nullptr};
  const Mat<S> memory = model.encode(enc, image).value();
  std::vector<int> prefix{Vocabulary::kStart};
  for (std::size_t step = 0; step <= target.size(); ++step) {
    Tape<S> tape;
    RunContext<S> ctx{&tape, false, false, nullptr};
    const Mat<S>& logits = model.decoder_forward(ctx, prefix, tape.constant(memory)).value();
    const auto last = logits.rows() - 1;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j)
      if (logits(last, j) > logits(last, best)) best = j;
    const int want = step < target.size() ? target[step] : Vocabulary::kEnd;
    if (best != want) return false;
    prefix.push_back(want);
  }
  return true;
}

}  // namespace tablatex::nn
