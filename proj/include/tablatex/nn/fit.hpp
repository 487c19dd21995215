#pragma once

// Training loop over an in-memory sample set: shuffled mini-batches,
// periodic exact-match evaluation on the training samples, early stop.

#include <chrono>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tablatex/corpus/random.hpp"
#include "tablatex/nn/train.hpp"

namespace tablatex::nn {

struct FitEvent {
  long step = 0;  // completed updates
  double loss = 0;
  double lr = 0;
  std::optional<double> train_ea;  // set on evaluation steps
};

struct FitResult {
  long steps = 0;
  double final_loss = 0;
  double train_ea = -1;  // last evaluated exact-match rate, -1 if never evaluated
  bool reached_target = false;
  double seconds = 0;
  std::vector<FitEvent> history;  // logged and evaluation steps
};

// Fraction of samples whose greedy decode equals the target exactly.
template <class S>
double exact_match_rate(const Model<S>& model, std::span<const TrainSample<S>> data) {
  if (data.empty()) return 0;
  std::size_t hits = 0;
  for (const auto& s : data) hits += decodes_exactly(model, s.image, s.target);
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

// Runs until cfg.steps updates have been made in total (counting those
// already in `opt`) or the training exact-match rate reaches cfg.target_ea.
template <class S>
FitResult fit(Model<S>& model, Adam<S>& opt, std::span<const TrainSample<S>> data, const TrainConfig& cfg,
              const std::function<void(const FitEvent&)>& on_event = {}) {
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "no training samples");
  if (cfg.batch_size < 1) throw Error(ErrorKind::ConfigError, "batch_size must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  FitResult out;
  // The sample order depends only on the seed and the epoch, so a resumed
  // run sees the same batches as an uninterrupted one.
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  auto order_for_epoch = [&](std::size_t epoch) {
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    corpus::Rng rng(cfg.seed ^ (0xA24BAED4963EE407ULL * (epoch + 1)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
    return order;
  };
  const std::size_t per_epoch = (data.size() + bs - 1) / bs;
  std::size_t cached_epoch = static_cast<std::size_t>(-1);
  std::vector<std::size_t> order;
  std::vector<TrainSample<S>> batch;

  while (opt.state().step < cfg.steps) {
    const auto step = static_cast<std::size_t>(opt.state().step);
    const std::size_t epoch = step / per_epoch, slot = step % per_epoch;
    if (epoch != cached_epoch) {
      order = order_for_epoch(epoch);
      cached_epoch = epoch;
    }
    batch.clear();
    for (std::size_t k = slot * bs; k < std::min(order.size(), (slot + 1) * bs); ++k) batch.push_back(data[order[k]]);
    const double lr = opt.next_lr(model.config().d_model);
    out.final_loss = train_step(model, opt, std::span<const TrainSample<S>>(batch), cfg);
    out.steps = opt.state().step;

    FitEvent ev{out.steps, out.final_loss, lr, std::nullopt};
    const bool evaluate = cfg.eval_every > 0 && out.steps % cfg.eval_every == 0;
    if (evaluate) {
      out.train_ea = exact_match_rate(model, data);
      ev.train_ea = out.train_ea;
    }
    const bool logged = evaluate || (cfg.log_every > 0 && out.steps % cfg.log_every == 0);
    if (logged) {
      out.history.push_back(ev);
      if (on_event) on_event(ev);
    }
    if (evaluate && out.train_ea >= cfg.target_ea) {
      out.reached_target = true;
      break;
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace tablatex::nn
