#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "tablatex/nn/checkpoint.hpp"

using namespace tablatex;
using namespace tablatex::nn;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("tablatex_ckpt_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
}

template <class S>
void perturb(Model<S>& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  for (auto& p : m.params().all())
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] += static_cast<S>(n(rng));
}

template <class S>
void check_round_trip() {
  TempDir dir;
  ModelConfig cfg = gradcheck_model_config(AttentionVariant::FullGated);
  cfg.gate_decoder_self = false;
  const Vocabulary vocab = Vocabulary::tsr();
  cfg.vocab_size = vocab.size();
  Model<S> model(cfg);
  perturb(model, 7);
  TrainConfig tc;
  tc.warmup = 123;
  tc.lr_scale = 0.7;
  Adam<S> opt(model.params(), tc);
  opt.state().step = 17;
  for (std::size_t i = 0; i < opt.state().m.size(); ++i) {
    opt.state().m[i].setConstant(S(0.25) * static_cast<S>(i));
    opt.state().v[i].setConstant(S(0.5) + static_cast<S>(i));
  }
  const std::string path = dir.file("a.ckpt");
  save_checkpoint(path, model, vocab, tc, &opt.state(), nlohmann::json{{"note", "x"}});

  const Checkpoint<S> back = load_checkpoint<S>(path);
  CHECK(to_json(back.model.config()) == to_json(cfg));
  CHECK(to_json(back.train) == to_json(tc));
  CHECK(back.vocab.tokens() == vocab.tokens());
  CHECK(back.vocab.task() == Task::TSR);
  CHECK(back.extra.at("note") == "x");
  REQUIRE(back.model.params().size() == model.params().size());
  for (std::size_t i = 0; i < model.params().size(); ++i) {
    CHECK(back.model.params().all()[i].name == model.params().all()[i].name);
    CHECK(back.model.params().all()[i].value == model.params().all()[i].value);
  }
  REQUIRE(back.optimizer.has_value());
  CHECK(back.optimizer->step == 17);
  CHECK(back.optimizer->warmup == 123);
  CHECK(back.optimizer->lr_scale == 0.7);
  for (std::size_t i = 0; i < opt.state().m.size(); ++i) {
    CHECK(back.optimizer->m[i] == opt.state().m[i]);
    CHECK(back.optimizer->v[i] == opt.state().v[i]);
  }

  // Saving the loaded checkpoint reproduces the file byte for byte.
  save_checkpoint(dir.file("b.ckpt"), back.model, back.vocab, back.train, &*back.optimizer, back.extra);
  CHECK(fixtures::read_file(path) == fixtures::read_file(dir.file("b.ckpt")));

  save_checkpoint<S>(dir.file("c.ckpt"), model, vocab, tc, nullptr);
  CHECK_FALSE(load_checkpoint<S>(dir.file("c.ckpt")).optimizer.has_value());
}

ErrorKind load_error(const std::string& path) {
  try {
    load_checkpoint<double>(path);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::ConfigError;  // any kind but CheckpointError flags a missing throw
}

}  // namespace

TEST_CASE("checkpoints round-trip in single precision") { check_round_trip<float>(); }

TEST_CASE("checkpoints round-trip in double precision") { check_round_trip<double>(); }

TEST_CASE("corrupt checkpoints are rejected") {
  TempDir dir;
  const Vocabulary vocab = Vocabulary::tsr();
  ModelConfig cfg = gradcheck_model_config(AttentionVariant::Vanilla);
  cfg.vocab_size = vocab.size();
  Model<double> model(cfg);
  const std::string good = dir.file("good.ckpt");
  save_checkpoint<double>(good, model, vocab, TrainConfig{}, nullptr);
  const std::string bytes = fixtures::read_file(good);
  REQUIRE(bytes.size() > 64);
  CHECK_NOTHROW(load_checkpoint<double>(good));

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  write_bytes(dir.file("magic.ckpt"), bad_magic);
  CHECK(load_error(dir.file("magic.ckpt")) == ErrorKind::CheckpointError);

  std::string bad_version = bytes;
  bad_version[8] = static_cast<char>(kCheckpointVersion + 1);
  write_bytes(dir.file("version.ckpt"), bad_version);
  CHECK(load_error(dir.file("version.ckpt")) == ErrorKind::CheckpointError);

  for (std::size_t cut : {std::size_t{4}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    write_bytes(dir.file("cut.ckpt"), bytes.substr(0, cut));
    CHECK(load_error(dir.file("cut.ckpt")) == ErrorKind::CheckpointError);
  }
  CHECK(load_error(dir.file("missing.ckpt")) == ErrorKind::CheckpointError);
}

TEST_CASE("loading into the other precision converts values") {
  TempDir dir;
  ModelConfig cfg = gradcheck_model_config(AttentionVariant::PartialGated);
  cfg.vocab_size = Vocabulary::tsr().size();
  Model<float> model(cfg);
  perturb(model, 9);
  save_checkpoint<float>(dir.file("f.ckpt"), model, Vocabulary::tsr(), TrainConfig{}, nullptr);
  const auto back = load_checkpoint<double>(dir.file("f.ckpt"));
  for (std::size_t i = 0; i < model.params().size(); ++i)
    CHECK(back.model.params().all()[i].value == model.params().all()[i].value.template cast<double>());
}
