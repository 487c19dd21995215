#include <random>

#include "doctest.h"
#include "tablatex/nn/fit.hpp"
#include "tablatex/verify/suites.hpp"

using namespace tablatex;
using namespace tablatex::nn;

namespace {

template <class S>
Mat<S> random_mat(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat<S> m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(u(rng));
  return m;
}

template <class S>
Mat<S> random_image(std::mt19937_64& rng, int side) {
  return random_mat<S>(rng, static_cast<Eigen::Index>(side) * side, 1, 0, 1);
}

std::vector<int> random_target(std::mt19937_64& rng, int vocab, int len) {
  std::uniform_int_distribution<int> d(Vocabulary::kNumSpecial, vocab - 1);
  std::vector<int> t(static_cast<std::size_t>(len));
  for (auto& x : t) x = d(rng);
  return t;
}

bool same_params(const ParamStore<double>& a, const ParamStore<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.all()[i].name != b.all()[i].name || a.all()[i].value != b.all()[i].value) return false;
  return true;
}

}  // namespace

TEST_CASE("softmax rows are distributions and attention stays in the hull of the values") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Tape<double> t;
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 9), m = 1 + static_cast<Eigen::Index>(rng() % 9);
    const bool causal = trial % 2 == 1;
    Var<double> x = t.constant(random_mat<double>(rng, n, m, -30, 30));
    const Mat<double>& p = softmax_rows(x, causal).value();
    for (Eigen::Index i = 0; i < n; ++i) {
      CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p.row(i).minCoeff() >= 0.0);
      if (causal)
        for (Eigen::Index j = i + 1; j < m; ++j) CHECK(p(i, j) == 0.0);
    }
    Var<double> q = t.constant(random_mat<double>(rng, n, 4));
    Var<double> k = t.constant(random_mat<double>(rng, m, 4));
    Mat<double> vv = random_mat<double>(rng, m, 3, -5, 5);
    const Mat<double>& a = scaled_dot_attention(q, k, t.constant(vv), false).value();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(a(i, j) >= vv.col(j).minCoeff() - 1e-12);
        CHECK(a(i, j) <= vv.col(j).maxCoeff() + 1e-12);
      }
  }
}

TEST_CASE("gate values lie strictly inside (0, 1)") {
  std::mt19937_64 rng(4);
  Tape<double> t;
  Var<double> x = t.constant(random_mat<double>(rng, 20, 20, -30, 30));
  const Mat<double>& g = sigmoid(x).value();
  CHECK(g.minCoeff() > 0.0);
  CHECK(g.maxCoeff() < 1.0);
}

TEST_CASE("smoothed cross entropy matches its closed form and is bounded by the target entropy") {
  const int V = 7;
  const double eps = 0.1;
  Tape<double> t;
  SUBCASE("uniform logits cost log V") {
    Var<double> z = t.constant(Mat<double>::Zero(3, V));
    CHECK(smoothed_cross_entropy(z, {2, 3, 4}, eps, 0).value()(0, 0) == doctest::Approx(std::log(double(V))));
  }
  SUBCASE("padding rows are ignored") {
    std::mt19937_64 rng(5);
    Mat<double> zz = random_mat<double>(rng, 3, V, -3, 3);
    Var<double> z = t.constant(zz);
    Var<double> z1 = t.constant(Mat<double>(zz.topRows(1)));
    CHECK(smoothed_cross_entropy(z, {3, 0, 0}, eps, 0).value()(0, 0) ==
          doctest::Approx(smoothed_cross_entropy(z1, {3}, eps, 0).value()(0, 0)));
  }
  SUBCASE("lower bound attained at the smoothed target") {
    const double on = 1 - eps, off = eps / (V - 1);
    const double entropy = -(on * std::log(on) + (V - 1) * off * std::log(off));
    std::mt19937_64 rng(6);
    for (int i = 0; i < 200; ++i) {
      Var<double> z = t.constant(random_mat<double>(rng, 1, V, -10, 10));
      CHECK(smoothed_cross_entropy(z, {1}, eps, 0).value()(0, 0) >= entropy - 1e-12);
    }
    Mat<double> opt = Mat<double>::Constant(1, V, std::log(off));
    opt(0, 1) = std::log(on);
    CHECK(smoothed_cross_entropy(t.constant(opt), {1}, eps, 0).value()(0, 0) == doctest::Approx(entropy));
  }
}

TEST_CASE("noam schedule") {
  const int d = 256, w = 4000;
  CHECK(noam_lr(1, d, w, 1.0) == doctest::Approx(std::pow(d, -0.5) * std::pow(w, -1.5)));
  CHECK(noam_lr(w, d, w, 1.0) == doctest::Approx(std::pow(d, -0.5) * std::pow(w, -0.5)));
  CHECK(noam_lr(4 * w, d, w, 2.0) == doctest::Approx(2.0 * std::pow(d, -0.5) / std::sqrt(4.0 * w)));
  for (long s = 1; s < 10 * w; ++s) {
    const double a = noam_lr(s, d, w, 1.0), b = noam_lr(s + 1, d, w, 1.0);
    if (s < w) REQUIRE(b > a);
    else REQUIRE(b < a);
  }
}

TEST_CASE("configuration validation and serialization") {
  ModelConfig c = desk_model_config(Task::TSR, 40);
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto edit) {
    ModelConfig x = desk_model_config(Task::TSR, 40);
    edit(x);
    CHECK_THROWS_AS(x.validate(), Error);
  };
  bad([](ModelConfig& x) { x.cnn_strides = {2, 2, 2, 1}; });
  bad([](ModelConfig& x) { x.image_size = 72; });
  bad([](ModelConfig& x) { x.n_heads = 5; });
  bad([](ModelConfig& x) { x.dropout = 1.0; });
  bad([](ModelConfig& x) { x.vocab_size = 1; });

  c.gate_cross = false;
  ModelConfig back = full_model_config(Task::LOCR, 10);
  update_from_json(back, to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK_THROWS_AS(update_from_json(back, nlohmann::json{{"no_such_key", 1}}), Error);

  CHECK(full_model_config(Task::TSR, 10).max_decode_len == 250);
  CHECK(full_model_config(Task::LOCR, 10).max_decode_len == 500);
  CHECK(parse_variant("pgrt") == AttentionVariant::PartialGated);
  CHECK_THROWS_AS(parse_variant("xyz"), Error);
}

TEST_CASE("variants gate the expected sublayers and share the ungated parameters") {
  auto names = [](AttentionVariant v) {
    Model<double> m(gradcheck_model_config(v));
    std::vector<std::string> out;
    for (const auto& p : m.params().all()) out.push_back(p.name);
    return out;
  };
  auto count_gates = [](const std::vector<std::string>& ns, const std::string& where) {
    int n = 0;
    for (const auto& s : ns) n += s.find(where + ".gate.") != std::string::npos;
    return n;
  };
  const auto rt = names(AttentionVariant::Vanilla), fg = names(AttentionVariant::FullGated),
             pg = names(AttentionVariant::PartialGated);
  CHECK(count_gates(rt, "") == 0);
  CHECK(count_gates(fg, ".self") == 12);
  CHECK(count_gates(fg, ".cross") == 6);
  CHECK(count_gates(pg, ".self") == 0);
  CHECK(count_gates(pg, ".cross") == 6);

  Model<double> a(gradcheck_model_config(AttentionVariant::Vanilla));
  Model<double> b(gradcheck_model_config(AttentionVariant::FullGated));
  for (const auto& p : a.params().all()) {
    REQUIRE(b.params().contains(p.name));
    CHECK(b.params().at(p.name).value == p.value);
  }
}

TEST_CASE("decoder is causal") {
  ModelConfig cfg = gradcheck_model_config(AttentionVariant::FullGated);
  Model<double> model(cfg);
  std::mt19937_64 rng(8);
  const Mat<double> img = random_image<double>(rng, cfg.image_size);
  Tape<double> et;
  RunContext<double> ec{&et, false, false, nullptr};
  const Mat<double> memory = model.encode(ec, img).value();
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> p1{Vocabulary::kStart};
    for (int x : random_target(rng, cfg.vocab_size, 8)) p1.push_back(x);
    const std::size_t s = 1 + rng() % 7;
    std::vector<int> p2 = p1;
    for (std::size_t j = s + 1; j < p2.size(); ++j) p2[j] = random_target(rng, cfg.vocab_size, 1)[0];
    Tape<double> t;
    RunContext<double> ctx{&t, false, false, nullptr};
    const Mat<double> l1 = model.decoder_forward(ctx, p1, t.constant(memory)).value();
    const Mat<double> l2 = model.decoder_forward(ctx, p2, t.constant(memory)).value();
    for (std::size_t i = 0; i <= s; ++i)
      CHECK((l1.row(static_cast<Eigen::Index>(i)) - l2.row(static_cast<Eigen::Index>(i))).cwiseAbs().maxCoeff() <=
            1e-12);
  }
}

TEST_CASE("ungated variants reproduce the baseline exactly") {
  const auto r = verify::run_containment_suite(3, 11);
  INFO(r.to_text());
  CHECK(r.passed());
}

TEST_CASE("op-level gradients agree with finite differences and a planted fault is caught") {
  verify::GradientOptions opts;
  opts.variants.clear();
  const auto clean = verify::run_gradient_suite(opts);
  INFO(clean.to_text());
  CHECK(clean.passed());
  {
    ScopedGradientFault fault(GradientFault::MatmulLhs);
    const auto broken = verify::run_gradient_suite(opts);
    CHECK_FALSE(broken.passed());
  }
  CHECK(gradient_fault() == GradientFault::None);
}

TEST_CASE("model gradients agree with finite differences for the partially gated variant") {
  verify::GradientOptions opts;
  opts.op_level = false;
  opts.variants = {AttentionVariant::PartialGated};
  const auto r = verify::run_gradient_suite(opts);
  INFO(r.to_text());
  CHECK(r.passed());
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  ModelConfig cfg = gradcheck_model_config(AttentionVariant::PartialGated);
  Model<double> model(cfg);
  const Model<double> before(cfg);
  TrainConfig tc;
  tc.lr_scale = 0;
  Adam<double> opt(model.params(), tc);
  std::mt19937_64 rng(9);
  std::vector<TrainSample<double>> batch{{random_image<double>(rng, cfg.image_size), random_target(rng, 12, 5)}};
  for (int i = 0; i < 3; ++i) train_step(model, opt, std::span<const TrainSample<double>>(batch), tc);
  CHECK(opt.state().step == 3);
  CHECK(same_params(model.params(), before.params()));
}

TEST_CASE("loss keeps falling on a single memorized sample") {
  ModelConfig cfg = gradcheck_model_config(AttentionVariant::PartialGated);
  cfg.max_decode_len = 12;
  Model<double> model(cfg);
  TrainConfig tc;
  tc.lr_scale = 0.5;
  tc.warmup = 50;
  Adam<double> opt(model.params(), tc);
  std::mt19937_64 rng(10);
  const std::vector<int> target = random_target(rng, cfg.vocab_size, 6);
  std::vector<TrainSample<double>> batch{{random_image<double>(rng, cfg.image_size), target}};
  std::vector<double> losses;
  for (int i = 0; i < 50; ++i) losses.push_back(train_step(model, opt, std::span<const TrainSample<double>>(batch), tc));
  for (std::size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] <= losses[i - 1]);

  // Keep going until the sample is memorized, then inspect decoding.
  for (int i = 0; i < 400 && !decodes_exactly(model, batch[0].image, target); ++i)
    train_step(model, opt, std::span<const TrainSample<double>>(batch), tc);
  REQUIRE(decodes_exactly(model, batch[0].image, target));
  const auto full = greedy_decode(model, batch[0].image);
  CHECK(full.ids == target);
  CHECK_FALSE(full.truncated);
  CHECK(greedy_decode(model, batch[0].image).ids == full.ids);
  const auto one = greedy_decode(model, batch[0].image, 1);
  CHECK(one.ids == std::vector<int>{target[0]});
  CHECK(one.truncated);
  CHECK(exact_match_rate(model, std::span<const TrainSample<double>>(batch)) == 1.0);
}

TEST_CASE("decoding breaks ties toward the lowest id and honours the length limit") {
  ModelConfig cfg = gradcheck_model_config(AttentionVariant::Vanilla);
  Model<double> model(cfg);
  model.params().at("out.w").value.setZero();
  model.params().at("out.b").value.setZero();
  std::mt19937_64 rng(12);
  const auto r = greedy_decode(model, random_image<double>(rng, cfg.image_size), 5);
  CHECK(r.ids == std::vector<int>(5, 0));
  CHECK(r.truncated);
  CHECK(greedy_decode(model, random_image<double>(rng, cfg.image_size)).ids.size() ==
        static_cast<std::size_t>(cfg.max_decode_len));
}

TEST_CASE("non-finite losses are reported") {
  ModelConfig cfg = gradcheck_model_config(AttentionVariant::Vanilla);
  Model<double> model(cfg);
  model.params().at("out.b").value(0, 3) = std::numeric_limits<double>::quiet_NaN();
  std::mt19937_64 rng(13);
  std::vector<TrainSample<double>> batch{{random_image<double>(rng, cfg.image_size), random_target(rng, 12, 4)}};
  try {
    accumulate_batch(model, std::span<const TrainSample<double>>(batch), false, 1, 0);
    FAIL("expected NonFiniteLoss");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteLoss);
  }
}

TEST_CASE("dropout is active only in training and is reproducible from its seed") {
  ModelConfig cfg = gradcheck_model_config(AttentionVariant::PartialGated);
  cfg.dropout = 0.3;
  Model<double> model(cfg);
  std::mt19937_64 rng(14);
  std::vector<TrainSample<double>> batch{{random_image<double>(rng, cfg.image_size), random_target(rng, 12, 4)}};
  const std::span<const TrainSample<double>> b(batch);
  const double eval1 = accumulate_batch(model, b, false, 1, 0);
  const double eval2 = accumulate_batch(model, b, false, 2, 5);
  CHECK(eval1 == eval2);
  const double tr1 = accumulate_batch(model, b, true, 1, 0);
  const double tr2 = accumulate_batch(model, b, true, 1, 0);
  const double tr3 = accumulate_batch(model, b, true, 1, 1);
  CHECK(tr1 == tr2);
  CHECK(tr1 != eval1);
  CHECK(tr1 != tr3);
  CHECK(dropout_seed(1, 0, 0) != dropout_seed(1, 0, 1));
  CHECK(dropout_seed(1, 0, 0) != dropout_seed(2, 0, 0));
}

TEST_CASE("fit is deterministic and stops at the target") {
  ModelConfig cfg = gradcheck_model_config(AttentionVariant::PartialGated);
  std::mt19937_64 rng(15);
  std::vector<TrainSample<double>> data;
  for (int i = 0; i < 5; ++i) data.push_back({random_image<double>(rng, cfg.image_size), random_target(rng, 12, 3)});
  TrainConfig tc;
  tc.steps = 12;
  tc.batch_size = 2;
  tc.lr_scale = 1.0;
  tc.warmup = 10;
  tc.log_every = 4;
  auto run = [&] {
    Model<double> m(cfg);
    Adam<double> opt(m.params(), tc);
    const auto r = fit(m, opt, std::span<const TrainSample<double>>(data), tc);
    return std::make_pair(r, m.params().all());
  };
  const auto [r1, p1] = run();
  const auto [r2, p2] = run();
  CHECK(r1.steps == 12);
  CHECK(r1.history.size() == 3);
  CHECK(r1.final_loss == r2.final_loss);
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i].value == p2[i].value);

  TrainConfig easy = tc;
  easy.eval_every = 3;
  easy.target_ea = 0.0;  // met at the first evaluation
  Model<double> m(cfg);
  Adam<double> opt(m.params(), easy);
  const auto r = fit(m, opt, std::span<const TrainSample<double>>(data), easy);
  CHECK(r.reached_target);
  CHECK(r.steps == 3);
  CHECK(r.train_ea >= 0.0);

  Adam<double> opt2(m.params(), tc);
  CHECK_THROWS_AS(fit(m, opt2, std::span<const TrainSample<double>>(), tc), Error);
}

TEST_CASE("a resumed fit matches an uninterrupted one") {
  ModelConfig cfg = gradcheck_model_config(AttentionVariant::FullGated);
  std::mt19937_64 rng(16);
  std::vector<TrainSample<double>> data;
  for (int i = 0; i < 5; ++i) data.push_back({random_image<double>(rng, cfg.image_size), random_target(rng, 12, 3)});
  const std::span<const TrainSample<double>> d(data);
  TrainConfig tc;
  tc.steps = 10;
  tc.batch_size = 2;
  tc.warmup = 5;

  Model<double> straight(cfg);
  Adam<double> o1(straight.params(), tc);
  fit(straight, o1, d, tc);

  Model<double> resumed(cfg);
  Adam<double> o2(resumed.params(), tc);
  TrainConfig first = tc;
  first.steps = 4;
  fit(resumed, o2, d, first);
  Adam<double> o3(resumed.params(), tc);
  o3.restore(o2.state());
  fit(resumed, o3, d, tc);

  CHECK(o3.state().step == 10);
  CHECK(same_params(straight.params(), resumed.params()));

  OptimizerState<double> wrong = o2.state();
  wrong.m.pop_back();
  CHECK_THROWS_AS(o3.restore(wrong), Error);
}
