#include "commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "tablatex/corpus/dataset.hpp"
#include "tablatex/corpus/extract.hpp"
#include "tablatex/corpus/synthetic.hpp"
#include "tablatex/error.hpp"
#include "tablatex/metrics/metrics.hpp"
#include "tablatex/nn/checkpoint.hpp"
#include "tablatex/nn/fault.hpp"
#include "tablatex/nn/fit.hpp"
#include "tablatex/pipeline.hpp"
#include "tablatex/verify/suites.hpp"

namespace tablatex::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

// Exclusive marker next to an output; a second writer fails instead of
// interleaving with the first.
class OutputLock {
 public:
  explicit OutputLock(fs::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      config_error("output is locked by another run (" + path_.string() + "); remove the file if that run is gone");
    const std::string pid = std::to_string(::getpid()) + "\n";
    (void)!::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) config_error(std::string(what) + " not found: " + path);
}

void prepare_output(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// Sections of a JSON run config; absent file or section gives {}.
json config_section(const std::string& path, const char* section) {
  if (path.empty()) return json::object();
  require_file(path, "config file");
  std::ifstream in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    config_error("cannot parse config " + path + ": " + e.what());
  }
  if (!j.is_object()) config_error("config " + path + " must be a JSON object");
  for (const auto& [key, v] : j.items())
    if (key != "data" && key != "model" && key != "train" && key != "verify" && key != "predict")
      config_error("unknown config section '" + key + "'");
  return j.contains(section) ? j.at(section) : json::object();
}

void print_resolved(const ojson& cfg) { std::cerr << "resolved config: " << cfg.dump() << '\n'; }

void write_json(const std::string& path, const ojson& j) {
  prepare_output(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) config_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

bool set(const CLI::Option* o) { return o && o->count() > 0; }

nn::ModelConfig preset_model(const std::string& preset, Task task, int vocab) {
  if (preset == "full") return nn::full_model_config(task, vocab);
  if (preset == "desk") return nn::desk_model_config(task, vocab);
  config_error("unknown preset '" + preset + "' (expected full or desk)");
}

nn::TrainConfig preset_train(const std::string& preset) {
  return preset == "desk" ? nn::desk_train_config() : nn::TrainConfig{};
}

// ---- build-data ---------------------------------------------------------------

struct BuildDataArgs {
  std::size_t synthetic = 0;
  std::vector<std::string> inputs;
  std::string out, config, variant = "tsrd", aspect = "act";
  std::uint64_t seed = 0;
  std::size_t mask_threshold = 1000;
  int image_size = 400;
  double train = 0.8, val = 0.1, test = 0.1;
  CLI::Option *o_synthetic = nullptr, *o_variant = nullptr, *o_aspect = nullptr, *o_seed = nullptr,
              *o_mask = nullptr, *o_size = nullptr, *o_train = nullptr, *o_val = nullptr, *o_test = nullptr;
};

std::vector<std::string> collect_tex_files(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::recursive_directory_iterator(in))
        if (e.is_regular_file() && e.path().extension() == ".tex") files.push_back(e.path().string());
    } else {
      require_file(in, "input");
      files.push_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

int cmd_build_data(BuildDataArgs& a) {
  const json sec = config_section(a.config, "data");
  corpus::BuildOptions o;
  std::size_t synthetic = 0;
  bool mask_given = false;
  try {
    for (const auto& [key, v] : sec.items()) {
      if (key == "variant") o.variant = corpus::parse_dataset_variant(v.get<std::string>());
      else if (key == "aspect") o.aspect = corpus::parse_aspect(v.get<std::string>());
      else if (key == "seed") o.seed = v.get<std::uint64_t>();
      else if (key == "mask_threshold") o.mask_threshold = v.get<std::size_t>(), mask_given = true;
      else if (key == "image_size") o.image_size = v.get<int>();
      else if (key == "synthetic") synthetic = v.get<std::size_t>();
      else if (key == "fractions")
        o.fractions = {v.at("train").get<double>(), v.at("val").get<double>(), v.at("test").get<double>()};
      else config_error("unknown data config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    config_error(std::string("data config: ") + e.what());
  }
  if (set(a.o_synthetic)) synthetic = a.synthetic;
  if (set(a.o_variant)) o.variant = corpus::parse_dataset_variant(a.variant);
  if (set(a.o_aspect)) o.aspect = corpus::parse_aspect(a.aspect);
  if (set(a.o_seed)) o.seed = a.seed;
  if (set(a.o_mask)) o.mask_threshold = a.mask_threshold, mask_given = true;
  if (set(a.o_size)) o.image_size = a.image_size;
  if (set(a.o_train)) o.fractions.train = a.train;
  if (set(a.o_val)) o.fractions.val = a.val;
  if (set(a.o_test)) o.fractions.test = a.test;
  if ((synthetic > 0) == !a.inputs.empty()) config_error("give exactly one of --synthetic N or --input PATH...");
  // Generated tables use few commands; masking them would erase the corpus.
  if (synthetic > 0 && !mask_given) o.mask_threshold = 0;
  if (o.image_size < 16 || o.image_size % 16 != 0) config_error("image_size must be a positive multiple of 16");
  const auto files = collect_tex_files(a.inputs);
  o.out_dir = a.out;

  ojson resolved{{"command", "build-data"},
                 {"out", a.out},
                 {"synthetic", synthetic},
                 {"inputs", files},
                 {"variant", corpus::to_string(o.variant)},
                 {"aspect", corpus::to_string(o.aspect)},
                 {"seed", o.seed},
                 {"mask_threshold", o.mask_threshold},
                 {"image_size", o.image_size},
                 {"fractions", {{"train", o.fractions.train}, {"val", o.fractions.val}, {"test", o.fractions.test}}}};
  print_resolved(resolved);

  std::vector<std::string> snippets;
  std::size_t unbalanced = 0;
  if (synthetic > 0) {
    for (auto& t : corpus::generate_synthetic_tables(o.seed, corpus::SyntheticSpec{}, synthetic))
      snippets.push_back(std::move(t.source));
  } else {
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      auto r = corpus::extract_tabulars_report(ss.str());
      unbalanced += r.unbalanced;
      for (auto& s : r.snippets) snippets.push_back(std::move(s));
    }
  }
  if (snippets.empty()) throw Error(ErrorKind::EmptyCorpus, "no tabular snippets found in the inputs");

  fs::create_directories(a.out);
  OutputLock lock(fs::path(a.out) / ".lock");
  const auto m = corpus::build_dataset(snippets, o);
  std::cout << "wrote " << (fs::path(a.out) / "manifest.jsonl").string() << ": " << m.samples.size() << " samples (train "
            << m.count(corpus::Split::Train) << ", val " << m.count(corpus::Split::Val) << ", test "
            << m.count(corpus::Split::Test) << ") from " << snippets.size() << " snippets, seed " << o.seed << '\n';
  for (const auto& [k, v] : m.diagnostics)
    if (v) std::cout << "  dropped " << v << " (" << k << ")\n";
  if (unbalanced) std::cout << "  skipped " << unbalanced << " unbalanced tabular blocks\n";
  return kOk;
}

// ---- train ----------------------------------------------------------------------

struct TrainArgs {
  std::string manifest, task, variant, config, out, preset = "full", resume, report;
  int steps = 0, batch = 0, warmup = 0, eval_every = 0, log_every = 0;
  double lr_scale = 0, target_ea = 0;
  std::uint64_t seed = 0;
  std::size_t limit = 0;
  CLI::Option *o_task = nullptr, *o_variant = nullptr, *o_steps = nullptr, *o_batch = nullptr, *o_warmup = nullptr,
              *o_eval = nullptr, *o_log = nullptr, *o_lr = nullptr, *o_target = nullptr, *o_seed = nullptr;
};

int cmd_train(TrainArgs& a) {
  require_file(a.manifest, "manifest");
  if (!a.resume.empty()) require_file(a.resume, "checkpoint");
  const auto manifest = corpus::read_manifest(a.manifest);
  const std::string root = fs::path(a.manifest).parent_path().string();
  const Task task = set(a.o_task) ? parse_task(a.task) : corpus::variant_task(manifest.variant);
  auto train_split = manifest.split(corpus::Split::Train);
  if (a.limit > 0 && train_split.size() > a.limit) train_split.resize(a.limit);
  if (train_split.empty()) throw Error(ErrorKind::EmptyDataset, "manifest has no training samples");

  std::optional<nn::Checkpoint<float>> resumed;
  if (!a.resume.empty()) resumed.emplace(nn::load_checkpoint<float>(a.resume));

  const Vocabulary vocab = resumed ? resumed->vocab : pipeline::build_vocabulary(task, train_split);
  if (vocab.task() != task) throw Error(ErrorKind::CheckpointError, "checkpoint was trained for the other task");

  nn::ModelConfig mc;
  if (resumed) {
    mc = resumed->model.config();
    if (set(a.o_variant) && nn::parse_variant(a.variant) != mc.variant)
      config_error("--variant differs from the resumed checkpoint");
  } else {
    mc = preset_model(a.preset, task, vocab.size());
    const json sec = config_section(a.config, "model");
    mc.max_decode_len = manifest.max_len;
    mc.image_size = manifest.image_size;
    nn::update_from_json(mc, sec);
    if (sec.contains("image_size") && mc.image_size != manifest.image_size)
      config_error("model image_size must match the manifest (" + std::to_string(manifest.image_size) + ")");
    if (set(a.o_variant)) mc.variant = nn::parse_variant(a.variant);
    if (set(a.o_seed)) mc.seed = a.seed;
    mc.task = task;
    mc.vocab_size = vocab.size();
    mc.validate();
  }
  if (mc.image_size != manifest.image_size)
    config_error("checkpoint image size " + std::to_string(mc.image_size) + " does not match the manifest");

  nn::TrainConfig tc = resumed ? resumed->train : preset_train(a.preset);
  nn::update_from_json(tc, config_section(a.config, "train"));
  if (set(a.o_steps)) tc.steps = a.steps;
  if (set(a.o_batch)) tc.batch_size = a.batch;
  if (set(a.o_warmup)) tc.warmup = a.warmup;
  if (set(a.o_eval)) tc.eval_every = a.eval_every;
  if (set(a.o_log)) tc.log_every = a.log_every;
  if (set(a.o_lr)) tc.lr_scale = a.lr_scale;
  if (set(a.o_target)) tc.target_ea = a.target_ea;
  if (set(a.o_seed)) tc.seed = a.seed;

  std::size_t longest = 0;
  for (const auto* s : train_split) longest = std::max(longest, pipeline::target_of(*s, task).size());
  if (static_cast<int>(longest) > mc.max_decode_len)
    config_error("a training target has " + std::to_string(longest) + " tokens, above max_decode_len " +
                 std::to_string(mc.max_decode_len));

  ojson resolved{{"command", "train"},
                 {"manifest", a.manifest},
                 {"task", to_string(task)},
                 {"samples", train_split.size()},
                 {"preset", a.preset},
                 {"resume", a.resume},
                 {"out", a.out},
                 {"model", ojson::parse(nn::to_json(mc).dump())},
                 {"train", ojson::parse(nn::to_json(tc).dump())}};
  print_resolved(resolved);

  OutputLock lock(a.out + ".lock");
  const auto data = pipeline::load_samples<float>(train_split, root, task, vocab, manifest.aspect, mc.image_size);
  nn::Model<float> model = resumed ? std::move(resumed->model) : nn::Model<float>(mc);
  nn::Adam<float> opt(model.params(), tc);
  if (resumed && resumed->optimizer) opt.restore(std::move(*resumed->optimizer));
  std::cerr << "training " << model.params().scalar_count() << " parameters on " << data.size() << " samples\n";

  const auto result = nn::fit<float>(model, opt, data, tc, [](const nn::FitEvent& e) {
    std::cerr << "step " << e.step << " loss " << e.loss << " lr " << e.lr;
    if (e.train_ea) std::cerr << " train_EA " << *e.train_ea;
    std::cerr << '\n';
  });

  const json extra{{"seed", tc.seed},
                   {"manifest", a.manifest},
                   {"steps", result.steps},
                   {"final_loss", result.final_loss},
                   {"train_ea", result.train_ea},
                   {"reached_target", result.reached_target}};
  prepare_output(a.out);
  nn::save_checkpoint<float>(a.out, model, vocab, tc, &opt.state(), extra);
  std::cout << "saved " << a.out << " after " << result.steps << " steps, loss " << result.final_loss;
  if (result.train_ea >= 0) std::cout << ", train EA " << result.train_ea;
  std::cout << " (" << result.seconds << " s, seed " << tc.seed << ")\n";

  if (!a.report.empty()) {
    ojson rep = resolved;
    rep["result"] = {{"steps", result.steps},
                     {"final_loss", result.final_loss},
                     {"train_ea", result.train_ea},
                     {"reached_target", result.reached_target},
                     {"seconds", result.seconds}};
    ojson hist = ojson::array();
    for (const auto& e : result.history) {
      ojson h{{"step", e.step}, {"loss", e.loss}, {"lr", e.lr}};
      if (e.train_ea) h["train_ea"] = *e.train_ea;
      hist.push_back(h);
    }
    rep["history"] = hist;
    write_json(a.report, rep);
  }
  return kOk;
}

// ---- predict ---------------------------------------------------------------------

struct PredictArgs {
  std::string ckpt, image, manifest, split = "test", out, aspect = "act", report;
};

int cmd_predict(PredictArgs& a) {
  require_file(a.ckpt, "checkpoint");
  if (a.image.empty() == a.manifest.empty()) config_error("give exactly one of --image or --manifest");
  if (!a.image.empty()) require_file(a.image, "image");
  if (!a.manifest.empty()) require_file(a.manifest, "manifest");
  const auto ck = nn::load_checkpoint<float>(a.ckpt);
  const int side = ck.model.config().image_size;

  std::vector<std::pair<std::string, nn::Mat<float>>> inputs;
  corpus::AspectMode aspect = corpus::parse_aspect(a.aspect);
  if (!a.image.empty()) {
    inputs.emplace_back(a.image, pipeline::model_input<float>(corpus::load_external_image(a.image, aspect, side)));
  } else {
    const auto m = corpus::read_manifest(a.manifest);
    aspect = m.aspect;
    const auto root = fs::path(a.manifest).parent_path();
    for (const auto* s : m.split(corpus::parse_split(a.split)))
      inputs.emplace_back(s->id, pipeline::model_input<float>(corpus::load_external_image(
                                     (root / s->image_path).string(), aspect, side)));
  }
  ojson resolved{{"command", "predict"},
                 {"ckpt", a.ckpt},
                 {"image", a.image},
                 {"manifest", a.manifest},
                 {"split", a.split},
                 {"aspect", corpus::to_string(aspect)},
                 {"out", a.out},
                 {"seed", ck.train.seed},
                 {"model", ojson::parse(nn::to_json(ck.model.config()).dump())}};
  print_resolved(resolved);

  OutputLock lock(a.out + ".lock");
  std::vector<TokenSequence> seqs;
  ojson samples = ojson::array();
  std::size_t truncated = 0;
  for (const auto& [id, img] : inputs) {
    auto p = pipeline::predict(ck.model, ck.vocab, img);
    truncated += p.truncated;
    samples.push_back({{"id", id}, {"length", p.tokens.size()}, {"truncated", p.truncated}});
    if (!a.image.empty()) std::cout << to_line(p.tokens) << '\n';
    seqs.push_back(std::move(p.tokens));
  }
  prepare_output(a.out);
  write_token_file(a.out, seqs);
  ojson meta = resolved;
  meta["samples"] = samples;
  write_json(a.report.empty() ? a.out + ".json" : a.report, meta);
  std::cout << "wrote " << seqs.size() << " prediction(s) to " << a.out;
  if (truncated) std::cout << " (" << truncated << " truncated at the length limit)";
  std::cout << '\n';
  return kOk;
}

// ---- evaluate --------------------------------------------------------------------

struct EvaluateArgs {
  std::string task, pred, truth, manifest, split = "test", report;
  bool json_out = false;
  CLI::Option* o_task = nullptr;
};

int cmd_evaluate(EvaluateArgs& a) {
  require_file(a.pred, "predictions");
  if (a.truth.empty() == a.manifest.empty()) config_error("give exactly one of --truth or --manifest");
  std::optional<corpus::DatasetManifest> m;
  if (!a.manifest.empty()) {
    require_file(a.manifest, "manifest");
    m = corpus::read_manifest(a.manifest);
  } else {
    require_file(a.truth, "ground truth");
  }
  if (!set(a.o_task) && !m) config_error("--task is required with --truth");
  const Task task = set(a.o_task) ? parse_task(a.task) : corpus::variant_task(m->variant);

  std::vector<TokenSequence> truth;
  if (m)
    for (const auto* s : m->split(corpus::parse_split(a.split))) truth.push_back(pipeline::target_of(*s, task));
  else
    truth = read_token_file(a.truth, task);
  const auto pred = read_token_file(a.pred, task);
  if (pred.size() != truth.size())
    config_error("predictions have " + std::to_string(pred.size()) + " lines, ground truth " +
                 std::to_string(truth.size()));
  ojson resolved{{"command", "evaluate"}, {"task", to_string(task)}, {"pred", a.pred},
                 {"truth", a.truth},      {"manifest", a.manifest}, {"split", a.split}};
  if (m) resolved["seed"] = m->seed;
  print_resolved(resolved);

  std::vector<metrics::Pair> pairs;
  for (std::size_t i = 0; i < pred.size(); ++i) pairs.push_back({pred[i], truth[i]});
  const auto rep = metrics::evaluate_corpus(pairs, task);
  ojson j = ojson::parse(metrics::to_json(rep));
  j["config"] = resolved;
  if (a.json_out) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << to_string(task) << " evaluation over " << rep.total << " samples\n";
    for (const auto& name : metrics::metric_names(task)) {
      const auto& v = rep.at(name);
      std::cout << "  " << name << "  ";
      if (v.eligible == 0)
        std::cout << "n/a";
      else if (name == "ALD")
        std::cout << v.value;
      else
        std::cout << 100.0 * v.value << "%";
      std::cout << "  (" << v.eligible << " eligible)\n";
    }
    for (const auto& [k, v] : rep.diagnostics) std::cout << "  [" << k << "] " << v << '\n';
  }
  if (!a.report.empty()) write_json(a.report, j);
  return kOk;
}

// ---- e2e -------------------------------------------------------------------------

struct E2EArgs {
  std::string image, tsr_ckpt, locr_ckpt, aspect = "act", out, report;
};

int cmd_e2e(E2EArgs& a) {
  require_file(a.image, "image");
  require_file(a.tsr_ckpt, "TSR checkpoint");
  require_file(a.locr_ckpt, "L-OCR checkpoint");
  const auto tsr = nn::load_checkpoint<float>(a.tsr_ckpt);
  const auto locr = nn::load_checkpoint<float>(a.locr_ckpt);
  if (tsr.vocab.task() != Task::TSR) throw Error(ErrorKind::CheckpointError, a.tsr_ckpt + " is not a TSR checkpoint");
  if (locr.vocab.task() != Task::LOCR)
    throw Error(ErrorKind::CheckpointError, a.locr_ckpt + " is not an L-OCR checkpoint");
  const auto aspect = corpus::parse_aspect(a.aspect);
  ojson resolved{{"command", "e2e"},
                 {"image", a.image},
                 {"tsr_ckpt", a.tsr_ckpt},
                 {"locr_ckpt", a.locr_ckpt},
                 {"aspect", corpus::to_string(aspect)},
                 {"tsr_seed", tsr.train.seed},
                 {"locr_seed", locr.train.seed}};
  print_resolved(resolved);

  auto run = [&](const nn::Checkpoint<float>& ck) {
    const int side = ck.model.config().image_size;
    return pipeline::predict(ck.model, ck.vocab,
                             pipeline::model_input<float>(corpus::load_external_image(a.image, aspect, side)));
  };
  const auto s = run(tsr);
  const auto c = run(locr);
  ojson rep = resolved;
  rep["tsr"] = to_line(s.tokens);
  rep["locr"] = to_line(c.tokens);
  rep["truncated"] = {{"tsr", s.truncated}, {"locr", c.truncated}};
  int code = kOk;
  try {
    const std::string latex = merge_tsr_locr(s.tokens, c.tokens);
    rep["status"] = "ok";
    rep["latex"] = latex;
    std::cout << latex << '\n';
    if (!a.out.empty()) {
      OutputLock lock(a.out + ".lock");
      prepare_output(a.out);
      std::ofstream(a.out, std::ios::trunc) << latex << '\n';
    }
  } catch (const CellCountMismatch& e) {
    rep["status"] = "cell_count_mismatch";
    rep["expected"] = e.expected();
    rep["found"] = e.found();
    std::cout << ojson{{"status", "cell_count_mismatch"}, {"expected", e.expected()}, {"found", e.found()}}.dump()
              << '\n';
    code = kOperationalError;
  }
  if (!a.report.empty()) write_json(a.report, rep);
  return code;
}

// ---- verify ----------------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all", config, report;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  double grad_tolerance = 1e-4;
  bool json_out = false, inject_fault = false;
  CLI::Option *o_n = nullptr, *o_seed = nullptr, *o_tol = nullptr;
};

int cmd_verify(VerifyArgs& a) {
  static const std::vector<std::string> known{"gradients", "metrics_oracle", "implications", "roundtrip",
                                              "containment"};
  if (a.suite != "all" && std::find(known.begin(), known.end(), a.suite) == known.end())
    config_error("unknown suite '" + a.suite + "'");
  const json sec = config_section(a.config, "verify");
  std::uint64_t seed = sec.value("seed", std::uint64_t{1});
  std::size_t n = sec.value("n", std::size_t{0});
  double tol = sec.value("gradient_tolerance", 1e-4);
  if (set(a.o_seed)) seed = a.seed;
  if (set(a.o_n)) n = a.n;
  if (set(a.o_tol)) tol = a.grad_tolerance;
  auto count = [&](std::size_t dflt) { return n > 0 ? n : dflt; };

  print_resolved({{"command", "verify"},
                  {"suite", a.suite},
                  {"seed", seed},
                  {"n", n},
                  {"gradient_tolerance", tol},
                  {"inject_gradient_fault", a.inject_fault}});

  std::optional<nn::ScopedGradientFault> fault;
  if (a.inject_fault) fault.emplace(nn::GradientFault::MatmulLhs);

  std::vector<verify::SuiteReport> reports;
  auto want = [&](const char* s) { return a.suite == "all" || a.suite == s; };
  if (want("gradients")) {
    verify::GradientOptions g;
    g.seed = seed;
    g.tolerance = tol;
    reports.push_back(verify::run_gradient_suite(g));
  }
  if (want("metrics_oracle")) reports.push_back(verify::run_metrics_oracle_suite(count(1000), seed));
  if (want("implications")) reports.push_back(verify::run_implication_suite(count(10000), seed));
  if (want("roundtrip")) reports.push_back(verify::run_roundtrip_suite(count(1000), seed));
  if (want("containment")) reports.push_back(verify::run_containment_suite(count(10), seed));

  bool ok = true;
  ojson all = ojson::array();
  for (const auto& r : reports) {
    ok = ok && r.passed();
    all.push_back(r.to_json());
    if (!a.json_out) std::cout << r.to_text();
  }
  ojson j{{"passed", ok}, {"seed", seed}, {"suites", all}};
  if (a.json_out) std::cout << j.dump(2) << '\n';
  if (!a.report.empty()) write_json(a.report, j);
  return ok ? kOk : kVerificationFailure;
}

}  // namespace

std::function<int()> register_commands(CLI::App& app) {
  auto bd_args = std::make_shared<BuildDataArgs>();
  auto* bd = app.add_subcommand("build-data", "Build a dataset manifest and images from .tex files or synthetic tables");
  {
    auto& a = *bd_args;
    a.o_synthetic = bd->add_option("--synthetic", a.synthetic, "Generate N synthetic tables instead of reading input");
    bd->add_option("--input", a.inputs, ".tex files or directories searched for .tex files");
    bd->add_option("--out", a.out, "Output directory (manifest.jsonl, images/)")->required();
    bd->add_option("--config", a.config, "JSON run config; flags override its \"data\" section");
    a.o_variant = bd->add_option("--variant", a.variant, "tsrd | locr250 | locr500");
    a.o_aspect = bd->add_option("--aspect", a.aspect, "act | fat");
    a.o_seed = bd->add_option("--seed", a.seed, "Generator and split seed");
    a.o_mask = bd->add_option("--mask-threshold", a.mask_threshold,
                              "Mask commands rarer than this (default 1000, 0 for synthetic)");
    a.o_size = bd->add_option("--image-size", a.image_size, "Square image side in pixels (multiple of 16)");
    a.o_train = bd->add_option("--train-fraction", a.train);
    a.o_val = bd->add_option("--val-fraction", a.val);
    a.o_test = bd->add_option("--test-fraction", a.test);
  }

  auto tr_args = std::make_shared<TrainArgs>();
  auto* tr = app.add_subcommand("train", "Train a model on a manifest's training split");
  {
    auto& a = *tr_args;
    tr->add_option("--manifest", a.manifest, "manifest.jsonl from build-data")->required();
    a.o_task = tr->add_option("--task", a.task, "tsr | locr (default: the manifest's task)");
    a.o_variant = tr->add_option("--variant", a.variant, "rt | fgrt | pgrt");
    tr->add_option("--config", a.config, "JSON run config with \"model\" and \"train\" sections");
    tr->add_option("--out", a.out, "Checkpoint path")->required();
    tr->add_option("--preset", a.preset, "full | desk: base model and training settings");
    tr->add_option("--resume", a.resume, "Continue from this checkpoint (parameters and optimizer state)");
    tr->add_option("--report", a.report, "Write a JSON training report here");
    tr->add_option("--limit", a.limit, "Use only the first N training samples");
    a.o_steps = tr->add_option("--steps", a.steps, "Total optimizer updates");
    a.o_batch = tr->add_option("--batch-size", a.batch);
    a.o_lr = tr->add_option("--lr-scale", a.lr_scale, "Noam schedule scale factor");
    a.o_warmup = tr->add_option("--warmup", a.warmup, "Noam warmup steps");
    a.o_eval = tr->add_option("--eval-every", a.eval_every, "Decode the training set every N steps (0 = never)");
    a.o_target = tr->add_option("--target-ea", a.target_ea, "Stop once training exact match reaches this rate");
    a.o_log = tr->add_option("--log-every", a.log_every);
    a.o_seed = tr->add_option("--seed", a.seed, "Initialization, batching and dropout seed");
  }

  auto pr_args = std::make_shared<PredictArgs>();
  auto* pr = app.add_subcommand("predict", "Greedy-decode images with a trained checkpoint");
  {
    auto& a = *pr_args;
    pr->add_option("--ckpt", a.ckpt, "Checkpoint")->required();
    pr->add_option("--image", a.image, "PNG or JPEG table image");
    pr->add_option("--manifest", a.manifest, "Predict every sample of a manifest split instead");
    pr->add_option("--split", a.split, "train | val | test");
    pr->add_option("--aspect", a.aspect, "act | fat sizing for --image");
    pr->add_option("--out", a.out, "Token file, one sequence per line")->required();
    pr->add_option("--report", a.report, "JSON metadata path (default: <out>.json)");
  }

  auto ev_args = std::make_shared<EvaluateArgs>();
  auto* ev = app.add_subcommand("evaluate", "Score predicted token sequences against ground truth");
  {
    auto& a = *ev_args;
    a.o_task = ev->add_option("--task", a.task, "tsr | locr");
    ev->add_option("--pred", a.pred, "Predicted token file")->required();
    ev->add_option("--truth", a.truth, "Ground-truth token file");
    ev->add_option("--manifest", a.manifest, "Take ground truth from a manifest split instead");
    ev->add_option("--split", a.split, "train | val | test");
    ev->add_option("--report", a.report, "Write the JSON report here");
    ev->add_flag("--json", a.json_out, "Print JSON instead of text");
  }

  auto e2e_args = std::make_shared<E2EArgs>();
  auto* e2e = app.add_subcommand("e2e", "Recognize structure and content of one image and merge them into LaTeX");
  {
    auto& a = *e2e_args;
    e2e->add_option("--image", a.image, "PNG or JPEG table image")->required();
    e2e->add_option("--tsr-ckpt", a.tsr_ckpt, "Structure model checkpoint")->required();
    e2e->add_option("--locr-ckpt", a.locr_ckpt, "Content model checkpoint")->required();
    e2e->add_option("--aspect", a.aspect, "act | fat");
    e2e->add_option("--out", a.out, "Write the LaTeX here as well");
    e2e->add_option("--report", a.report, "Write a JSON report here");
  }

  auto vf_args = std::make_shared<VerifyArgs>();
  auto* vf = app.add_subcommand("verify", "Run the property and oracle suites");
  {
    auto& a = *vf_args;
    vf->add_option("suite", a.suite, "gradients | metrics_oracle | implications | roundtrip | containment | all");
    a.o_n = vf->add_option("--n", a.n, "Sample count for the randomized suites");
    a.o_seed = vf->add_option("--seed", a.seed);
    a.o_tol = vf->add_option("--grad-tolerance", a.grad_tolerance, "Max relative gradient error (default 1e-4)");
    vf->add_option("--config", a.config, "JSON run config with a \"verify\" section");
    vf->add_option("--report", a.report, "Write the JSON report here");
    vf->add_flag("--json", a.json_out, "Print JSON instead of text");
    vf->add_flag("--inject-gradient-fault", a.inject_fault, "Test fixture: corrupt one matmul gradient");
  }

  return [=]() -> int {
    if (bd->parsed()) return cmd_build_data(*bd_args);
    if (tr->parsed()) return cmd_train(*tr_args);
    if (pr->parsed()) return cmd_predict(*pr_args);
    if (ev->parsed()) return cmd_evaluate(*ev_args);
    if (e2e->parsed()) return cmd_e2e(*e2e_args);
    if (vf->parsed()) return cmd_verify(*vf_args);
    return kOperationalError;
  };
}

}  // namespace tablatex::cli
