#include "tablatex/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace tablatex::nn {

namespace {

constexpr char kMagic[8] = {'T', 'L', 'X', 'C', 'K', 'P', 'T', '\0'};

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::CheckpointError, what); }

template <class T>
void put(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) fail("truncated checkpoint");
  return v;
}

template <class S>
void put_tensor(std::ostream& out, const std::string& name, const Mat<S>& m) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  put<std::uint8_t>(out, sizeof(S) == 4 ? 1 : 2);
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(S)));
}

template <class S>
Mat<S> get_tensor(std::istream& in, const std::string& want_name, Eigen::Index rows, Eigen::Index cols) {
  const auto len = get<std::uint32_t>(in);
  if (len > 4096) fail("implausible tensor name length");
  std::string name(len, '\0');
  if (!in.read(name.data(), len)) fail("truncated checkpoint");
  if (name != want_name) fail("expected tensor " + want_name + ", found " + name);
  const auto r = get<std::uint32_t>(in), c = get<std::uint32_t>(in);
  if (r != rows || c != cols)
    fail("tensor " + name + " is " + std::to_string(r) + "x" + std::to_string(c) + ", model expects " +
         std::to_string(rows) + "x" + std::to_string(cols));
  const auto dtype = get<std::uint8_t>(in);
  Mat<S> m(rows, cols);
  const auto n = static_cast<std::size_t>(rows * cols);
  if (dtype == 1) {
    std::vector<float> buf(n);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 4))) fail("truncated checkpoint");
    for (std::size_t i = 0; i < n; ++i) m.data()[i] = static_cast<S>(buf[i]);
  } else if (dtype == 2) {
    std::vector<double> buf(n);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 8))) fail("truncated checkpoint");
    for (std::size_t i = 0; i < n; ++i) m.data()[i] = static_cast<S>(buf[i]);
  } else {
    fail("unknown dtype in tensor " + name);
  }
  return m;
}

}  // namespace

template <class S>
void save_checkpoint(const std::string& path, const Model<S>& model, const Vocabulary& vocab,
                     const TrainConfig& train, const OptimizerState<S>* optimizer, const nlohmann::json& extra) {
  nlohmann::json meta;
  meta["model"] = to_json(model.config());
  meta["train"] = to_json(train);
  meta["vocab"] = {{"task", to_string(vocab.task())}, {"tokens", vocab.tokens()}};
  meta["extra"] = extra;
  const std::string text = meta.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot write " + path);
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto& params = model.params().all();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) put_tensor(out, p.name, p.value);
  put<std::uint8_t>(out, optimizer ? 1 : 0);
  if (optimizer) {
    put<std::int64_t>(out, optimizer->step);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(optimizer->warmup));
    put<double>(out, optimizer->lr_scale);
    for (std::size_t i = 0; i < params.size(); ++i) {
      put_tensor(out, "adam.m." + params[i].name, optimizer->m.at(i));
      put_tensor(out, "adam.v." + params[i].name, optimizer->v.at(i));
    }
  }
  if (!out) fail("failed writing " + path);
}

template <class S>
Checkpoint<S> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) fail(path + " is not a checkpoint");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    fail("checkpoint version " + std::to_string(version) + " is not supported (expected " +
         std::to_string(kCheckpointVersion) + ")");
  const auto len = get<std::uint64_t>(in);
  if (len > (1u << 30)) fail("implausible metadata length");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) fail("truncated checkpoint");

  ModelConfig mc;
  TrainConfig tc;
  std::vector<std::string> tokens;
  Task vtask;
  nlohmann::json extra;
  try {
    const auto meta = nlohmann::json::parse(text);
    update_from_json(mc, meta.at("model"));
    update_from_json(tc, meta.at("train"));
    vtask = parse_task(meta.at("vocab").at("task").get<std::string>());
    tokens = meta.at("vocab").at("tokens").get<std::vector<std::string>>();
    extra = meta.value("extra", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("bad checkpoint metadata: ") + e.what());
  } catch (const Error& e) {
    fail(std::string("bad checkpoint metadata: ") + e.what());
  }
  Vocabulary vocab = Vocabulary::from_tokens(vtask, tokens);
  if (vocab.size() != mc.vocab_size) fail("vocabulary size does not match the model configuration");
  Model<S> model(mc);
  auto& params = model.params().all();
  if (get<std::uint32_t>(in) != params.size()) fail("parameter count does not match the model configuration");
  for (auto& p : params) p.value = get_tensor<S>(in, p.name, p.value.rows(), p.value.cols());
  std::optional<OptimizerState<S>> opt;
  if (get<std::uint8_t>(in)) {
    OptimizerState<S> st;
    st.step = get<std::int64_t>(in);
    st.warmup = static_cast<int>(get<std::uint32_t>(in));
    st.lr_scale = get<double>(in);
    for (auto& p : params) {
      st.m.push_back(get_tensor<S>(in, "adam.m." + p.name, p.value.rows(), p.value.cols()));
      st.v.push_back(get_tensor<S>(in, "adam.v." + p.name, p.value.rows(), p.value.cols()));
    }
    opt = std::move(st);
  }
  return Checkpoint<S>{std::move(model), std::move(vocab), tc, std::move(opt), std::move(extra)};
}

template void save_checkpoint<float>(const std::string&, const Model<float>&, const Vocabulary&, const TrainConfig&,
                                     const OptimizerState<float>*, const nlohmann::json&);
template void save_checkpoint<double>(const std::string&, const Model<double>&, const Vocabulary&, const TrainConfig&,
                                      const OptimizerState<double>*, const nlohmann::json&);
template Checkpoint<float> load_checkpoint<float>(const std::string&);
template Checkpoint<double> load_checkpoint<double>(const std::string&);

}  // namespace tablatex::nn
