#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with `args` (shell syntax), capturing stdout; stderr is discarded.
Run cli(const std::string& args) {
  const std::string cmd = std::string(TABLATEX_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("tablatex_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string tree_bytes(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += fs::relative(f, root).string() + '\n' + fixtures::read_file(f.string());
  return all;
}

// The PASS/FAIL lines of a verify run (summary lines also carry wall time).
std::string verdicts(const std::string& out) {
  std::string kept, line;
  std::istringstream in(out);
  while (std::getline(in, line))
    if (line.rfind("PASS ", 0) == 0 || line.rfind("FAIL ", 0) == 0) kept += line + '\n';
  return kept;
}

}  // namespace

TEST_CASE("usage errors exit with status 1") {
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("verify no_such_suite").code == 1);
  CHECK(cli("train --manifest /nonexistent/manifest.jsonl --out /tmp/x.ckpt").code == 1);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("verify is reproducible and signals failures with status 2") {
  const Run a = cli("verify metrics_oracle --n 100 --seed 4");
  const Run b = cli("verify metrics_oracle --n 100 --seed 4");
  CHECK(a.code == 0);
  CHECK_FALSE(verdicts(a.out).empty());
  CHECK(verdicts(a.out) == verdicts(b.out));
  CHECK(a.out.find("PASS") != std::string::npos);
  CHECK(a.out.find("FAIL") == std::string::npos);

  const Run j = cli("verify implications --n 200 --json");
  CHECK(j.code == 0);
  const auto parsed = nlohmann::json::parse(j.out);
  CHECK(parsed.at("passed") == true);

  const Run broken = cli("verify gradients --inject-gradient-fault");
  CHECK(broken.code == 2);
  CHECK(broken.out.find("FAIL") != std::string::npos);
}

TEST_CASE("build-data is deterministic and guards its output directory") {
  TempDir dir;
  const std::string args = " --synthetic 20 --seed 5 --image-size 64";
  REQUIRE(cli("build-data --out " + (dir / "a") + args).code == 0);
  REQUIRE(cli("build-data --out " + (dir / "b") + args).code == 0);
  CHECK(tree_bytes(dir / "a") == tree_bytes(dir / "b"));
  CHECK_FALSE(fs::exists(dir / "a/.lock"));
  REQUIRE(cli("build-data --out " + (dir / "c") + " --synthetic 20 --seed 6 --image-size 64").code == 0);
  CHECK(fixtures::read_file(dir / "a/manifest.jsonl") != fixtures::read_file(dir / "c/manifest.jsonl"));

  // A held lock makes a concurrent writer fail without touching the directory.
  std::ofstream(dir / "a/.lock") << "";
  CHECK(cli("build-data --out " + (dir / "a") + " --synthetic 20 --seed 9 --image-size 64").code == 1);
  CHECK(fs::exists(dir / "a/.lock"));
  fs::remove(dir / "a/.lock");
  CHECK(tree_bytes(dir / "a") == tree_bytes(dir / "b"));

  CHECK(cli("build-data --out " + (dir / "d") + " --synthetic 20 --image-size 70").code == 1);
  CHECK(cli("build-data --out " + (dir / "e") + " --synthetic 20 --variant nope").code == 1);
}

TEST_CASE("train, predict, evaluate and e2e work together") {
  TempDir dir;
  REQUIRE(cli("build-data --out " + (dir / "data") + " --synthetic 10 --seed 2 --image-size 64").code == 0);
  const std::string manifest = dir / "data/manifest.jsonl";
  const std::string common = " --preset desk --batch-size 2 --log-every 0";
  REQUIRE(cli("train --manifest " + manifest + " --task tsr --out " + (dir / "tsr.ckpt") + common +
              " --steps 4 --report " + (dir / "train.json"))
              .code == 0);
  REQUIRE(cli("train --manifest " + manifest + " --task locr --out " + (dir / "locr.ckpt") + common + " --steps 4").code == 0);
  const auto report = nlohmann::json::parse(fixtures::read_file(dir / "train.json"));
  CHECK(report.at("result").at("steps") == 4);

  // Resuming continues the optimizer step count.
  REQUIRE(cli("train --manifest " + manifest + " --task tsr --out " + (dir / "tsr2.ckpt") + common +
              " --steps 6 --resume " + (dir / "tsr.ckpt") + " --report " + (dir / "train2.json"))
              .code == 0);
  CHECK(nlohmann::json::parse(fixtures::read_file(dir / "train2.json")).at("result").at("steps") == 6);

  REQUIRE(cli("predict --ckpt " + (dir / "tsr.ckpt") + " --manifest " + manifest + " --split train --out " +
              (dir / "pred.txt"))
              .code == 0);
  const std::string pred = fixtures::read_file(dir / "pred.txt");
  REQUIRE(cli("predict --ckpt " + (dir / "tsr.ckpt") + " --manifest " + manifest + " --split train --out " +
              (dir / "pred2.txt"))
              .code == 0);
  CHECK(pred == fixtures::read_file(dir / "pred2.txt"));
  const auto meta = nlohmann::json::parse(fixtures::read_file(dir / "pred.txt.json"));
  CHECK(meta.contains("seed"));

  const Run ev = cli("evaluate --task tsr --pred " + (dir / "pred.txt") + " --manifest " + manifest +
                     " --split train --json");
  REQUIRE(ev.code == 0);
  const auto metrics = nlohmann::json::parse(ev.out).at("metrics");
  for (const char* k : {"EA", "E95", "RA", "CA", "MCR", "MRR"}) CHECK(metrics.contains(k));

  // Predictions equal to the truth score perfectly.
  const Run self = cli("evaluate --task tsr --pred " + (dir / "pred.txt") + " --truth " + (dir / "pred.txt") + " --json");
  REQUIRE(self.code == 0);
  CHECK(nlohmann::json::parse(self.out).at("metrics").at("EA").at("value") == 1.0);
  CHECK(cli("evaluate --task tsr --pred " + (dir / "pred.txt") + " --truth " + manifest).code == 1);

  std::string image;
  for (const auto& e : fs::directory_iterator(dir / "data/images")) {
    image = e.path().string();
    break;
  }
  const std::string e2e = "e2e --image " + image + " --tsr-ckpt " + (dir / "tsr.ckpt") + " --locr-ckpt " +
                          (dir / "locr.ckpt");
  const Run r1 = cli(e2e), r2 = cli(e2e);
  CHECK(r1.code == r2.code);
  CHECK(r1.out == r2.out);
  CHECK((r1.code == 0 || r1.code == 1));
  if (r1.code == 1) {
    const auto j = nlohmann::json::parse(r1.out);
    CHECK(j.at("status") == "cell_count_mismatch");
    CHECK(j.contains("expected"));
    CHECK(j.contains("found"));
  }
  CHECK(cli("e2e --image " + image + " --tsr-ckpt " + (dir / "locr.ckpt") + " --locr-ckpt " + (dir / "locr.ckpt"))
            .code == 1);
}
