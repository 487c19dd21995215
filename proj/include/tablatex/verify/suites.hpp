#pragma once

// Property suites shared by `tablatex verify` and the acceptance tests. Each
// suite is deterministic given its options and reports one line per check.

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "tablatex/corpus/random.hpp"
#include "tablatex/metrics/metrics.hpp"
#include "tablatex/nn/config.hpp"

namespace tablatex::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // error, violation count, ...
  double tolerance = 0.0;  // pass iff measured <= tolerance
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  std::vector<CheckResult> checks;

  bool passed() const;
  void add(std::string name, double measured, double tolerance, std::string detail = {});
  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

struct GradientOptions {
  std::uint64_t seed = 1;
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor of the relative error, for gradients that vanish.
  double floor = 1e-6;
  bool op_level = true;
  std::vector<nn::AttentionVariant> variants{nn::AttentionVariant::Vanilla, nn::AttentionVariant::FullGated,
                                             nn::AttentionVariant::PartialGated};
};

// Central finite differences against reverse-mode gradients in float64,
// for every differentiable op and every scalar of every model parameter.
SuiteReport run_gradient_suite(const GradientOptions& opts);

// Per-sample and corpus-level agreement of every metric with the oracles.
SuiteReport run_metrics_oracle_suite(std::size_t n, std::uint64_t seed, std::size_t max_len = 30);

// EA => E95, EA => RA and CA, EA <=> edit distance 0, on every pair and on
// random sub-corpora.
SuiteReport run_implication_suite(std::size_t n, std::uint64_t seed, std::size_t max_len = 30);

// Tokenize/detokenize fixed points, generator metadata and merge
// reconstruction on a synthetic corpus.
SuiteReport run_roundtrip_suite(std::size_t n, std::uint64_t seed);

// Ungated FGRT/PGRT forward passes compared bit for bit with RT.
SuiteReport run_containment_suite(std::size_t n, std::uint64_t seed);

// A random (prediction, truth) pair. Truths are well formed; predictions are
// copies, edits, truncations or extensions of them.
metrics::Pair random_pair(corpus::Rng& rng, Task task, std::size_t max_len);

}  // namespace tablatex::verify
