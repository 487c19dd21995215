#include <json.hpp>

#include "tablatex/error.hpp"
#include "tablatex/metrics/metrics.hpp"
#include "tablatex/structure.hpp"

namespace tablatex::metrics {

namespace {

struct Tally {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  MetricValue value() const { return {n ? sum / static_cast<double>(n) : 0.0, n}; }
};

// Per-position agreement of span-size lists, for the micro-averaged variant.
void micro_spans(const std::vector<int>& pred, const std::vector<int>& truth, double& hits, double& total) {
  for (std::size_t k = 0; k < truth.size(); ++k)
    if (k < pred.size() && pred[k] == truth[k]) hits += 1;
  total += static_cast<double>(truth.size());
}

}  // namespace

const std::vector<std::string>& metric_names(Task task) {
  static const std::vector<std::string> tsr{"EA", "E95", "RA", "CA", "MCR", "MRR"};
  static const std::vector<std::string> locr{"EA", "E95", "AN", "LT", "LS", "NLS", "ALD"};
  return task == Task::TSR ? tsr : locr;
}

std::vector<std::string> MetricReport::names() const { return metric_names(task); }

MetricReport evaluate_corpus(std::span<const Pair> pairs, Task task) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyCorpus, "no prediction/truth pairs to evaluate");
  for (const auto& p : pairs)
    if (p.pred.task != task || p.truth.task != task)
      throw Error(ErrorKind::TaskMismatch, std::string("corpus contains a pair that is not ") + to_string(task));

  std::map<std::string, Tally> t;
  MetricReport report;
  report.task = task;
  report.total = pairs.size();

  double pred_fail = 0, truth_fail = 0;
  double mc_hits = 0, mc_total = 0, mr_hits = 0, mr_total = 0;
  for (const auto& [pred, truth] : pairs) {
    t["EA"].add(exact_match(pred, truth));
    t["E95"].add(match_at_95(pred, truth));
    if (task == Task::TSR) {
      std::optional<TableStructure> ts, ps;
      try {
        ts = parse_structure(truth);
      } catch (const Error&) {
        truth_fail += 1;
      }
      try {
        ps = parse_structure(pred);
      } catch (const Error&) {
        pred_fail += 1;
      }
      t["RA"].add(ts && ps && ts->n_rows == ps->n_rows);
      t["CA"].add(ts && ps && ts->n_cols == ps->n_cols);
      if (auto m = multicolumn_match(pred, truth)) {
        t["MCR"].add(*m);
        micro_spans(span_sizes(pred, SpanKind::MultiColumn), span_sizes(truth, SpanKind::MultiColumn), mc_hits,
                    mc_total);
      } else {
        t["MCR"];
      }
      if (auto m = multirow_match(pred, truth)) {
        t["MRR"].add(*m);
        micro_spans(span_sizes(pred, SpanKind::MultiRow), span_sizes(truth, SpanKind::MultiRow), mr_hits, mr_total);
      } else {
        t["MRR"];
      }
    } else {
      t["AN"].add(category_match(pred, truth, TokenCategory::AN));
      t["LT"].add(category_match(pred, truth, TokenCategory::LT));
      t["LS"].add(category_match(pred, truth, TokenCategory::LS));
      t["NLS"].add(category_match(pred, truth, TokenCategory::NLS));
      t["ALD"].add(static_cast<double>(levenshtein(pred, truth)));
    }
  }
  for (const auto& name : metric_names(task)) report.metrics[name] = t[name].value();
  if (task == Task::TSR) {
    report.diagnostics["pred_parse_failures"] = pred_fail;
    report.diagnostics["truth_parse_failures"] = truth_fail;
    report.diagnostics["MCR_micro"] = mc_total > 0 ? mc_hits / mc_total : 0.0;
    report.diagnostics["MRR_micro"] = mr_total > 0 ? mr_hits / mr_total : 0.0;
    report.diagnostics["multicolumn_spans"] = mc_total;
    report.diagnostics["multirow_spans"] = mr_total;
  }
  return report;
}

std::string to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["task"] = to_string(report.task);
  j["total"] = report.total;
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto& name : metric_names(report.task)) {
    const auto& v = report.at(name);
    m[name] = {{"value", v.value}, {"eligible", v.eligible}};
  }
  j["metrics"] = m;
  j["diagnostics"] = report.diagnostics;
  return j.dump(2);
}

}  // namespace tablatex::metrics
