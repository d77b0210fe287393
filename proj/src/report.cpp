#include "shg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace shg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string architecture_of(const std::string& label) {
  return label.find("reasoning") != std::string::npos ? "reasoning" : "standard";
}

// Stable per-(model,speech) bootstrap stream: campaign seed folded with an
// FNV-1a hash of the cell name.
std::uint64_t cell_seed(std::uint64_t seed, const std::string& model,
                        const std::string& speech) {
  std::uint64_t h = 1469598103934665603ull;
  for (const std::string* s : {&model, &speech}) {
    for (char c : *s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    h ^= '|';
    h *= 1099511628211ull;
  }
  return h ^ seed;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += '\n';
  return out;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ReportError("cannot write '" + path.string() + "'");
  out << content;
}

MetricSummary metric_of(const ModelSummary& s, const std::string& name) {
  const auto it = s.metrics.find(name);
  if (it == s.metrics.end()) throw ReportError("summary missing metric '" + name + "'");
  return it->second;
}

json summary_json(const MetricSummary& m) {
  json j;
  j["mean"] = m.mean;
  j["sd"] = m.sd;
  j["per_run"] = m.per_run;
  if (m.excluded_runs > 0) j["excluded_runs"] = m.excluded_runs;
  if (m.single_run) j["single_run"] = true;
  return j;
}

}  // namespace

std::string format3(double v) {
  const double r = std::round(v * 1000.0) / 1000.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", r);
  // avoid the "-0.000" artifact
  if (std::string(buf) == "-0.000") return "0.000";
  return buf;
}

HumanScores human_scores_from(const Corpus& corpus) {
  HumanScores humans;
  for (const auto& target : corpus.targets)
    humans.by_item[target.id] = target.human_scores;
  return humans;
}

std::vector<FigureRow> figure_data(const std::vector<RunRecord>& records,
                                   const Corpus& corpus, std::uint64_t seed,
                                   int resamples) {
  std::vector<FigureRow> rows;
  const auto tables = score_table(records);
  for (const auto& [label, table] : tables) {
    for (std::size_t i = 0; i < table.matrix.items.size(); ++i) {
      FigureRow row;
      row.model = label;
      row.speech = table.matrix.items[i];
      for (const auto& cell : table.matrix.cells[i])
        if (cell) row.runs.push_back(*cell);
      if (row.runs.empty()) continue;
      row.mean = mean(row.runs);
      const auto cis = bootstrap_ci(row.runs, resamples, {0.95, 0.99},
                                    cell_seed(seed, label, row.speech));
      row.ci95 = cis[0];
      row.ci99 = cis[1];
      rows.push_back(std::move(row));
    }
  }
  for (const auto& target : corpus.targets) {
    if (target.human_scores.empty()) continue;
    FigureRow row;
    row.model = "human";
    row.speech = target.id;
    row.runs = target.human_scores;
    row.mean = human_benchmark(target);
    rows.push_back(std::move(row));
  }
  return rows;
}

ReplicationBundle replicate(const std::vector<RunRecord>& records, const Corpus& corpus,
                            std::uint64_t seed, int resamples, bool include_pooled) {
  if (records.empty()) throw ReportError("no run records");
  for (const auto& target : corpus.targets)
    if (target.human_scores.empty())
      throw ReportError("test speech '" + target.id + "' has no human scores");

  ReplicationBundle bundle;
  auto tables = score_table(records);
  const HumanScores humans = human_scores_from(corpus);

  // Coverage gaps are reported, not fatal: the battery runs on the items a
  // model graded in every run, and models with no complete item are dropped.
  for (auto it = tables.begin(); it != tables.end();) {
    auto& [label, table] = *it;
    if (table.matrix.items.size() != corpus.targets.size())
      bundle.coverage_warnings.push_back(
          label + ": graded " + std::to_string(table.matrix.items.size()) + " of " +
          std::to_string(corpus.targets.size()) + " speeches");

    ModelRunTable complete;
    complete.model_label = table.model_label;
    complete.matrix.raters = table.matrix.raters;
    std::size_t missing = 0;
    for (std::size_t i = 0; i < table.matrix.items.size(); ++i) {
      bool full = true;
      for (const auto& cell : table.matrix.cells[i])
        if (!cell) {
          full = false;
          ++missing;
        }
      if (full) {
        complete.matrix.items.push_back(table.matrix.items[i]);
        complete.matrix.cells.push_back(table.matrix.cells[i]);
        complete.item_means.push_back(table.item_means[i]);
      }
    }
    if (missing > 0)
      bundle.coverage_warnings.push_back(label + ": " + std::to_string(missing) +
                                         " missing run cells");
    if (complete.matrix.items.size() < 2) {
      bundle.coverage_warnings.push_back(label + ": dropped, too few fully graded speeches");
      it = tables.erase(it);
    } else {
      table = std::move(complete);
      ++it;
    }
  }

  bundle.summaries = summarize_all(tables, humans);
  for (const auto& s : bundle.summaries) {
    bundle.table_agreement.push_back({s.model_label, architecture_of(s.model_label),
                                      metric_of(s, "pearson"), metric_of(s, "spearman"),
                                      metric_of(s, "icc"), metric_of(s, "ccc"),
                                      metric_of(s, "mae"), metric_of(s, "rmse")});
    bundle.table_alpha.push_back({s.model_label, s.alpha_all, s.alpha_ai_only, s.coder_count});
    bundle.table_error.push_back({s.model_label, metric_of(s, "mae"), metric_of(s, "rmse"),
                                  metric_of(s, "bias")});
    bundle.table_calibration.push_back({s.model_label, metric_of(s, "intercept"),
                                        metric_of(s, "slope"), metric_of(s, "r_squared")});
  }
  bundle.figure_data = figure_data(records, corpus, seed, resamples);
  bundle.leaderboard = rank_models(bundle.summaries);
  if (include_pooled)
    for (const auto& [label, table] : tables)
      bundle.pooled[label] = pooled_metrics(table, humans);
  return bundle;
}

void write_bundle(const ReplicationBundle& bundle, const fs::path& out_dir) {
  fs::create_directories(out_dir);

  std::string agreement = csv_line(
      {"model", "architecture", "pearson", "pearson_sd", "spearman", "spearman_sd", "icc",
       "icc_sd", "ccc", "ccc_sd", "mae", "mae_sd", "rmse", "rmse_sd"});
  for (const auto& r : bundle.table_agreement)
    agreement += csv_line({r.model, r.architecture, format3(r.pearson.mean),
                           format3(r.pearson.sd), format3(r.spearman.mean),
                           format3(r.spearman.sd), format3(r.icc.mean), format3(r.icc.sd),
                           format3(r.ccc.mean), format3(r.ccc.sd), format3(r.mae.mean),
                           format3(r.mae.sd), format3(r.rmse.mean), format3(r.rmse.sd)});
  write_text(out_dir / "agreement.csv", agreement);

  std::string alpha = csv_line({"model", "alpha_all", "alpha_ai_only", "coder_count"});
  for (const auto& r : bundle.table_alpha)
    alpha += csv_line({r.model, format3(r.alpha_all), format3(r.alpha_ai_only),
                       std::to_string(r.coder_count)});
  write_text(out_dir / "alpha.csv", alpha);

  std::string error = csv_line(
      {"model", "mae", "mae_sd", "rmse", "rmse_sd", "bias", "bias_sd"});
  for (const auto& r : bundle.table_error)
    error += csv_line({r.model, format3(r.mae.mean), format3(r.mae.sd),
                       format3(r.rmse.mean), format3(r.rmse.sd), format3(r.bias.mean),
                       format3(r.bias.sd)});
  write_text(out_dir / "error.csv", error);

  std::string calibration = csv_line(
      {"model", "intercept", "intercept_sd", "slope", "slope_sd", "r_squared",
       "r_squared_sd"});
  for (const auto& r : bundle.table_calibration)
    calibration += csv_line({r.model, format3(r.intercept.mean), format3(r.intercept.sd),
                             format3(r.slope.mean), format3(r.slope.sd),
                             format3(r.r_squared.mean), format3(r.r_squared.sd)});
  write_text(out_dir / "calibration.csv", calibration);

  std::size_t max_runs = 0;
  for (const auto& r : bundle.figure_data) max_runs = std::max(max_runs, r.runs.size());
  std::vector<std::string> fig_header = {"model", "speech"};
  for (std::size_t i = 1; i <= max_runs; ++i) fig_header.push_back("run_" + std::to_string(i));
  for (const char* col : {"mean", "ci95_low", "ci95_high", "ci99_low", "ci99_high"})
    fig_header.push_back(col);
  std::string figure = csv_line(fig_header);
  for (const auto& r : bundle.figure_data) {
    std::vector<std::string> fields = {r.model, r.speech};
    for (std::size_t i = 0; i < max_runs; ++i)
      fields.push_back(i < r.runs.size() ? format3(r.runs[i]) : "");
    fields.push_back(format3(r.mean));
    if (r.ci95) {
      fields.push_back(format3(r.ci95->low));
      fields.push_back(format3(r.ci95->high));
      fields.push_back(format3(r.ci99->low));
      fields.push_back(format3(r.ci99->high));
    } else {
      fields.insert(fields.end(), {"", "", "", ""});
    }
    figure += csv_line(fields);
  }
  write_text(out_dir / "figure_data.csv", figure);

  std::string leaderboard = csv_line({"rank", "model"});
  for (const auto& r : bundle.leaderboard)
    leaderboard += csv_line({std::to_string(r.rank), r.model_label});
  write_text(out_dir / "leaderboard.csv", leaderboard);

  if (!bundle.pooled.empty()) {
    const std::vector<std::string> names = {"pearson", "spearman", "icc", "ccc", "mae",
                                            "rmse", "bias", "intercept", "slope",
                                            "r_squared"};
    std::vector<std::string> header = {"model"};
    header.insert(header.end(), names.begin(), names.end());
    std::string pooled = csv_line(header);
    for (const auto& [label, metrics] : bundle.pooled) {
      std::vector<std::string> fields = {label};
      for (const auto& name : names) {
        const auto it = metrics.find(name);
        fields.push_back(it == metrics.end() ? "" : format3(it->second));
      }
      pooled += csv_line(fields);
    }
    write_text(out_dir / "agreement_pooled.csv", pooled);
  }

  json doc;
  doc["agreement"] = json::array();
  for (const auto& s : bundle.summaries) {
    json m;
    m["model"] = s.model_label;
    m["architecture"] = architecture_of(s.model_label);
    for (const auto& [name, summary] : s.metrics) m["metrics"][name] = summary_json(summary);
    m["alpha_all"] = s.alpha_all;
    m["alpha_ai_only"] = s.alpha_ai_only;
    m["coder_count"] = s.coder_count;
    m["best_run"] = s.best_run;
    m["best_run_bland_altman"] = {{"bias", s.best_run_ba.bias},
                                  {"loa_lower", s.best_run_ba.loa_lower},
                                  {"loa_upper", s.best_run_ba.loa_upper}};
    doc["agreement"].push_back(m);
  }
  doc["figure_data"] = json::array();
  for (const auto& r : bundle.figure_data) {
    json f;
    f["model"] = r.model;
    f["speech"] = r.speech;
    f["runs"] = r.runs;
    f["mean"] = r.mean;
    if (r.ci95) {
      f["ci95"] = {{"low", r.ci95->low}, {"high", r.ci95->high}};
      f["ci99"] = {{"low", r.ci99->low}, {"high", r.ci99->high}};
    }
    doc["figure_data"].push_back(f);
  }
  doc["leaderboard"] = json::array();
  for (const auto& r : bundle.leaderboard)
    doc["leaderboard"].push_back({{"rank", r.rank}, {"model", r.model_label}});
  if (!bundle.pooled.empty()) {
    doc["pooled"] = json::object();
    for (const auto& [label, metrics] : bundle.pooled) doc["pooled"][label] = metrics;
  }
  doc["coverage_warnings"] = bundle.coverage_warnings;
  write_text(out_dir / "bundle.json", doc.dump(2) + "\n");
}

}  // namespace shg
