#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shg/metrics.hpp"
#include "shg/runner.hpp"

namespace shg {

// Coder-level human scores keyed by speech id; the benchmark for an item is
// the coder mean.
struct HumanScores {
  std::map<std::string, std::vector<double>> by_item;

  double benchmark(const std::string& item) const;
  std::size_t max_coders() const;
};

struct MetricSummary {
  std::vector<double> per_run;  // runs where the metric was defined
  double mean = 0.0;
  double sd = 0.0;  // sample SD across runs, 0 when a single run
  int excluded_runs = 0;
  bool single_run = false;
};

struct ModelSummary {
  std::string model_label;
  int runs = 0;
  std::map<std::string, MetricSummary> metrics;  // pearson, spearman, icc, ccc,
                                                 // mae, rmse, bias, intercept,
                                                 // slope, r_squared
  double alpha_all = 0.0;      // human mean + one rater per run
  double alpha_ai_only = 0.0;  // runs only
  int coder_count = 0;         // raters entering alpha_all

  // Run with the highest Pearson r against the human benchmark, and its
  // Bland-Altman computed on run-vs-each-coder pairs.
  int best_run = 0;  // 1-based
  BlandAltman best_run_ba;
};

// Pairs one run against each coder's score (items expand to one point per
// coder); this is the series behind the run-level Bland-Altman diagnostics.
PairSeries per_coder_series(const ModelRunTable& table, const HumanScores& humans,
                            int run_index);

// Run values against the per-item human mean.
PairSeries benchmark_series(const ModelRunTable& table, const HumanScores& humans,
                            int run_index);

// Per-run metric battery, aggregated as mean and sample SD across runs.
// Runs where a metric is undefined are excluded from that metric and counted.
ModelSummary summarize_model(const ModelRunTable& table, const HumanScores& humans);

// Sensitivity variant: all runs pooled into a single series per model before
// computing each pairwise metric once. Undefined metrics are left out.
std::map<std::string, double> pooled_metrics(const ModelRunTable& table,
                                             const HumanScores& humans);

std::vector<ModelSummary> summarize_all(const std::map<std::string, ModelRunTable>& tables,
                                        const HumanScores& humans);

struct RankedModel {
  int rank = 0;  // 1-based
  std::string model_label;
};

// Lexicographic over metric tiers at 3-decimal resolution: ICC, CCC, MAE,
// RMSE, then calibration closeness (|slope-1|, |intercept|, R2), pooled
// alpha, and Bland-Altman LoA width.
std::vector<RankedModel> rank_models(const std::vector<ModelSummary>& summaries);

}  // namespace shg
