#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shg/corpus.hpp"
#include "shg/runner.hpp"
#include "shg/summary.hpp"

namespace shg {

class ReportError : public std::runtime_error {
 public:
  explicit ReportError(const std::string& what) : std::runtime_error(what) {}
};

struct AgreementRow {
  std::string model;
  std::string architecture;
  MetricSummary pearson, spearman, icc, ccc, mae, rmse;
};

struct AlphaRow {
  std::string model;
  double alpha_all = 0.0;
  double alpha_ai_only = 0.0;
  int coder_count = 0;
};

struct ErrorRow {
  std::string model;
  MetricSummary mae, rmse, bias;
};

struct CalibrationRow {
  std::string model;
  MetricSummary intercept, slope, r_squared;
};

struct FigureRow {
  std::string model;  // "human" for the coder pass-through rows
  std::string speech;
  std::vector<double> runs;  // run scores, or coder scores for human rows
  double mean = 0.0;
  std::optional<IntervalCI> ci95;  // absent on human rows
  std::optional<IntervalCI> ci99;
};

struct ReplicationBundle {
  std::vector<AgreementRow> table_agreement;
  std::vector<AlphaRow> table_alpha;
  std::vector<ErrorRow> table_error;
  std::vector<CalibrationRow> table_calibration;
  std::vector<FigureRow> figure_data;
  std::vector<RankedModel> leaderboard;
  std::vector<ModelSummary> summaries;  // full battery, kept for the JSON bundle
  std::map<std::string, std::map<std::string, double>> pooled;  // only when requested
  std::vector<std::string> coverage_warnings;
};

// Coder scores for every target, from the corpus manifest.
HumanScores human_scores_from(const Corpus& corpus);

// Builds every replication table from ok records plus the corpus benchmark.
// Deterministic in (records, corpus, seed).
ReplicationBundle replicate(const std::vector<RunRecord>& records, const Corpus& corpus,
                            std::uint64_t seed, int resamples = 1000,
                            bool include_pooled = false);

// Per (model, speech) run values with bootstrap CIs; human coder rows last.
std::vector<FigureRow> figure_data(const std::vector<RunRecord>& records,
                                   const Corpus& corpus, std::uint64_t seed,
                                   int resamples = 1000);

// Writes agreement.csv, alpha.csv, error.csv, calibration.csv,
// figure_data.csv, leaderboard.csv and bundle.json into out_dir.
void write_bundle(const ReplicationBundle& bundle, const std::filesystem::path& out_dir);

// Half-away-from-zero, fixed three decimals; the only number format the
// emitted tables use.
std::string format3(double v);

}  // namespace shg
