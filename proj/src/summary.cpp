#include "shg/summary.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace shg {

namespace {

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

MetricSummary summarize_values(const std::vector<double>& per_run, int total_runs) {
  MetricSummary out;
  out.per_run = per_run;
  out.excluded_runs = total_runs - static_cast<int>(per_run.size());
  if (per_run.empty()) return out;
  out.mean = mean(per_run);
  out.sd = sample_sd(per_run);
  out.single_run = per_run.size() == 1;
  return out;
}

}  // namespace

double HumanScores::benchmark(const std::string& item) const {
  const auto it = by_item.find(item);
  if (it == by_item.end() || it->second.empty())
    throw MetricError("no human scores for item '" + item + "'");
  double s = 0.0;
  for (double v : it->second) s += v;
  return s / static_cast<double>(it->second.size());
}

std::size_t HumanScores::max_coders() const {
  std::size_t n = 0;
  for (const auto& [item, scores] : by_item) n = std::max(n, scores.size());
  return n;
}

PairSeries per_coder_series(const ModelRunTable& table, const HumanScores& humans,
                            int run_index) {
  PairSeries s;
  const auto run = static_cast<std::size_t>(run_index - 1);
  for (std::size_t i = 0; i < table.matrix.items.size(); ++i) {
    const auto& cell = table.matrix.cells[i][run];
    if (!cell) throw MetricError("missing run " + std::to_string(run_index) +
                                 " for item '" + table.matrix.items[i] + "'");
    const auto it = humans.by_item.find(table.matrix.items[i]);
    if (it == humans.by_item.end() || it->second.empty())
      throw MetricError("no human scores for item '" + table.matrix.items[i] + "'");
    for (double coder : it->second) {
      s.ai.push_back(*cell);
      s.human.push_back(coder);
    }
  }
  return s;
}

PairSeries benchmark_series(const ModelRunTable& table, const HumanScores& humans,
                            int run_index) {
  PairSeries s;
  const auto run = static_cast<std::size_t>(run_index - 1);
  for (std::size_t i = 0; i < table.matrix.items.size(); ++i) {
    const auto& cell = table.matrix.cells[i][run];
    if (!cell) throw MetricError("missing run " + std::to_string(run_index) +
                                 " for item '" + table.matrix.items[i] + "'");
    s.ai.push_back(*cell);
    s.human.push_back(humans.benchmark(table.matrix.items[i]));
  }
  return s;
}

ModelSummary summarize_model(const ModelRunTable& table, const HumanScores& humans) {
  ModelSummary out;
  out.model_label = table.model_label;
  out.runs = static_cast<int>(table.matrix.raters.size());

  using Metric = std::function<double(const PairSeries&)>;
  const std::vector<std::pair<std::string, Metric>> battery = {
      {"pearson", [](const PairSeries& s) { return pearson(s); }},
      {"spearman", [](const PairSeries& s) { return spearman(s); }},
      {"icc",
       [](const PairSeries& s) {
         ScoreMatrix two;
         two.raters = {"ai", "human"};
         for (std::size_t i = 0; i < s.size(); ++i) {
           two.items.push_back(std::to_string(i));
           two.cells.push_back({s.ai[i], s.human[i]});
         }
         return icc_2_1(two);
       }},
      {"ccc", [](const PairSeries& s) { return ccc(s); }},
      {"mae", [](const PairSeries& s) { return error_stats(s).mae; }},
      {"rmse", [](const PairSeries& s) { return error_stats(s).rmse; }},
      {"bias", [](const PairSeries& s) { return error_stats(s).bias; }},
      {"intercept", [](const PairSeries& s) { return calibration_fit(s).intercept; }},
      {"slope", [](const PairSeries& s) { return calibration_fit(s).slope; }},
      {"r_squared", [](const PairSeries& s) { return calibration_fit(s).r_squared; }},
  };

  std::vector<PairSeries> run_series;
  for (int run = 1; run <= out.runs; ++run)
    run_series.push_back(benchmark_series(table, humans, run));

  for (const auto& [name, metric] : battery) {
    std::vector<double> values;
    for (const auto& series : run_series) {
      try {
        values.push_back(metric(series));
      } catch (const MetricError&) {
        // undefined for this run; excluded and counted, never imputed
      }
    }
    out.metrics[name] = summarize_values(values, out.runs);
  }

  // Pooled reliability: the aggregated human coder plus one rater per run.
  ScoreMatrix all;
  all.items = table.matrix.items;
  all.raters.push_back("human");
  for (const auto& run_name : table.matrix.raters) all.raters.push_back(run_name);
  for (std::size_t i = 0; i < table.matrix.items.size(); ++i) {
    std::vector<std::optional<double>> row;
    row.push_back(humans.benchmark(table.matrix.items[i]));
    for (const auto& cell : table.matrix.cells[i]) row.push_back(cell);
    all.cells.push_back(std::move(row));
  }
  out.alpha_all = krippendorff_alpha_interval(all);
  out.coder_count = static_cast<int>(all.raters.size());

  ScoreMatrix ai_only = table.matrix;
  out.alpha_ai_only = krippendorff_alpha_interval(ai_only);

  // Best run by Pearson against the benchmark; BA on per-coder pairs.
  double best_r = -2.0;
  for (int run = 1; run <= out.runs; ++run) {
    try {
      const double r = pearson(run_series[static_cast<std::size_t>(run - 1)]);
      if (r > best_r) {
        best_r = r;
        out.best_run = run;
      }
    } catch (const MetricError&) {
    }
  }
  if (out.best_run > 0)
    out.best_run_ba = bland_altman(per_coder_series(table, humans, out.best_run));
  return out;
}

std::map<std::string, double> pooled_metrics(const ModelRunTable& table,
                                             const HumanScores& humans) {
  PairSeries pooled;
  for (int run = 1; run <= static_cast<int>(table.matrix.raters.size()); ++run) {
    const auto series = benchmark_series(table, humans, run);
    pooled.ai.insert(pooled.ai.end(), series.ai.begin(), series.ai.end());
    pooled.human.insert(pooled.human.end(), series.human.begin(), series.human.end());
  }

  std::map<std::string, double> out;
  auto put = [&](const std::string& name, auto&& compute) {
    try {
      out[name] = compute();
    } catch (const MetricError&) {
    }
  };
  put("pearson", [&] { return pearson(pooled); });
  put("spearman", [&] { return spearman(pooled); });
  put("icc", [&] {
    ScoreMatrix two;
    two.raters = {"ai", "human"};
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      two.items.push_back(std::to_string(i));
      two.cells.push_back({pooled.ai[i], pooled.human[i]});
    }
    return icc_2_1(two);
  });
  put("ccc", [&] { return ccc(pooled); });
  put("mae", [&] { return error_stats(pooled).mae; });
  put("rmse", [&] { return error_stats(pooled).rmse; });
  put("bias", [&] { return error_stats(pooled).bias; });
  put("intercept", [&] { return calibration_fit(pooled).intercept; });
  put("slope", [&] { return calibration_fit(pooled).slope; });
  put("r_squared", [&] { return calibration_fit(pooled).r_squared; });
  return out;
}

std::vector<ModelSummary> summarize_all(const std::map<std::string, ModelRunTable>& tables,
                                        const HumanScores& humans) {
  std::vector<ModelSummary> out;
  out.reserve(tables.size());
  for (const auto& [label, table] : tables) out.push_back(summarize_model(table, humans));
  return out;
}

std::vector<RankedModel> rank_models(const std::vector<ModelSummary>& summaries) {
  if (summaries.empty()) return {};

  auto metric_mean = [](const ModelSummary& s, const std::string& name) {
    const auto it = s.metrics.find(name);
    return it == s.metrics.end() || it->second.per_run.empty() ? 0.0 : it->second.mean;
  };
  // Higher-is-better values are negated so every tier sorts ascending.
  auto tiers = [&](const ModelSummary& s) {
    const double width = s.best_run_ba.loa_upper - s.best_run_ba.loa_lower;
    return std::vector<double>{
        round3(-metric_mean(s, "icc")),
        round3(-metric_mean(s, "ccc")),
        round3(metric_mean(s, "mae")),
        round3(metric_mean(s, "rmse")),
        round3(std::abs(metric_mean(s, "slope") - 1.0)),
        round3(std::abs(metric_mean(s, "intercept"))),
        round3(-metric_mean(s, "r_squared")),
        round3(-s.alpha_all),
        round3(width),
    };
  };

  std::vector<const ModelSummary*> order;
  for (const auto& s : summaries) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [&](const ModelSummary* a, const ModelSummary* b) {
              const auto ta = tiers(*a), tb = tiers(*b);
              if (ta != tb) return ta < tb;
              return a->model_label < b->model_label;
            });

  std::vector<RankedModel> out;
  out.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    out.push_back({static_cast<int>(i + 1), order[i]->model_label});
  return out;
}

}  // namespace shg
