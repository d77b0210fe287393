#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace shg {

// Thrown when a metric is undefined for the given input (constant series,
// missing cells, degenerate variance). Callers that aggregate across runs
// catch this and flag the run instead of aborting.
class MetricError : public std::runtime_error {
 public:
  explicit MetricError(const std::string& what) : std::runtime_error(what) {}
};

// items x raters grid of scores; missing cells allowed only where the
// consuming operation says so.
struct ScoreMatrix {
  std::vector<std::string> items;
  std::vector<std::string> raters;
  std::vector<std::vector<std::optional<double>>> cells;  // [item][rater]

  std::size_t item_count() const { return items.size(); }
  std::size_t rater_count() const { return raters.size(); }
  bool complete() const;
};

// Two aligned series (one value per item).
struct PairSeries {
  std::vector<double> ai;
  std::vector<double> human;

  std::size_t size() const { return ai.size(); }
};

struct ErrorStats {
  double mae = 0.0;
  double rmse = 0.0;
  double bias = 0.0;  // mean(ai - human)
};

struct CalibrationFit {
  double intercept = 0.0;  // beta0 of human = b0 + b1*ai
  double slope = 0.0;      // beta1
  double r_squared = 0.0;
};

struct BlandAltman {
  double bias = 0.0;
  double loa_lower = 0.0;
  double loa_upper = 0.0;
  std::vector<std::pair<double, double>> points;  // (pair mean, ai - human)
};

struct IntervalCI {
  double level = 0.0;
  double low = 0.0;
  double high = 0.0;
};

double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);  // n-1 denominator; 0 for n < 2

// Product-moment correlation; throws MetricError if either series is constant.
double pearson(const PairSeries& s);

// Rank correlation with average ranks for ties; throws MetricError when either
// variable is entirely tied.
double spearman(const PairSeries& s);

// Two-way random effects, single measure, absolute agreement intraclass
// correlation on a complete items x raters matrix.
double icc_2_1(const ScoreMatrix& m);

// Lin's concordance correlation with population (1/n) moments. Two constant
// and equal series give 1; constant unequal series are an error.
double ccc(const PairSeries& s);

// Interval-metric Krippendorff alpha via the coincidence-matrix formulation.
// Missing cells allowed; every item must retain >= 2 ratings to pair.
double krippendorff_alpha_interval(const ScoreMatrix& m);

ErrorStats error_stats(const PairSeries& s);

// OLS of human on ai; throws MetricError for constant ai.
CalibrationFit calibration_fit(const PairSeries& s);

// Mean difference and bias +/- 1.96 * sample SD of the differences.
BlandAltman bland_altman(const PairSeries& s);

// Percentile bootstrap of the mean; deterministic for a given seed.
std::vector<IntervalCI> bootstrap_ci(const std::vector<double>& values,
                                     int resamples,
                                     const std::vector<double>& levels = {0.95, 0.99},
                                     std::uint64_t seed = 0);

}  // namespace shg
