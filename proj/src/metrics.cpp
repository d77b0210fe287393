#include "shg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace shg {

namespace {

void require_pair(const PairSeries& s, std::size_t min_len) {
  if (s.ai.size() != s.human.size())
    throw MetricError("pair series length mismatch");
  if (s.ai.size() < min_len)
    throw MetricError("pair series shorter than " + std::to_string(min_len));
}

bool is_constant(const std::vector<double>& v) {
  for (double x : v)
    if (x != v.front()) return false;
  return true;
}

// Average ranks, ties share the mean of the positions they occupy.
std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double pearson_raw(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw MetricError("correlation undefined for constant series");
  return sxy / std::sqrt(sxx * syy);
}

// Linear-interpolation percentile over a sorted sample.
double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  if (lo == hi) return sorted[lo];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Deterministic bounded draw independent of the standard library's
// uniform_int_distribution (which is implementation-defined).
std::size_t bounded_draw(std::mt19937_64& gen, std::size_t n) {
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(gen()) * n) >> 64);
}

}  // namespace

bool ScoreMatrix::complete() const {
  for (const auto& row : cells)
    for (const auto& cell : row)
      if (!cell.has_value()) return false;
  return true;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw MetricError("mean of empty vector");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double pearson(const PairSeries& s) {
  require_pair(s, 2);
  return pearson_raw(s.ai, s.human);
}

double spearman(const PairSeries& s) {
  require_pair(s, 2);
  if (is_constant(s.ai) || is_constant(s.human))
    throw MetricError("spearman undefined: all values tied in one variable");
  return pearson_raw(average_ranks(s.ai), average_ranks(s.human));
}

double icc_2_1(const ScoreMatrix& m) {
  const std::size_t n = m.item_count(), k = m.rater_count();
  if (n < 2 || k < 2) throw MetricError("icc needs >= 2 items and >= 2 raters");
  if (!m.complete()) throw MetricError("icc requires a complete matrix");

  double grand = 0.0;
  for (const auto& row : m.cells)
    for (const auto& cell : row) grand += *cell;
  grand /= static_cast<double>(n * k);

  std::vector<double> row_mean(n, 0.0), col_mean(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      row_mean[i] += *m.cells[i][j];
      col_mean[j] += *m.cells[i][j];
    }
    row_mean[i] /= static_cast<double>(k);
  }
  for (std::size_t j = 0; j < k; ++j) col_mean[j] /= static_cast<double>(n);

  double ss_total = 0.0, ss_rows = 0.0, ss_cols = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    ss_rows += (row_mean[i] - grand) * (row_mean[i] - grand);
  ss_rows *= static_cast<double>(k);
  for (std::size_t j = 0; j < k; ++j)
    ss_cols += (col_mean[j] - grand) * (col_mean[j] - grand);
  ss_cols *= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j)
      ss_total += (*m.cells[i][j] - grand) * (*m.cells[i][j] - grand);
  if (ss_total == 0.0) throw MetricError("icc undefined: zero total variance");

  const double ms_rows = ss_rows / static_cast<double>(n - 1);
  const double ms_cols = ss_cols / static_cast<double>(k - 1);
  const double ms_err =
      (ss_total - ss_rows - ss_cols) / static_cast<double>((n - 1) * (k - 1));

  const double denom = ms_rows + static_cast<double>(k - 1) * ms_err +
                       static_cast<double>(k) / static_cast<double>(n) * (ms_cols - ms_err);
  if (denom == 0.0) throw MetricError("icc undefined: zero denominator");
  return (ms_rows - ms_err) / denom;
}

double ccc(const PairSeries& s) {
  require_pair(s, 2);
  const std::size_t n = s.size();
  const double mx = mean(s.ai), my = mean(s.human);
  double vx = 0.0, vy = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = s.ai[i] - mx, dy = s.human[i] - my;
    vx += dx * dx;
    vy += dy * dy;
    cov += dx * dy;
  }
  vx /= static_cast<double>(n);
  vy /= static_cast<double>(n);
  cov /= static_cast<double>(n);

  const double shift = (mx - my) * (mx - my);
  const double denom = vx + vy + shift;
  if (denom == 0.0) return 1.0;  // identical constant series
  if (vx == 0.0 && vy == 0.0)
    throw MetricError("ccc undefined: two distinct constant series");
  return 2.0 * cov / denom;
}

double krippendorff_alpha_interval(const ScoreMatrix& m) {
  // Pairable values: items rated by at least two raters.
  std::vector<std::vector<double>> units;
  units.reserve(m.item_count());
  for (const auto& row : m.cells) {
    std::vector<double> vals;
    for (const auto& cell : row)
      if (cell.has_value()) vals.push_back(*cell);
    if (vals.size() >= 2) units.push_back(std::move(vals));
  }
  std::size_t n_pairable = 0;
  for (const auto& u : units) n_pairable += u.size();
  if (n_pairable < 2) throw MetricError("alpha needs >= 2 pairable values");

  // Coincidence matrix over the distinct values actually observed.
  std::map<double, std::size_t> value_index;
  for (const auto& u : units)
    for (double v : u) value_index.emplace(v, 0);
  std::vector<double> values;
  values.reserve(value_index.size());
  for (auto& [v, idx] : value_index) {
    idx = values.size();
    values.push_back(v);
  }
  const std::size_t c = values.size();
  std::vector<std::vector<double>> coincidence(c, std::vector<double>(c, 0.0));
  for (const auto& u : units) {
    const double weight = 1.0 / static_cast<double>(u.size() - 1);
    for (std::size_t a = 0; a < u.size(); ++a)
      for (std::size_t b = 0; b < u.size(); ++b)
        if (a != b)
          coincidence[value_index[u[a]]][value_index[u[b]]] += weight;
  }

  std::vector<double> margin(c, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      margin[i] += coincidence[i][j];
      total += coincidence[i][j];
    }

  auto delta2 = [&](std::size_t i, std::size_t j) {
    const double d = values[i] - values[j];
    return d * d;
  };
  double d_obs = 0.0, d_exp = 0.0;
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      if (i == j) continue;
      d_obs += coincidence[i][j] * delta2(i, j);
      d_exp += margin[i] * margin[j] * delta2(i, j);
    }
  d_obs /= total;
  d_exp /= total * (total - 1.0);
  if (d_exp == 0.0)
    throw MetricError("alpha undefined: no variation in pairable values");
  return 1.0 - d_obs / d_exp;
}

ErrorStats error_stats(const PairSeries& s) {
  require_pair(s, 1);
  ErrorStats out;
  double sq = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s.ai[i] - s.human[i];
    out.mae += std::abs(d);
    sq += d * d;
    out.bias += d;
  }
  const auto n = static_cast<double>(s.size());
  out.mae /= n;
  out.rmse = std::sqrt(sq / n);
  out.bias /= n;
  return out;
}

CalibrationFit calibration_fit(const PairSeries& s) {
  require_pair(s, 2);
  const std::size_t n = s.size();
  const double mx = mean(s.ai), my = mean(s.human);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = s.ai[i] - mx;
    sxx += dx * dx;
    sxy += dx * (s.human[i] - my);
  }
  if (sxx == 0.0) throw MetricError("calibration fit singular: constant ai");
  CalibrationFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double r = pearson(s);
  fit.r_squared = r * r;
  return fit;
}

BlandAltman bland_altman(const PairSeries& s) {
  require_pair(s, 2);
  BlandAltman ba;
  std::vector<double> diffs(s.size());
  ba.points.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    diffs[i] = s.ai[i] - s.human[i];
    ba.points.emplace_back((s.ai[i] + s.human[i]) / 2.0, diffs[i]);
  }
  ba.bias = mean(diffs);
  const double spread = 1.96 * sample_sd(diffs);
  ba.loa_lower = ba.bias - spread;
  ba.loa_upper = ba.bias + spread;
  return ba;
}

std::vector<IntervalCI> bootstrap_ci(const std::vector<double>& values,
                                     int resamples,
                                     const std::vector<double>& levels,
                                     std::uint64_t seed) {
  if (values.empty()) throw MetricError("bootstrap of empty values");
  if (resamples < 1) throw MetricError("bootstrap needs >= 1 resample");

  std::mt19937_64 gen(seed);
  const std::size_t n = values.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += values[bounded_draw(gen, n)];
    m = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());

  std::vector<IntervalCI> out;
  out.reserve(levels.size());
  for (double level : levels) {
    if (level <= 0.0 || level >= 1.0)
      throw MetricError("bootstrap level must be in (0,1)");
    IntervalCI ci;
    ci.level = level;
    ci.low = percentile_sorted(means, (1.0 - level) / 2.0);
    ci.high = percentile_sorted(means, (1.0 + level) / 2.0);
    out.push_back(ci);
  }
  return out;
}

}  // namespace shg
