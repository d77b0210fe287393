#pragma once

// Independent reference implementations for the agreement metrics. These take
// deliberately different algebraic routes than the library (raw-sum ANOVA,
// the r*C_b concordance form, counting-based ranks) so the two sides can
// cross-check each other.

#include <cmath>
#include <vector>

namespace shg::test {

struct AnovaDecomposition {
  double ms_rows, ms_cols, ms_err;
};

// Raw-sum ANOVA identities: SS = sum(x^2) - T^2/N and friends.
inline AnovaDecomposition anova_oracle(const std::vector<std::vector<double>>& grid) {
  const std::size_t n = grid.size(), k = grid.front().size();
  double total = 0.0, total_sq = 0.0;
  std::vector<double> row_sum(n, 0.0), col_sum(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      total += grid[i][j];
      total_sq += grid[i][j] * grid[i][j];
      row_sum[i] += grid[i][j];
      col_sum[j] += grid[i][j];
    }
  const double correction = total * total / static_cast<double>(n * k);
  double ss_rows = -correction, ss_cols = -correction;
  for (double rs : row_sum) ss_rows += rs * rs / static_cast<double>(k);
  for (double cs : col_sum) ss_cols += cs * cs / static_cast<double>(n);
  const double ss_total = total_sq - correction;
  const double ss_err = ss_total - ss_rows - ss_cols;
  return {ss_rows / static_cast<double>(n - 1), ss_cols / static_cast<double>(k - 1),
          ss_err / static_cast<double>((n - 1) * (k - 1))};
}

inline double icc21_oracle(const std::vector<std::vector<double>>& grid) {
  const auto ms = anova_oracle(grid);
  const auto n = static_cast<double>(grid.size());
  const auto k = static_cast<double>(grid.front().size());
  return (ms.ms_rows - ms.ms_err) /
         (ms.ms_rows + (k - 1.0) * ms.ms_err + (k / n) * (ms.ms_cols - ms.ms_err));
}

inline double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) /
         std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Lin's coefficient as correlation times the bias-correction factor C_b.
inline double ccc_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  vx /= n;
  vy /= n;
  const double sdx = std::sqrt(vx), sdy = std::sqrt(vy);
  const double r = pearson_oracle(x, y);
  const double scale = sdx / sdy;
  const double shift = (mx - my) / std::sqrt(sdx * sdy);
  const double c_b = 2.0 / (scale + 1.0 / scale + shift * shift);
  return r * c_b;
}

// Average rank by counting: rank(v) = #smaller + (#equal + 1) / 2.
inline std::vector<double> ranks_oracle(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    int smaller = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++smaller;
      if (v[j] == v[i]) ++equal;
    }
    out[i] = smaller + (equal + 1) / 2.0;
  }
  return out;
}

inline double spearman_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson_oracle(ranks_oracle(x), ranks_oracle(y));
}

}  // namespace shg::test
