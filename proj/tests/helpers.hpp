#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "shg/corpus.hpp"
#include "shg/metrics.hpp"
#include "shg/rng.hpp"
#include "shg/runner.hpp"

#ifndef SHG_FIXTURES
#error "SHG_FIXTURES must point at the fixtures directory"
#endif

namespace shg::test {

inline std::filesystem::path fixtures() { return SHG_FIXTURES; }

inline Corpus load_fixture_corpus() {
  return load_corpus(fixtures() / "corpus" / "manifest.json");
}

inline std::vector<RunRecord> load_fixture_records() {
  return load_records(fixtures() / "runs" / "benchmark_runs.jsonl");
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Random values on the score grid (tenths of 0..2), tie-heavy on purpose.
inline std::vector<double> random_grid_series(std::mt19937_64& gen, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(bounded_draw(gen, 21)) / 10.0;
  return v;
}

inline bool constant(const std::vector<double>& v) {
  for (double x : v)
    if (x != v.front()) return false;
  return true;
}

// Keeps drawing until the series has variation.
inline std::vector<double> random_varied_series(std::mt19937_64& gen, std::size_t n) {
  for (;;) {
    auto v = random_grid_series(gen, n);
    if (!constant(v)) return v;
  }
}

}  // namespace shg::test
