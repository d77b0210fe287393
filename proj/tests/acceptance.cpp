// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Criteria 1-7 replicate the shipped benchmark statistics from the raw run
// records; 8-9 cross-check the metric engine against independent oracles and
// randomized properties; 10 drives the full pipeline against a local mock
// chat-completions server.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "mock_server.hpp"
#include "oracles.hpp"
#include "shg/corpus.hpp"
#include "shg/gateway.hpp"
#include "shg/metrics.hpp"
#include "shg/report.hpp"
#include "shg/runner.hpp"
#include "shg/summary.hpp"

using namespace shg;
using namespace shg::test;
using Clock = std::chrono::steady_clock;

namespace {

struct Checker {
  bool ok = true;
  std::vector<std::string> failures;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      failures.push_back(what);
    }
  }
  void expect_near(double got, double want, double tol, const std::string& what) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: got %.6f want %.6f (tol %.4g)", what.c_str(), got,
                  want, tol);
    expect(std::abs(got - want) <= tol, buf);
  }
};

struct Shared {
  Corpus corpus;
  std::vector<RunRecord> records;
  std::vector<ModelSummary> summaries;
  HumanScores humans;
  std::map<std::string, ModelRunTable> tables;
};

const ModelSummary& summary_for(const Shared& shared, const std::string& label) {
  for (const auto& s : shared.summaries)
    if (s.model_label == label) return s;
  throw std::runtime_error("no summary for " + label);
}

Checker criterion1(const Shared& shared) {
  Checker c;
  const auto started = Clock::now();
  const auto summaries = summarize_all(shared.tables, shared.humans);
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      Clock::now() - started);

  auto metric = [&](const std::string& label, const std::string& name) {
    for (const auto& s : summaries)
      if (s.model_label == label) return s.metrics.at(name).mean;
    throw std::runtime_error("missing " + label);
  };
  c.expect_near(metric("gpt5-reasoning-high", "pearson"), 0.974, 0.01, "gpt5R pearson");
  c.expect_near(metric("gpt5-reasoning-high", "icc"), 0.951, 0.01, "gpt5R icc");
  c.expect_near(metric("gpt5-reasoning-high", "ccc"), 0.947, 0.01, "gpt5R ccc");
  c.expect_near(metric("gpt5-reasoning-high", "mae"), 0.146, 0.01, "gpt5R mae");
  c.expect_near(metric("gpt5-reasoning-high", "rmse"), 0.233, 0.01, "gpt5R rmse");
  c.expect_near(metric("qwen3-235b-reasoning", "icc"), 0.958, 0.01, "qwen3R icc");
  c.expect_near(metric("qwen3-235b-reasoning", "ccc"), 0.954, 0.01, "qwen3R ccc");
  c.expect_near(metric("qwen3-235b-reasoning", "mae"), 0.133, 0.01, "qwen3R mae");
  c.expect_near(metric("llama4-scout-standard", "pearson"), 0.608, 0.01, "scout pearson");
  c.expect_near(metric("llama4-scout-standard", "icc"), 0.482, 0.01, "scout icc");
  c.expect(elapsed.count() < 5000,
           "runtime " + std::to_string(elapsed.count()) + "ms exceeds 5s");
  return c;
}

Checker criterion2(const Shared& shared) {
  Checker c;
  const auto& gpt5r = summary_for(shared, "gpt5-reasoning-high");
  c.expect_near(gpt5r.alpha_all, 0.969, 0.01, "gpt5R alpha all");
  c.expect_near(gpt5r.alpha_ai_only, 0.981, 0.01, "gpt5R alpha ai-only");
  c.expect_near(summary_for(shared, "gpt-oss-20b-reasoning").alpha_all, 0.714, 0.01,
                "oss20 alpha all");
  const auto& scout = summary_for(shared, "llama4-scout-standard");
  c.expect_near(scout.alpha_all, 0.646, 0.01, "scout alpha all");
  c.expect_near(scout.alpha_ai_only, 0.872, 0.01, "scout alpha ai-only");

  // human-only matrices: 4 items x coders per country
  for (const std::string country : {"uk", "me"}) {
    ScoreMatrix m;
    m.raters = {"coder-1", "coder-2"};
    for (const auto& target : shared.corpus.targets) {
      if (target.id.rfind(country, 0) != 0) continue;
      m.items.push_back(target.id);
      m.cells.push_back({target.human_scores[0], target.human_scores[1]});
    }
    const double alpha = krippendorff_alpha_interval(m);
    c.expect(std::abs(alpha) <= 1e-12,
             country + " human-only alpha " + std::to_string(alpha) + " != 0");
  }
  return c;
}

Checker criterion3(const Shared& shared) {
  Checker c;
  const auto& scout = summary_for(shared, "llama4-scout-standard");
  c.expect_near(scout.metrics.at("mae").mean, 0.413, 0.005, "scout mae");
  c.expect_near(scout.metrics.at("rmse").mean, 0.684, 0.005, "scout rmse");
  c.expect_near(scout.metrics.at("bias").mean, -0.238, 0.005, "scout bias");
  c.expect_near(summary_for(shared, "gpt5-reasoning-high").metrics.at("bias").mean, -0.098,
                0.005, "gpt5R bias");
  return c;
}

Checker criterion4(const Shared& shared) {
  Checker c;
  const auto& qwen = summary_for(shared, "qwen3-235b-reasoning");
  c.expect_near(qwen.metrics.at("slope").mean, 1.0411, 0.01, "qwen3R slope");
  c.expect_near(qwen.metrics.at("intercept").mean, 0.0253, 0.01, "qwen3R intercept");
  c.expect_near(qwen.metrics.at("r_squared").mean, 0.9240, 0.01, "qwen3R r2");
  c.expect_near(summary_for(shared, "gpt5-reasoning-high").metrics.at("slope").mean, 1.1681,
                0.01, "gpt5R slope");
  return c;
}

Checker criterion5(const Shared& shared) {
  Checker c;
  const auto& scout = summary_for(shared, "llama4-scout-standard");
  c.expect_near(scout.best_run_ba.loa_lower, -1.8, 0.1, "scout best-run LoA lower");
  c.expect_near(scout.best_run_ba.loa_upper, 1.0, 0.1, "scout best-run LoA upper");

  std::mt19937_64 gen(55);
  for (int i = 0; i < 1000; ++i) {
    PairSeries s{random_varied_series(gen, 2 + bounded_draw(gen, 16)), {}};
    s.human = random_grid_series(gen, s.ai.size());
    const double ba_bias = bland_altman(s).bias;
    const double err_bias = error_stats(s).bias;
    if (std::abs(ba_bias - err_bias) > 1e-12) {
      c.expect(false, "bias mismatch at case " + std::to_string(i));
      break;
    }
  }
  return c;
}

Checker criterion6(const Shared&) {
  Checker c;
  const std::vector<double> runs = {1.7, 1.6, 1.8, 1.7, 1.7};
  const auto first = bootstrap_ci(runs, 1000, {0.95, 0.99}, 2024);
  const auto second = bootstrap_ci(runs, 1000, {0.95, 0.99}, 2024);
  c.expect_near(first[1].low, 1.64, 0.05, "99% CI low");
  c.expect_near(first[1].high, 1.78, 0.05, "99% CI high");
  c.expect(first[0].low == second[0].low && first[0].high == second[0].high &&
               first[1].low == second[1].low && first[1].high == second[1].high,
           "same seed must reproduce endpoints bit-exactly");
  return c;
}

Checker criterion7(const Shared& shared) {
  Checker c;
  const auto board = rank_models(shared.summaries);
  auto at = [&](int rank) -> std::string {
    for (const auto& r : board)
      if (r.rank == rank) return r.model_label;
    return "";
  };
  c.expect(at(1) == "qwen3-235b-reasoning", "rank 1 is " + at(1));
  c.expect(at(2) == "gpt5-reasoning-high", "rank 2 is " + at(2));
  c.expect(at(9) == "gpt-oss-20b-reasoning", "rank 9 is " + at(9));
  c.expect(at(10) == "llama4-scout-standard", "rank 10 is " + at(10));
  return c;
}

Checker criterion8(const Shared&) {
  Checker c;
  std::mt19937_64 gen(88);

  for (int i = 0; i < 50; ++i) {
    std::vector<std::vector<double>> grid(4, std::vector<double>(3));
    ScoreMatrix m;
    m.raters = {"r1", "r2", "r3"};
    bool varied = false;
    for (std::size_t row = 0; row < 4; ++row) {
      m.items.push_back("i" + std::to_string(row));
      std::vector<std::optional<double>> cells;
      for (std::size_t col = 0; col < 3; ++col) {
        grid[row][col] = static_cast<double>(bounded_draw(gen, 21)) / 10.0;
        cells.push_back(grid[row][col]);
        varied |= grid[row][col] != grid[0][0];
      }
      m.cells.push_back(std::move(cells));
    }
    if (!varied) {
      --i;
      continue;
    }
    const double lib = icc_2_1(m);
    const double oracle = icc21_oracle(grid);
    if (std::abs(lib - oracle) > 1e-9) {
      c.expect(false, "icc oracle mismatch at case " + std::to_string(i));
      break;
    }
  }

  for (int i = 0; i < 1000; ++i) {
    auto x = random_varied_series(gen, 4 + bounded_draw(gen, 12));
    auto y = random_varied_series(gen, x.size());
    if (std::abs(ccc({x, y}) - ccc_oracle(x, y)) > 1e-12) {
      c.expect(false, "ccc oracle mismatch at case " + std::to_string(i));
      break;
    }
    if (std::abs(spearman({x, y}) - spearman_oracle(x, y)) > 1e-12) {
      c.expect(false, "spearman oracle mismatch at case " + std::to_string(i));
      break;
    }
  }
  return c;
}

Checker criterion9(const Shared&) {
  Checker c;
  std::mt19937_64 gen(99);

  auto fail_once = [&](const char* what, int i) {
    c.expect(false, std::string(what) + " failed at case " + std::to_string(i));
  };

  // error inequalities
  for (int i = 0; i < 1000 && c.ok; ++i) {
    PairSeries s{random_grid_series(gen, 1 + bounded_draw(gen, 20)), {}};
    s.human = random_grid_series(gen, s.ai.size());
    const auto e = error_stats(s);
    if (!(e.mae <= e.rmse + 1e-12)) fail_once("mae<=rmse", i);
    if (!(std::abs(e.bias) <= e.mae + 1e-12)) fail_once("|bias|<=mae", i);
  }
  // concordance never beats correlation magnitude
  for (int i = 0; i < 1000 && c.ok; ++i) {
    auto x = random_varied_series(gen, 3 + bounded_draw(gen, 12));
    auto y = random_varied_series(gen, x.size());
    if (!(ccc({x, y}) <= std::abs(pearson({x, y})) + 1e-12)) fail_once("ccc<=|r|", i);
  }
  // two algebraic routes to the calibration numbers
  for (int i = 0; i < 1000 && c.ok; ++i) {
    auto x = random_varied_series(gen, 3 + bounded_draw(gen, 12));
    auto y = random_grid_series(gen, x.size());
    const auto fit = calibration_fit({x, y});
    const double mx = mean(x), my = mean(y);
    double sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      sxx += (x[j] - mx) * (x[j] - mx);
      sxy += (x[j] - mx) * (y[j] - my);
    }
    if (std::abs(fit.slope - sxy / sxx) > 1e-12) fail_once("slope=cov/var", i);
    bool y_varied = false;
    for (double v : y) y_varied |= v != y.front();
    if (y_varied) {
      const double r = pearson({x, y});
      if (std::abs(fit.r_squared - r * r) > 1e-12) fail_once("r2=r^2", i);
    }
  }
  // permutation invariance of the whole battery
  for (int i = 0; i < 1000 && c.ok; ++i) {
    auto x = random_varied_series(gen, 5 + bounded_draw(gen, 10));
    auto y = random_varied_series(gen, x.size());
    std::vector<std::size_t> perm(x.size());
    for (std::size_t j = 0; j < perm.size(); ++j) perm[j] = j;
    seeded_shuffle(perm, 1000 + static_cast<std::uint64_t>(i));
    std::vector<double> px(x.size()), py(x.size());
    for (std::size_t j = 0; j < perm.size(); ++j) {
      px[j] = x[perm[j]];
      py[j] = y[perm[j]];
    }
    if (std::abs(pearson({x, y}) - pearson({px, py})) > 1e-12) fail_once("perm pearson", i);
    if (std::abs(spearman({x, y}) - spearman({px, py})) > 1e-12) fail_once("perm spearman", i);
    if (std::abs(ccc({x, y}) - ccc({px, py})) > 1e-12) fail_once("perm ccc", i);
    const auto e1 = error_stats({x, y}), e2 = error_stats({px, py});
    if (std::abs(e1.mae - e2.mae) > 1e-12 || std::abs(e1.rmse - e2.rmse) > 1e-12 ||
        std::abs(e1.bias - e2.bias) > 1e-12)
      fail_once("perm errors", i);
  }
  // invariances: affine for pearson, monotone for spearman
  for (int i = 0; i < 1000 && c.ok; ++i) {
    auto x = random_varied_series(gen, 4 + bounded_draw(gen, 12));
    auto y = random_varied_series(gen, x.size());
    const double scale = 0.5 + static_cast<double>(bounded_draw(gen, 40)) / 10.0;
    const double shift = static_cast<double>(bounded_draw(gen, 21)) / 10.0 - 1.0;
    auto ax = x;
    for (auto& v : ax) v = scale * v + shift;
    if (std::abs(pearson({ax, y}) - pearson({x, y})) > 1e-9) fail_once("affine pearson", i);
    auto mx = x;
    for (auto& v : mx) v = v * v * v + 2.0 * v;  // strictly increasing on [0,2]
    if (std::abs(spearman({mx, y}) - spearman({x, y})) > 1e-12)
      fail_once("monotone spearman", i);
  }
  // alpha is exactly 1 on perfect agreement with >= 2 distinct values
  for (int i = 0; i < 1000 && c.ok; ++i) {
    const auto values = random_varied_series(gen, 3 + bounded_draw(gen, 10));
    ScoreMatrix m;
    const std::size_t raters = 2 + bounded_draw(gen, 4);
    for (std::size_t r = 0; r < raters; ++r) m.raters.push_back("r" + std::to_string(r));
    for (std::size_t j = 0; j < values.size(); ++j) {
      m.items.push_back("i" + std::to_string(j));
      std::vector<std::optional<double>> row;
      for (std::size_t r = 0; r < raters; ++r) row.push_back(values[j]);
      m.cells.push_back(std::move(row));
    }
    if (krippendorff_alpha_interval(m) != 1.0) fail_once("alpha perfect agreement", i);
  }
  return c;
}

Checker criterion10(const Shared& shared) {
  Checker c;
  const auto started = Clock::now();

  MockServer server;
  server.respond_with_text(
      "Weighing the anchor ladder against the rubric categories.\n\nFINAL SCORE: 1.0");

  Campaign campaign;
  campaign.corpus = &shared.corpus;
  campaign.runs_per_cell = 5;
  campaign.seed = 11;
  for (const std::string label : {"mock-standard", "mock-reasoning"}) {
    ModelConfig cfg;
    cfg.label = label;
    cfg.model_slug = "mock/" + label;
    cfg.endpoint_url = server.base_url();
    cfg.mode = label == "mock-reasoning" ? ModelMode::reasoning : ModelMode::standard;
    if (cfg.mode == ModelMode::reasoning) cfg.reasoning_effort = ReasoningEffort::high;
    cfg.max_in_flight = 4;
    campaign.models.push_back(cfg);
  }

  HttpGateway gateway;
  for (const auto& cfg : campaign.models)
    c.expect(gateway.probe(cfg).healthy(), cfg.label + " probe unhealthy");

  const auto sink_dir = std::filesystem::temp_directory_path() / "shg-acceptance";
  std::filesystem::remove_all(sink_dir);
  const auto sink_path = sink_dir / "records.jsonl";

  {
    JsonlSink sink(sink_path);
    ExecuteOptions options;
    options.parallelism = 8;
    const auto produced = execute(campaign, gateway, sink, {}, options);
    c.expect(produced.size() == 120,
             "expected 120 records, got " + std::to_string(produced.size()));
  }

  const auto persisted = load_records(sink_path);
  c.expect(persisted.size() == 120, "sink should hold 120 records");
  std::set<TaskKey> keys;
  for (const auto& r : persisted) {
    keys.insert(r.key());
    if (r.status != RunStatus::ok) c.expect(false, "non-ok record in mock campaign");
    if (!r.score || std::abs(*r.score - 1.0) > 1e-12)
      c.expect(false, "unexpected score in mock campaign");
    if (r.timestamp.size() != 20 || r.timestamp.back() != 'Z')
      c.expect(false, "timestamp not RFC3339 UTC: " + r.timestamp);
  }
  c.expect(keys.size() == 120, "duplicate (model, speech, run) keys");

  {  // resume adds zero duplicates and makes zero requests
    const int before = server.request_count.load();
    JsonlSink sink(sink_path);
    const auto again = execute(campaign, gateway, sink, persisted);
    c.expect(again.empty(), "resume produced new records");
    c.expect(server.request_count.load() == before, "resume hit the endpoint");
    c.expect(load_records(sink_path).size() == 120, "resume appended to the sink");
  }

  // extraction across the shipped 20-response fixture, fallback formats included
  std::ifstream in(fixtures() / "responses" / "extraction_cases.json");
  const nlohmann::json cases = nlohmann::json::parse(in);
  c.expect(cases.size() == 20, "fixture must hold 20 responses");
  int extracted = 0;
  for (const auto& entry : cases) {
    const auto result = extract_score(entry["text"].get<std::string>());
    if (result.ok() &&
        std::abs(result.score->value - entry["expected"].get<double>()) < 1e-9)
      ++extracted;
  }
  c.expect(extracted == static_cast<int>(cases.size()),
           "extraction succeeded on " + std::to_string(extracted) + "/20");

  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
  c.expect(elapsed.count() < 30000,
           "runtime " + std::to_string(elapsed.count()) + "ms exceeds 30s");
  return c;
}

}  // namespace

int main() {
  Shared shared;
  shared.corpus = load_fixture_corpus();
  shared.records = load_fixture_records();
  shared.tables = score_table(shared.records);
  shared.humans = human_scores_from(shared.corpus);
  shared.summaries = summarize_all(shared.tables, shared.humans);

  struct Entry {
    int number;
    const char* name;
    Checker (*run)(const Shared&);
  };
  const std::vector<Entry> criteria = {
      {1, "Pairwise agreement battery replication", criterion1},
      {2, "Pooled Krippendorff alpha replication", criterion2},
      {3, "Error metric replication (MAE/RMSE/bias)", criterion3},
      {4, "Calibration replication (intercept/slope/R2)", criterion4},
      {5, "Bland-Altman limits and bias identity", criterion5},
      {6, "Bootstrap confidence intervals", criterion6},
      {7, "Leaderboard ordering", criterion7},
      {8, "Oracle equivalence (ICC/CCC/Spearman)", criterion8},
      {9, "Property suite (1000 randomized cases each)", criterion9},
      {10, "Pipeline integration against mock endpoint", criterion10},
  };

  bool all_ok = true;
  for (const auto& entry : criteria) {
    Checker result;
    try {
      result = entry.run(shared);
    } catch (const std::exception& e) {
      result.ok = false;
      result.failures.push_back(std::string("exception: ") + e.what());
    }
    std::printf("CRITERION %2d (%s): %s\n", entry.number, entry.name,
                result.ok ? "PASS" : "FAIL");
    for (const auto& f : result.failures) std::printf("    - %s\n", f.c_str());
    all_ok = all_ok && result.ok;
  }
  return all_ok ? 0 : 1;
}
