#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "helpers.hpp"
#include "shg/corpus.hpp"

using namespace shg;
using namespace shg::test;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("shg-corpus-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void put(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << content;
}

}  // namespace

TEST_CASE("fixture corpus loads with the full anchor ladder") {
  const auto corpus = load_fixture_corpus();
  CHECK(corpus.anchors.size() == 10);
  CHECK(corpus.targets.size() == 12);
  for (std::size_t i = 1; i < corpus.anchors.size(); ++i)
    CHECK(corpus.anchors[i].anchor_score >= corpus.anchors[i - 1].anchor_score);
  CHECK(corpus.anchors.front().anchor_score == doctest::Approx(0.0));
  CHECK(corpus.anchors.back().anchor_score == doctest::Approx(2.0));
  CHECK(corpus.rubric.populist_categories.size() == 6);
  CHECK(corpus.rubric.pluralist_categories.size() == 6);
  CHECK(validate_corpus(corpus).empty());

  const auto* turkey_famous = corpus.find_target("tr-famous");
  REQUIRE(turkey_famous != nullptr);
  CHECK(turkey_famous->speech_type == SpeechType::famous);
  CHECK(turkey_famous->human_scores.size() == 3);
}

TEST_CASE("empty target list is a valid corpus") {
  const auto dir = temp_dir("empty-targets");
  put(dir / "texts" / "a.txt", "text body");
  put(dir / "reasoning" / "a.txt", "reasoning body");
  std::ifstream src(fixtures() / "corpus" / "manifest.json");
  nlohmann::json doc = nlohmann::json::parse(src);
  doc["anchors"] = nlohmann::json::array(
      {{{"id", "a"}, {"country", "X"}, {"leader", "L"}, {"speech_type", "famous"},
        {"language", "en"}, {"text_file", "texts/a.txt"}, {"anchor_score", 1.0},
        {"reasoning_file", "reasoning/a.txt"}}});
  doc["targets"] = nlohmann::json::array();
  put(dir / "manifest.json", doc.dump());
  const auto corpus = load_corpus(dir / "manifest.json");
  CHECK(corpus.targets.empty());
  CHECK(corpus.anchors.size() == 1);
}

TEST_CASE("out-of-range anchor score names the offender") {
  const auto dir = temp_dir("bad-anchor");
  put(dir / "texts" / "a.txt", "text");
  put(dir / "reasoning" / "a.txt", "reasoning");
  nlohmann::json doc;
  std::ifstream src(fixtures() / "corpus" / "manifest.json");
  doc = nlohmann::json::parse(src);
  doc["anchors"] = nlohmann::json::array(
      {{{"id", "anchor-over"}, {"country", "X"}, {"leader", "L"},
        {"speech_type", "famous"}, {"language", "en"}, {"text_file", "texts/a.txt"},
        {"anchor_score", 2.3}, {"reasoning_file", "reasoning/a.txt"}}});
  doc["targets"] = nlohmann::json::array();
  put(dir / "manifest.json", doc.dump());
  try {
    load_corpus(dir / "manifest.json");
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    CHECK(e.id() == "anchor-over");
    CHECK(e.field() == "anchor_score");
  }
}

TEST_CASE("missing text file is reported with id and field") {
  const auto dir = temp_dir("missing-file");
  nlohmann::json doc;
  std::ifstream src(fixtures() / "corpus" / "manifest.json");
  doc = nlohmann::json::parse(src);
  doc["anchors"] = nlohmann::json::array();
  doc["targets"] = nlohmann::json::array(
      {{{"id", "ghost"}, {"country", "X"}, {"leader", "L"}, {"speech_type", "ribbon"},
        {"language", "en"}, {"text_file", "texts/ghost.txt"}}});
  put(dir / "manifest.json", doc.dump());
  try {
    load_corpus(dir / "manifest.json");
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    CHECK(e.id() == "ghost");
  }
}

TEST_CASE("human benchmark means") {
  Speech s;
  s.id = "x";
  s.text = "t";
  s.human_scores = {1.8, 2.0};
  CHECK(human_benchmark(s) == doctest::Approx(1.90));
  s.human_scores = {0.0, 0.1};
  CHECK(human_benchmark(s) == doctest::Approx(0.05));
  s.human_scores = {0.5};
  CHECK(human_benchmark(s) == doctest::Approx(0.5));
  s.human_scores.clear();
  CHECK_THROWS_AS(human_benchmark(s), CorpusError);
}

TEST_CASE("human benchmark is permutation-invariant and bounded") {
  std::mt19937_64 gen(21);
  for (int i = 0; i < 200; ++i) {
    Speech s;
    s.id = "p";
    s.text = "t";
    s.human_scores = random_grid_series(gen, 1 + bounded_draw(gen, 5));
    const double base = human_benchmark(s);
    auto lo = *std::min_element(s.human_scores.begin(), s.human_scores.end());
    auto hi = *std::max_element(s.human_scores.begin(), s.human_scores.end());
    CHECK(base >= lo);
    CHECK(base <= hi);
    seeded_shuffle(s.human_scores, i);
    CHECK(human_benchmark(s) == doctest::Approx(base).epsilon(1e-15));
  }
}

TEST_CASE("validate_corpus flags duplicates and misordered anchors") {
  auto corpus = load_fixture_corpus();
  CHECK(validate_corpus(corpus).empty());

  auto duplicated = corpus;
  duplicated.targets.push_back(duplicated.targets.front());
  const auto violations = validate_corpus(duplicated);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].rule == "duplicate-id");
  CHECK(violations[0].id == corpus.targets.front().id);

  auto misordered = corpus;
  std::swap(misordered.anchors.front(), misordered.anchors.back());
  bool saw_order = false;
  for (const auto& v : validate_corpus(misordered)) saw_order |= v.rule == "anchor-order";
  CHECK(saw_order);
}

TEST_CASE("save then load round-trips every field") {
  const auto corpus = load_fixture_corpus();
  const auto dir = temp_dir("roundtrip");
  save_corpus(corpus, dir);
  const auto reloaded = load_corpus(dir / "manifest.json");

  REQUIRE(reloaded.anchors.size() == corpus.anchors.size());
  REQUIRE(reloaded.targets.size() == corpus.targets.size());
  for (std::size_t i = 0; i < corpus.anchors.size(); ++i) {
    CHECK(reloaded.anchors[i].speech.id == corpus.anchors[i].speech.id);
    CHECK(reloaded.anchors[i].speech.text == corpus.anchors[i].speech.text);
    CHECK(reloaded.anchors[i].reasoning_text == corpus.anchors[i].reasoning_text);
    CHECK(reloaded.anchors[i].anchor_score == corpus.anchors[i].anchor_score);
    CHECK(reloaded.anchors[i].speech.language == corpus.anchors[i].speech.language);
  }
  for (std::size_t i = 0; i < corpus.targets.size(); ++i) {
    CHECK(reloaded.targets[i].id == corpus.targets[i].id);
    CHECK(reloaded.targets[i].text == corpus.targets[i].text);
    CHECK(reloaded.targets[i].human_scores == corpus.targets[i].human_scores);
    CHECK(reloaded.targets[i].speech_type == corpus.targets[i].speech_type);
    CHECK(reloaded.targets[i].country == corpus.targets[i].country);
    CHECK(reloaded.targets[i].leader == corpus.targets[i].leader);
  }
  CHECK(reloaded.rubric.definition == corpus.rubric.definition);
  CHECK(reloaded.rubric.scale_anchors == corpus.rubric.scale_anchors);
  CHECK(validate_corpus(reloaded).empty());
}
