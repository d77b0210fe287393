#include "shg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace shg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<const char*, 4> kSpeechTypeNames = {"campaign", "famous",
                                                         "international", "ribbon"};

std::string read_text_file(const fs::path& path, const std::string& id,
                           const std::string& field) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CorpusError(id, field, "cannot read file '" + path.string() + "' for '" + id + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Speech parse_speech(const json& entry, const fs::path& base_dir, bool is_anchor) {
  const std::string id = entry.value("id", "");
  if (id.empty()) throw CorpusError(id, "id", "speech entry missing id");
  Speech sp;
  sp.id = id;
  try {
    sp.country = entry.at("country").get<std::string>();
    sp.leader = entry.at("leader").get<std::string>();
    const auto type_name = entry.at("speech_type").get<std::string>();
    try {
      sp.speech_type = speech_type_from_string(type_name);
    } catch (const CorpusError&) {
      throw CorpusError(id, "speech_type",
                        "unknown speech_type '" + type_name + "' for '" + id + "'");
    }
    sp.language = entry.at("language").get<std::string>();
    const auto text_file = entry.at("text_file").get<std::string>();
    sp.text = read_text_file(base_dir / text_file, id, "text_file");
  } catch (const json::exception& e) {
    throw CorpusError(id, "speech", "malformed entry for '" + id + "': " + e.what());
  }
  if (sp.text.empty())
    throw CorpusError(id, "text", "speech '" + id + "' has empty text");
  if (!is_anchor && entry.contains("human_scores")) {
    for (const auto& v : entry.at("human_scores")) {
      const double score = v.get<double>();
      if (score < 0.0 || score > 2.0)
        throw CorpusError(id, "human_scores",
                          "human score " + std::to_string(score) + " out of [0,2] for '" + id + "'");
      sp.human_scores.push_back(score);
    }
  }
  return sp;
}

Rubric parse_rubric(const json& r) {
  Rubric rubric;
  try {
    rubric.definition = r.at("definition").get<std::string>();
    rubric.methodology_note = r.at("methodology_note").get<std::string>();
    for (const auto& [key, value] : r.at("scale_anchors").items())
      rubric.scale_anchors[std::stoi(key)] = value.get<std::string>();
    for (const auto& cat : r.at("populist_categories"))
      rubric.populist_categories.push_back(
          {cat.at("name").get<std::string>(), cat.at("description").get<std::string>()});
    for (const auto& cat : r.at("pluralist_categories"))
      rubric.pluralist_categories.push_back(
          {cat.at("name").get<std::string>(), cat.at("description").get<std::string>()});
    rubric.implementation_instructions =
        r.at("implementation_instructions").get<std::string>();
  } catch (const json::exception& e) {
    throw CorpusError("", "rubric", std::string("malformed rubric: ") + e.what());
  }
  if (rubric.populist_categories.size() != 6)
    throw CorpusError("", "populist_categories", "rubric needs exactly 6 populist categories");
  if (rubric.pluralist_categories.size() != 6)
    throw CorpusError("", "pluralist_categories", "rubric needs exactly 6 pluralist categories");
  for (int level : {0, 1, 2})
    if (!rubric.scale_anchors.count(level))
      throw CorpusError("", "scale_anchors",
                        "rubric scale_anchors missing level " + std::to_string(level));
  return rubric;
}

json speech_to_json(const Speech& sp, const std::string& text_file) {
  json j;
  j["id"] = sp.id;
  j["country"] = sp.country;
  j["leader"] = sp.leader;
  j["speech_type"] = to_string(sp.speech_type);
  j["language"] = sp.language;
  j["text_file"] = text_file;
  if (!sp.human_scores.empty()) j["human_scores"] = sp.human_scores;
  return j;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("", "save", "cannot write '" + path.string() + "'");
  out << content;
}

}  // namespace

std::string to_string(SpeechType t) {
  return kSpeechTypeNames[static_cast<std::size_t>(t)];
}

SpeechType speech_type_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kSpeechTypeNames.size(); ++i)
    if (s == kSpeechTypeNames[i]) return static_cast<SpeechType>(i);
  throw CorpusError("", "speech_type", "unknown speech_type '" + s + "'");
}

const Speech* Corpus::find_target(const std::string& id) const {
  for (const auto& t : targets)
    if (t.id == id) return &t;
  return nullptr;
}

Corpus load_corpus(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in)
    throw CorpusError("", "manifest", "cannot open manifest '" + manifest_path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw CorpusError("", "manifest", std::string("manifest is not valid JSON: ") + e.what());
  }
  const fs::path base_dir = manifest_path.parent_path();

  Corpus corpus;
  corpus.rubric = parse_rubric(doc.at("rubric"));

  for (const auto& entry : doc.value("anchors", json::array())) {
    AnchorSpeech anchor;
    anchor.speech = parse_speech(entry, base_dir, /*is_anchor=*/true);
    const std::string& id = anchor.speech.id;
    try {
      anchor.anchor_score = entry.at("anchor_score").get<double>();
      const auto reasoning_file = entry.at("reasoning_file").get<std::string>();
      anchor.reasoning_text = read_text_file(base_dir / reasoning_file, id, "reasoning_file");
    } catch (const json::exception& e) {
      throw CorpusError(id, "anchor", "malformed anchor '" + id + "': " + e.what());
    }
    if (anchor.anchor_score < 0.0 || anchor.anchor_score > 2.0)
      throw CorpusError(id, "anchor_score",
                        "anchor score " + std::to_string(anchor.anchor_score) +
                            " out of [0,2] for '" + id + "'");
    if (anchor.reasoning_text.empty())
      throw CorpusError(id, "reasoning_text", "anchor '" + id + "' has empty reasoning");
    corpus.anchors.push_back(std::move(anchor));
  }
  // Normalize anchor order so prompt assembly is deterministic.
  std::stable_sort(corpus.anchors.begin(), corpus.anchors.end(),
                   [](const AnchorSpeech& a, const AnchorSpeech& b) {
                     return a.anchor_score < b.anchor_score;
                   });

  for (const auto& entry : doc.value("targets", json::array()))
    corpus.targets.push_back(parse_speech(entry, base_dir, /*is_anchor=*/false));

  // Duplicate ids across anchors and targets.
  std::vector<std::string> ids;
  for (const auto& a : corpus.anchors) ids.push_back(a.speech.id);
  for (const auto& t : corpus.targets) ids.push_back(t.id);
  std::sort(ids.begin(), ids.end());
  const auto dup = std::adjacent_find(ids.begin(), ids.end());
  if (dup != ids.end())
    throw CorpusError(*dup, "id", "duplicate speech id '" + *dup + "'");

  return corpus;
}

void save_corpus(const Corpus& corpus, const fs::path& dir) {
  json doc;
  json rubric;
  rubric["definition"] = corpus.rubric.definition;
  rubric["methodology_note"] = corpus.rubric.methodology_note;
  json anchors_map = json::object();
  for (const auto& [level, text] : corpus.rubric.scale_anchors)
    anchors_map[std::to_string(level)] = text;
  rubric["scale_anchors"] = anchors_map;
  auto cats = [](const std::vector<RubricCategory>& cs) {
    json arr = json::array();
    for (const auto& c : cs) arr.push_back({{"name", c.name}, {"description", c.description}});
    return arr;
  };
  rubric["populist_categories"] = cats(corpus.rubric.populist_categories);
  rubric["pluralist_categories"] = cats(corpus.rubric.pluralist_categories);
  rubric["implementation_instructions"] = corpus.rubric.implementation_instructions;
  doc["rubric"] = rubric;

  doc["anchors"] = json::array();
  for (const auto& a : corpus.anchors) {
    const std::string text_file = "texts/" + a.speech.id + ".txt";
    const std::string reasoning_file = "reasoning/" + a.speech.id + ".txt";
    write_file(dir / text_file, a.speech.text);
    write_file(dir / reasoning_file, a.reasoning_text);
    json j = speech_to_json(a.speech, text_file);
    j["anchor_score"] = a.anchor_score;
    j["reasoning_file"] = reasoning_file;
    doc["anchors"].push_back(j);
  }
  doc["targets"] = json::array();
  for (const auto& t : corpus.targets) {
    const std::string text_file = "texts/" + t.id + ".txt";
    write_file(dir / text_file, t.text);
    doc["targets"].push_back(speech_to_json(t, text_file));
  }
  write_file(dir / "manifest.json", doc.dump(2) + "\n");
}

std::vector<Violation> validate_corpus(const Corpus& corpus) {
  std::vector<Violation> out;

  std::vector<std::string> seen;
  auto check_id = [&](const Speech& sp) {
    if (std::find(seen.begin(), seen.end(), sp.id) != seen.end())
      out.push_back({sp.id, "duplicate-id", "id '" + sp.id + "' appears more than once"});
    else
      seen.push_back(sp.id);
    if (sp.text.empty())
      out.push_back({sp.id, "empty-text", "speech '" + sp.id + "' has empty text"});
    for (double score : sp.human_scores)
      if (score < 0.0 || score > 2.0)
        out.push_back({sp.id, "score-range",
                       "human score " + std::to_string(score) + " out of [0,2]"});
  };

  for (const auto& a : corpus.anchors) {
    check_id(a.speech);
    if (a.anchor_score < 0.0 || a.anchor_score > 2.0)
      out.push_back({a.speech.id, "score-range",
                     "anchor score " + std::to_string(a.anchor_score) + " out of [0,2]"});
    if (a.reasoning_text.empty())
      out.push_back({a.speech.id, "empty-reasoning",
                     "anchor '" + a.speech.id + "' has empty reasoning"});
  }
  for (std::size_t i = 1; i < corpus.anchors.size(); ++i)
    if (corpus.anchors[i].anchor_score < corpus.anchors[i - 1].anchor_score) {
      out.push_back({corpus.anchors[i].speech.id, "anchor-order",
                     "anchor scores not in non-decreasing order"});
      break;
    }

  for (const auto& t : corpus.targets) check_id(t);

  if (corpus.rubric.populist_categories.size() != 6)
    out.push_back({"", "rubric-categories", "expected 6 populist categories"});
  if (corpus.rubric.pluralist_categories.size() != 6)
    out.push_back({"", "rubric-categories", "expected 6 pluralist categories"});
  for (int level : {0, 1, 2})
    if (!corpus.rubric.scale_anchors.count(level))
      out.push_back({"", "rubric-scale", "scale_anchors missing level " + std::to_string(level)});

  return out;
}

double human_benchmark(const Speech& speech) {
  if (speech.human_scores.empty())
    throw CorpusError(speech.id, "human_scores",
                      "no human benchmark available for '" + speech.id + "'");
  double s = 0.0;
  for (double v : speech.human_scores) s += v;
  return s / static_cast<double>(speech.human_scores.size());
}

}  // namespace shg
