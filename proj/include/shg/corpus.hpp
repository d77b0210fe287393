#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace shg {

class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::string id, std::string field, const std::string& what)
      : std::runtime_error(what), id_(std::move(id)), field_(std::move(field)) {}

  const std::string& id() const { return id_; }
  const std::string& field() const { return field_; }

 private:
  std::string id_;
  std::string field_;
};

enum class SpeechType { campaign, famous, international, ribbon };

std::string to_string(SpeechType t);
SpeechType speech_type_from_string(const std::string& s);

struct Speech {
  std::string id;
  std::string country;
  std::string leader;
  SpeechType speech_type = SpeechType::campaign;
  std::string language;  // BCP-47-style tag
  std::string text;
  std::vector<double> human_scores;  // per coder, empty for anchors
};

struct AnchorSpeech {
  Speech speech;
  double anchor_score = 0.0;
  std::string reasoning_text;  // expert chain-of-thought justification
};

struct RubricCategory {
  std::string name;
  std::string description;
};

struct Rubric {
  std::string definition;
  std::string methodology_note;
  std::map<int, std::string> scale_anchors;  // keys 0, 1, 2
  std::vector<RubricCategory> populist_categories;   // exactly 6
  std::vector<RubricCategory> pluralist_categories;  // exactly 6
  std::string implementation_instructions;
};

struct Corpus {
  std::vector<AnchorSpeech> anchors;  // normalized to non-decreasing score order
  std::vector<Speech> targets;
  Rubric rubric;

  const Speech* find_target(const std::string& id) const;
};

struct Violation {
  std::string id;    // offending speech/anchor id (may be empty for rubric)
  std::string rule;  // machine-readable rule name
  std::string detail;
};

// Reads the manifest plus every referenced text file and returns a validated
// corpus; throws CorpusError on the first problem, naming id and field.
Corpus load_corpus(const std::filesystem::path& manifest_path);

// Writes manifest + text files under dir; inverse of load_corpus.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// Non-throwing invariant sweep; empty result means load would accept it.
std::vector<Violation> validate_corpus(const Corpus& corpus);

// Arithmetic mean of the coder scores, unrounded.
double human_benchmark(const Speech& speech);

}  // namespace shg
