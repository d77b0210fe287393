#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "shg/corpus.hpp"

namespace shg {

class PromptError : public std::runtime_error {
 public:
  explicit PromptError(const std::string& what) : std::runtime_error(what) {}
};

enum class PromptPhase { theory, methodology, rubric, anchors, instructions };

std::string to_string(PromptPhase p);

// The terminal line the grader must end with; extract_score keys off it.
inline constexpr const char* kFinalScoreMarker = "FINAL SCORE:";

struct PromptDocument {
  std::vector<std::pair<PromptPhase, std::string>> phases;  // fixed order, 5 entries
  std::string target_block;
  std::size_t token_estimate = 0;  // ceil(chars / 4), budget warnings only
};

enum class MessageRole { system, user };

struct Message {
  MessageRole role;
  std::string content;
};

struct MessageSequence {
  std::vector<Message> messages;  // first is always system
};

// Builds the five-phase grading prompt. Byte-deterministic in its inputs;
// anchors must already be in non-decreasing score order (load_corpus
// normalizes this).
PromptDocument assemble_prompt(const Rubric& rubric,
                               const std::vector<AnchorSpeech>& anchors,
                               const Speech& target);

// Phases theory/methodology/rubric/instructions become the system message;
// the anchor phase plus the target block become the user message.
MessageSequence render_messages(const PromptDocument& doc);

}  // namespace shg
