#include "shg/prompt.hpp"

#include <cstdio>
#include <sstream>

namespace shg {

namespace {

std::string one_decimal(double score) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", score);
  return buf;
}

std::string build_rubric_phase(const Rubric& rubric) {
  std::ostringstream out;
  out << "SCORING SCALE (0-2)\n";
  for (const auto& [level, description] : rubric.scale_anchors)
    out << level << " - " << description << "\n";
  out << "\nPOPULIST CATEGORIES\n";
  for (const auto& cat : rubric.populist_categories)
    out << "- " << cat.name << ": " << cat.description << "\n";
  out << "\nPLURALIST CATEGORIES\n";
  for (const auto& cat : rubric.pluralist_categories)
    out << "- " << cat.name << ": " << cat.description << "\n";
  return out.str();
}

std::string build_anchor_phase(const std::vector<AnchorSpeech>& anchors) {
  std::ostringstream out;
  out << "ANCHOR SPEECHES\n"
      << "Each anchor below shows a speech, the expert reasoning, and the "
         "expert score. Study how the reasoning leads to the score.\n";
  for (const auto& anchor : anchors) {
    out << "\n--- Anchor " << anchor.speech.id << " (" << anchor.speech.leader << ", "
        << anchor.speech.country << ") ---\n"
        << anchor.speech.text << "\n"
        << "Expert reasoning:\n"
        << anchor.reasoning_text << "\n"
        << "Expert score: " << one_decimal(anchor.anchor_score) << "\n";
  }
  return out.str();
}

std::string build_instruction_phase(const Rubric& rubric) {
  std::ostringstream out;
  out << rubric.implementation_instructions << "\n\n"
      << "Reason step by step through the categories above, weigh the evidence "
         "across the whole speech, then state your grade.\n"
      << "End your answer with exactly one line of the form:\n"
      << kFinalScoreMarker << " <x.x>\n"
      << "where <x.x> is a number between 0.0 and 2.0 with one decimal place.";
  return out.str();
}

}  // namespace

std::string to_string(PromptPhase p) {
  switch (p) {
    case PromptPhase::theory: return "theory";
    case PromptPhase::methodology: return "methodology";
    case PromptPhase::rubric: return "rubric";
    case PromptPhase::anchors: return "anchors";
    case PromptPhase::instructions: return "instructions";
  }
  return "unknown";
}

PromptDocument assemble_prompt(const Rubric& rubric,
                               const std::vector<AnchorSpeech>& anchors,
                               const Speech& target) {
  if (anchors.empty()) throw PromptError("empty anchor set");
  for (const auto& anchor : anchors)
    if (anchor.reasoning_text.empty())
      throw PromptError("anchor '" + anchor.speech.id + "' has no reasoning text");
  if (target.text.empty()) throw PromptError("target speech text is empty");

  PromptDocument doc;
  doc.phases.emplace_back(PromptPhase::theory, rubric.definition);
  doc.phases.emplace_back(PromptPhase::methodology, rubric.methodology_note);
  doc.phases.emplace_back(PromptPhase::rubric, build_rubric_phase(rubric));
  doc.phases.emplace_back(PromptPhase::anchors, build_anchor_phase(anchors));
  doc.phases.emplace_back(PromptPhase::instructions, build_instruction_phase(rubric));

  std::ostringstream target_block;
  target_block << "SPEECH TO GRADE (" << target.leader << ", " << target.country << ", "
               << to_string(target.speech_type) << ")\n"
               << target.text;
  doc.target_block = target_block.str();

  std::size_t chars = doc.target_block.size();
  for (const auto& [phase, body] : doc.phases) chars += body.size();
  doc.token_estimate = (chars + 3) / 4;
  return doc;
}

MessageSequence render_messages(const PromptDocument& doc) {
  if (doc.phases.size() != 5) throw PromptError("prompt document must have five phases");
  if (doc.target_block.empty()) throw PromptError("prompt document has empty target block");

  std::string system;
  for (const auto& [phase, body] : doc.phases) {
    if (phase == PromptPhase::anchors) continue;
    if (!system.empty()) system += "\n\n";
    system += body;
  }
  std::string user;
  for (const auto& [phase, body] : doc.phases)
    if (phase == PromptPhase::anchors) user = body;
  user += "\n\n";
  user += doc.target_block;

  MessageSequence seq;
  seq.messages.push_back({MessageRole::system, std::move(system)});
  seq.messages.push_back({MessageRole::user, std::move(user)});
  return seq;
}

}  // namespace shg
