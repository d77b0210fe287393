#include "shg/runner.hpp"

#include <cmath>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <thread>

#include <json.hpp>

#include "shg/prompt.hpp"
#include "shg/rng.hpp"

namespace shg {

using nlohmann::json;

namespace {

std::string utc_now_rfc3339() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Rounds a decimal literal half-away-from-zero to one decimal, on the digit
// string itself so 1.15 -> 1.2 regardless of binary representation.
std::optional<double> round_token_to_tenths(const std::string& token) {
  const auto dot = token.find('.');
  const std::string int_part = dot == std::string::npos ? token : token.substr(0, dot);
  const std::string frac = dot == std::string::npos ? "" : token.substr(dot + 1);
  if (int_part.empty() && frac.empty()) return std::nullopt;

  long long tenths = (int_part.empty() ? 0 : std::stoll(int_part)) * 10 +
                     (frac.empty() ? 0 : frac[0] - '0');
  if (frac.size() >= 2 && frac[1] >= '5') ++tenths;  // half away from zero
  return static_cast<double>(tenths) / 10.0;
}

double raw_token_value(const std::string& token) { return std::stod(token); }

// Standalone decimal tokens: digit runs with optional single dot, not glued
// to letters, other digits, or a leading sign/dot.
std::vector<std::pair<std::size_t, std::string>> decimal_tokens(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < n && is_digit(text[i])) ++i;
    if (i < n && text[i] == '.' && i + 1 < n && is_digit(text[i + 1])) {
      ++i;
      while (i < n && is_digit(text[i])) ++i;
    }
    const char before = start > 0 ? text[start - 1] : ' ';
    const char after = i < n ? text[i] : ' ';
    const bool glued_before = std::isalpha(static_cast<unsigned char>(before)) ||
                              before == '.' || before == '-' || before == '_';
    const bool glued_after = std::isalpha(static_cast<unsigned char>(after)) ||
                             after == '.' || after == '_';
    if (!glued_before && !glued_after)
      out.emplace_back(start, text.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string format_score(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

// Strips the terminal FINAL SCORE line so the rationale is just the reasoning.
std::string rationale_from(const std::string& text) {
  auto lines = split_lines(text);
  while (!lines.empty()) {
    const std::string& last = lines.back();
    const bool marker = last.find("FINAL SCORE:") != std::string::npos;
    const bool blank = last.find_first_not_of(" \t\r") == std::string::npos;
    if (marker || blank) lines.pop_back();
    else break;
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

}  // namespace

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::extraction_failed: return "extraction_failed";
    case RunStatus::request_failed: return "request_failed";
  }
  return "unknown";
}

RunStatus run_status_from_string(const std::string& s) {
  if (s == "ok") return RunStatus::ok;
  if (s == "extraction_failed") return RunStatus::extraction_failed;
  if (s == "request_failed") return RunStatus::request_failed;
  throw RunnerError("unknown run status '" + s + "'");
}

ScoreExtraction extract_score(const std::string& response_text) {
  ScoreExtraction result;

  // Terminal contract first: last line carrying the marker and a number.
  std::optional<std::string> marker_token;
  for (const auto& line : split_lines(response_text)) {
    const auto pos = line.find("FINAL SCORE:");
    if (pos == std::string::npos) continue;
    const auto tokens = decimal_tokens(line.substr(pos));
    if (!tokens.empty()) marker_token = tokens.front().second;
  }
  if (marker_token) {
    const double raw = raw_token_value(*marker_token);
    if (raw < 0.0 || raw > 2.0) {
      result.error = ExtractError::out_of_range;
      result.detail = "marker score " + *marker_token + " outside [0,2]";
      return result;
    }
    const auto rounded = round_token_to_tenths(*marker_token);
    result.score = GradedScore{*rounded, ScoreSource::terminal_marker};
    return result;
  }

  // Fallback: last standalone decimal that already lies within the scale.
  std::optional<std::string> best;
  for (const auto& [pos, token] : decimal_tokens(response_text)) {
    const double raw = raw_token_value(token);
    if (raw >= 0.0 && raw <= 2.0) best = token;
  }
  if (!best) {
    result.error = ExtractError::no_score;
    result.detail = "no parsable score in response";
    return result;
  }
  const auto rounded = round_token_to_tenths(*best);
  result.score = GradedScore{*rounded, ScoreSource::fallback_scan};
  return result;
}

JsonlSink::JsonlSink(std::filesystem::path path,
                     std::optional<std::filesystem::path> audit_path)
    : path_(std::move(path)), audit_path_(std::move(audit_path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void JsonlSink::append(const RunRecord& record) {
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw RunnerError("cannot open sink '" + path_.string() + "'");
  out << record_to_json(record) << '\n';
  out.flush();
  if (!out) throw RunnerError("write to sink '" + path_.string() + "' failed");
}

void JsonlSink::append_audit(const TaskKey& key, const std::string& request_json,
                             const std::string& response_json) {
  if (!audit_path_) return;
  std::lock_guard lock(mutex_);
  std::ofstream out(*audit_path_, std::ios::app | std::ios::binary);
  if (!out) return;  // audit trail is best effort
  json j;
  j["model_label"] = key.model_label;
  j["speech_id"] = key.speech_id;
  j["run_index"] = key.run_index;
  j["request"] = request_json;
  j["response"] = response_json;
  out << j.dump() << '\n';
}

std::string record_to_json(const RunRecord& record) {
  json j;
  j["model_label"] = record.model_label;
  j["speech_id"] = record.speech_id;
  j["run_index"] = record.run_index;
  j["timestamp"] = record.timestamp;
  j["raw_response"] = record.raw_response;
  if (record.score) j["score"] = json::parse(format_score(*record.score));
  j["rationale"] = record.rationale;
  j["usage"] = {{"prompt_tokens", record.usage.prompt_tokens},
                {"completion_tokens", record.usage.completion_tokens}};
  j["status"] = to_string(record.status);
  return j.dump();
}

RunRecord record_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw RunnerError(std::string("bad record line: ") + e.what());
  }
  RunRecord r;
  try {
    r.model_label = j.at("model_label").get<std::string>();
    r.speech_id = j.at("speech_id").get<std::string>();
    r.run_index = j.at("run_index").get<int>();
    r.timestamp = j.value("timestamp", "");
    r.raw_response = j.value("raw_response", "");
    if (j.contains("score") && !j["score"].is_null()) r.score = j["score"].get<double>();
    r.rationale = j.value("rationale", "");
    if (j.contains("usage")) {
      r.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
      r.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
    }
    r.status = run_status_from_string(j.at("status").get<std::string>());
  } catch (const json::exception& e) {
    throw RunnerError(std::string("bad record fields: ") + e.what());
  }
  if ((r.status == RunStatus::ok) != r.score.has_value())
    throw RunnerError("record for '" + r.speech_id + "' run " +
                      std::to_string(r.run_index) + ": score presence does not match status");
  if (r.score) {
    const double scaled = *r.score * 10.0;
    if (*r.score < 0.0 || *r.score > 2.0 || std::abs(scaled - std::round(scaled)) > 1e-9)
      throw RunnerError("record for '" + r.speech_id + "' run " +
                        std::to_string(r.run_index) + ": score " +
                        std::to_string(*r.score) + " off the one-decimal 0-2 grid");
  }
  return r;
}

std::vector<RunRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RunnerError("cannot open records '" + path.string() + "'");
  std::vector<RunRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(record_from_json(line));
  }
  return out;
}

std::vector<TaskKey> plan_campaign(const Corpus& corpus,
                                   const std::vector<ModelConfig>& models, int runs,
                                   std::uint64_t seed) {
  if (runs < 1) throw RunnerError("runs_per_cell must be >= 1");
  if (models.empty()) throw RunnerError("campaign has no models");
  if (corpus.targets.empty()) throw RunnerError("corpus has no target speeches");

  std::set<std::string> labels;
  for (const auto& m : models)
    if (!labels.insert(m.label).second)
      throw RunnerError("duplicate model label '" + m.label + "'");

  std::vector<TaskKey> tasks;
  tasks.reserve(corpus.targets.size() * models.size() * static_cast<std::size_t>(runs));
  for (const auto& model : models)
    for (const auto& target : corpus.targets)
      for (int run = 1; run <= runs; ++run)
        tasks.push_back({model.label, target.id, run});
  seeded_shuffle(tasks, seed);
  return tasks;
}

std::vector<TaskKey> resume(const Campaign& campaign,
                            const std::vector<RunRecord>& existing) {
  if (!campaign.corpus) throw RunnerError("campaign has no corpus");
  std::set<TaskKey> done;
  for (const auto& record : existing) {
    if (!done.insert(record.key()).second)
      throw RunnerError("duplicate record key for '" + record.speech_id + "' run " +
                        std::to_string(record.run_index) + " of " + record.model_label);
    if (record.status == RunStatus::request_failed) done.erase(record.key());
  }
  std::vector<TaskKey> remaining;
  for (const auto& task :
       plan_campaign(*campaign.corpus, campaign.models, campaign.runs_per_cell, campaign.seed))
    if (!done.count(task)) remaining.push_back(task);
  return remaining;
}

std::vector<RunRecord> execute(const Campaign& campaign, CompletionClient& client,
                               JsonlSink& sink, const std::vector<RunRecord>& existing,
                               const ExecuteOptions& options) {
  if (!campaign.corpus) throw RunnerError("campaign has no corpus");
  const std::vector<TaskKey> tasks = resume(campaign, existing);

  std::map<std::string, const ModelConfig*> model_by_label;
  for (const auto& m : campaign.models) model_by_label[m.label] = &m;

  // Prompts are identical across runs of a speech; build each once.
  std::map<std::string, MessageSequence> messages_by_speech;
  for (const auto& target : campaign.corpus->targets)
    messages_by_speech[target.id] = render_messages(
        assemble_prompt(campaign.corpus->rubric, campaign.corpus->anchors, target));

  std::vector<RunRecord> produced(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr sink_failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      {
        std::lock_guard lock(failure_mutex);
        if (sink_failure) return;
      }
      const TaskKey& task = tasks[i];
      RunRecord record;
      record.model_label = task.model_label;
      record.speech_id = task.speech_id;
      record.run_index = task.run_index;
      record.timestamp = utc_now_rfc3339();
      try {
        const auto response =
            client.complete(*model_by_label.at(task.model_label),
                            messages_by_speech.at(task.speech_id));
        record.raw_response = response.text;
        record.usage = response.usage;
        sink.append_audit(task, response.raw_request_json, response.raw_response_json);
        const auto extraction = extract_score(response.text);
        if (extraction.ok()) {
          record.status = RunStatus::ok;
          record.score = extraction.score->value;
          record.rationale = rationale_from(response.text);
        } else {
          record.status = RunStatus::extraction_failed;
          record.rationale = extraction.detail;
        }
      } catch (const GatewayError& e) {
        record.status = RunStatus::request_failed;
        record.rationale = std::string(GatewayError::kind_name(e.kind())) + ": " + e.what();
      }
      try {
        sink.append(record);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!sink_failure) sink_failure = std::current_exception();
        return;
      }
      produced[i] = std::move(record);
    }
  };

  const int thread_count =
      std::max(1, std::min<int>(options.parallelism, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(thread_count));
  for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  if (sink_failure) std::rethrow_exception(sink_failure);
  return produced;
}

std::map<std::string, ModelRunTable> score_table(const std::vector<RunRecord>& records) {
  std::map<std::string, std::set<std::string>> items_by_model;
  std::map<std::string, int> max_run_by_model;
  for (const auto& r : records) {
    if (r.status != RunStatus::ok) continue;
    items_by_model[r.model_label].insert(r.speech_id);
    max_run_by_model[r.model_label] = std::max(max_run_by_model[r.model_label], r.run_index);
  }

  std::map<std::string, ModelRunTable> out;
  for (const auto& [label, items] : items_by_model) {
    ModelRunTable table;
    table.model_label = label;
    table.matrix.items.assign(items.begin(), items.end());
    const int runs = max_run_by_model[label];
    for (int run = 1; run <= runs; ++run)
      table.matrix.raters.push_back("run-" + std::to_string(run));
    table.matrix.cells.assign(table.matrix.items.size(),
                              std::vector<std::optional<double>>(
                                  static_cast<std::size_t>(runs), std::nullopt));
    out[label] = std::move(table);
  }
  for (const auto& r : records) {
    if (r.status != RunStatus::ok) continue;
    auto& table = out[r.model_label];
    const auto it = std::lower_bound(table.matrix.items.begin(), table.matrix.items.end(),
                                     r.speech_id);
    const auto row = static_cast<std::size_t>(it - table.matrix.items.begin());
    table.matrix.cells[row][static_cast<std::size_t>(r.run_index - 1)] = r.score;
  }
  for (auto& [label, table] : out) {
    table.item_means.reserve(table.matrix.items.size());
    for (const auto& row : table.matrix.cells) {
      double sum = 0.0;
      int n = 0;
      for (const auto& cell : row)
        if (cell) {
          sum += *cell;
          ++n;
        }
      if (n > 0)
        table.item_means.push_back(sum / n);
      else
        table.item_means.push_back(std::nullopt);
    }
  }
  return out;
}

}  // namespace shg
