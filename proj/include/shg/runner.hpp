#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "shg/corpus.hpp"
#include "shg/gateway.hpp"
#include "shg/metrics.hpp"

namespace shg {

class RunnerError : public std::runtime_error {
 public:
  explicit RunnerError(const std::string& what) : std::runtime_error(what) {}
};

struct Campaign {
  const Corpus* corpus = nullptr;
  std::vector<ModelConfig> models;
  int runs_per_cell = 5;
  std::uint64_t seed = 0;  // orders task dispatch deterministically
};

struct TaskKey {
  std::string model_label;
  std::string speech_id;
  int run_index = 1;  // 1-based

  auto operator<=>(const TaskKey&) const = default;
};

enum class RunStatus { ok, extraction_failed, request_failed };

std::string to_string(RunStatus s);
RunStatus run_status_from_string(const std::string& s);

struct RunRecord {
  std::string model_label;
  std::string speech_id;
  int run_index = 1;
  std::string timestamp;  // RFC 3339 UTC
  std::string raw_response;
  std::optional<double> score;  // present iff status == ok; one-decimal value
  std::string rationale;
  TokenUsage usage;
  RunStatus status = RunStatus::ok;

  TaskKey key() const { return {model_label, speech_id, run_index}; }
};

enum class ScoreSource { terminal_marker, fallback_scan };

struct GradedScore {
  double value = 0.0;  // in [0,2], value*10 integral
  ScoreSource source = ScoreSource::terminal_marker;
};

enum class ExtractError { none, no_score, out_of_range };

struct ScoreExtraction {
  std::optional<GradedScore> score;
  ExtractError error = ExtractError::none;
  std::string detail;

  bool ok() const { return score.has_value(); }
};

// Total over arbitrary UTF-8: returns a graded score or a typed error,
// never throws. Prefers the last `FINAL SCORE: x.x` line; otherwise takes
// the last standalone decimal within [0,2]. Values are rounded
// half-away-from-zero to one decimal.
ScoreExtraction extract_score(const std::string& response_text);

// Append-only record sink; one JSON object per line, atomic per line.
class JsonlSink {
 public:
  explicit JsonlSink(std::filesystem::path path,
                     std::optional<std::filesystem::path> audit_path = std::nullopt);

  void append(const RunRecord& record);
  void append_audit(const TaskKey& key, const std::string& request_json,
                    const std::string& response_json);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::optional<std::filesystem::path> audit_path_;
  std::mutex mutex_;
};

std::string record_to_json(const RunRecord& record);
RunRecord record_from_json(const std::string& line);
std::vector<RunRecord> load_records(const std::filesystem::path& path);

// |targets| x |models| x runs task keys, seeded-shuffled across models so no
// single provider gets hit in a burst.
std::vector<TaskKey> plan_campaign(const Corpus& corpus,
                                   const std::vector<ModelConfig>& models, int runs,
                                   std::uint64_t seed = 0);

// Task keys still owed: planned keys not present in `existing`, plus keys
// whose existing record is request_failed. Failed extractions are kept, not
// redone (a retry would change the sampled run).
std::vector<TaskKey> resume(const Campaign& campaign,
                            const std::vector<RunRecord>& existing);

struct ExecuteOptions {
  int parallelism = 4;  // global cap; per-model caps live in the gateway
};

// Runs every remaining task, appending to the sink as records complete.
// Individual request failures become request_failed records; sink write
// failures abort. Returns the records produced by this call.
std::vector<RunRecord> execute(const Campaign& campaign, CompletionClient& client,
                               JsonlSink& sink,
                               const std::vector<RunRecord>& existing = {},
                               const ExecuteOptions& options = {});

struct ModelRunTable {
  std::string model_label;
  ScoreMatrix matrix;  // items x runs, missing cells where no ok record
  std::vector<std::optional<double>> item_means;
};

// One items x runs matrix per model from ok records; items sorted by id,
// labels sorted, so the result is independent of completion order.
std::map<std::string, ModelRunTable> score_table(const std::vector<RunRecord>& records);

}  // namespace shg
