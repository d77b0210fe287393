#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shg/corpus.hpp"
#include "shg/gateway.hpp"
#include "shg/prompt.hpp"
#include "shg/report.hpp"
#include "shg/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 ok, 2 usage, 3 corpus/data, 4 gateway, 5 records, 6 internal.
enum ExitCode {
  kOk = 0,
  kUsage = 2,
  kCorpusError = 3,
  kGatewayError = 4,
  kRecordsError = 5,
  kInternalError = 6,
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

shg::ModelConfig config_from_json(const json& j, const std::string& endpoint,
                                  const std::string& api_key_env) {
  shg::ModelConfig cfg;
  cfg.label = j.at("label").get<std::string>();
  cfg.model_slug = j.value("model_slug", cfg.label);
  cfg.endpoint_url = j.value("endpoint_url", endpoint);
  cfg.mode = j.value("mode", "standard") == "reasoning" ? shg::ModelMode::reasoning
                                                        : shg::ModelMode::standard;
  if (j.contains("reasoning_effort")) {
    const auto effort = j["reasoning_effort"].get<std::string>();
    if (effort == "minimal") cfg.reasoning_effort = shg::ReasoningEffort::minimal;
    else if (effort == "low") cfg.reasoning_effort = shg::ReasoningEffort::low;
    else if (effort == "medium") cfg.reasoning_effort = shg::ReasoningEffort::medium;
    else cfg.reasoning_effort = shg::ReasoningEffort::high;
  }
  if (j.contains("thinking_enabled")) cfg.thinking_enabled = j["thinking_enabled"].get<bool>();
  if (j.contains("temperature")) cfg.temperature = j["temperature"].get<double>();
  cfg.max_output_tokens = j.value("max_output_tokens", 4096);
  cfg.max_in_flight = j.value("max_in_flight", 2);
  if (j.contains("retry")) {
    const auto& r = j["retry"];
    cfg.retry.max_attempts = r.value("max_attempts", 3);
    cfg.retry.base_backoff = std::chrono::milliseconds(r.value("base_backoff_ms", 250));
    cfg.retry.backoff_multiplier = r.value("backoff_multiplier", 2.0);
  }
  if (!api_key_env.empty()) cfg.api_key_env = api_key_env;
  return cfg;
}

// --models takes either a JSON config file or a comma-separated slug list;
// bare slugs get defaults, with mode inferred from a "reasoning" substring.
std::vector<shg::ModelConfig> parse_models(const std::string& arg,
                                           const std::string& endpoint,
                                           const std::string& api_key_env) {
  std::vector<shg::ModelConfig> out;
  if (arg.size() > 5 && arg.substr(arg.size() - 5) == ".json") {
    std::ifstream in(arg);
    if (!in) throw shg::RunnerError("cannot open models file '" + arg + "'");
    for (const auto& j : json::parse(in))
      out.push_back(config_from_json(j, endpoint, api_key_env));
    return out;
  }
  for (const auto& slug : split_csv(arg)) {
    shg::ModelConfig cfg;
    cfg.label = slug;
    cfg.model_slug = slug;
    cfg.endpoint_url = endpoint;
    if (slug.find("reasoning") != std::string::npos) {
      cfg.mode = shg::ModelMode::reasoning;
      cfg.reasoning_effort = shg::ReasoningEffort::high;
    }
    if (!api_key_env.empty()) cfg.api_key_env = api_key_env;
    out.push_back(cfg);
  }
  return out;
}

std::vector<shg::RunRecord> filter_records(std::vector<shg::RunRecord> records,
                                           const std::string& labels_csv) {
  if (labels_csv.empty()) return records;
  const auto wanted = split_csv(labels_csv);
  std::vector<shg::RunRecord> out;
  for (auto& r : records)
    if (std::find(wanted.begin(), wanted.end(), r.model_label) != wanted.end())
      out.push_back(std::move(r));
  return out;
}

int cmd_validate(const std::string& corpus_path) {
  shg::Corpus corpus;
  try {
    corpus = shg::load_corpus(corpus_path);
  } catch (const shg::CorpusError& e) {
    std::cerr << "corpus error [" << e.id() << "/" << e.field() << "]: " << e.what() << "\n";
    return kCorpusError;
  }
  const auto violations = shg::validate_corpus(corpus);
  for (const auto& v : violations)
    std::cout << v.id << "\t" << v.rule << "\t" << v.detail << "\n";
  std::cout << "corpus: " << corpus.anchors.size() << " anchors, " << corpus.targets.size()
            << " targets, " << violations.size() << " violations\n";
  return violations.empty() ? kOk : kCorpusError;
}

int cmd_probe(const std::string& models_spec, const std::string& endpoint,
              const std::string& api_key_env) {
  shg::HttpGateway gateway;
  bool all_healthy = true;
  for (const auto& cfg : parse_models(models_spec, endpoint, api_key_env)) {
    const auto health = gateway.probe(cfg);
    std::cout << cfg.label << ": " << (health.healthy() ? "healthy" : "unhealthy")
              << " (reachable=" << health.reachable << " auth=" << health.auth_ok
              << " model=" << health.model_available << ") " << health.detail << "\n";
    all_healthy = all_healthy && health.healthy();
  }
  return all_healthy ? kOk : kGatewayError;
}

int cmd_run(const std::string& corpus_path, const std::string& models_spec,
            const std::string& endpoint, const std::string& api_key_env, int runs,
            std::uint64_t seed, const std::string& out_dir, bool resume_flag,
            int parallelism) {
  shg::Corpus corpus;
  try {
    corpus = shg::load_corpus(corpus_path);
  } catch (const shg::CorpusError& e) {
    std::cerr << "corpus error: " << e.what() << "\n";
    return kCorpusError;
  }

  shg::Campaign campaign;
  campaign.corpus = &corpus;
  campaign.models = parse_models(models_spec, endpoint, api_key_env);
  campaign.runs_per_cell = runs;
  campaign.seed = seed;

  // budget warning: anchor-laden prompts get long; flag anything so large
  // that small-context models would truncate
  for (const auto& target : corpus.targets) {
    const auto doc = shg::assemble_prompt(corpus.rubric, corpus.anchors, target);
    if (doc.token_estimate > 100000)
      std::cerr << "warning: prompt for '" << target.id << "' is ~" << doc.token_estimate
                << " tokens\n";
  }

  shg::HttpGateway gateway;
  for (const auto& cfg : campaign.models) {
    const auto health = gateway.probe(cfg);
    if (!health.healthy()) {
      std::cerr << cfg.label << " unhealthy: " << health.detail << "\n";
      return kGatewayError;
    }
  }

  fs::create_directories(out_dir);
  const fs::path records_path = fs::path(out_dir) / "records.jsonl";
  std::vector<shg::RunRecord> existing;
  if (resume_flag && fs::exists(records_path)) existing = shg::load_records(records_path);

  shg::JsonlSink sink(records_path, fs::path(out_dir) / "audit.jsonl");
  shg::ExecuteOptions options;
  options.parallelism = parallelism;
  const auto produced = shg::execute(campaign, gateway, sink, existing, options);

  int ok = 0, extraction_failed = 0, request_failed = 0;
  for (const auto& r : produced) {
    if (r.status == shg::RunStatus::ok) ++ok;
    else if (r.status == shg::RunStatus::extraction_failed) ++extraction_failed;
    else ++request_failed;
  }
  std::cout << "executed " << produced.size() << " tasks (" << existing.size()
            << " resumed): " << ok << " ok, " << extraction_failed
            << " extraction_failed, " << request_failed << " request_failed\n"
            << "records: " << records_path.string() << "\n";
  return request_failed == 0 && extraction_failed == 0 ? kOk : kRecordsError;
}

int cmd_replicate(const std::string& records_path, const std::string& corpus_path,
                  const std::string& out_dir, std::uint64_t seed, int resamples,
                  const std::string& labels_csv, bool pooled) {
  try {
    const auto corpus = shg::load_corpus(corpus_path);
    const auto records = filter_records(shg::load_records(records_path), labels_csv);
    const auto bundle = shg::replicate(records, corpus, seed, resamples, pooled);
    shg::write_bundle(bundle, out_dir);
    for (const auto& w : bundle.coverage_warnings) std::cerr << "coverage: " << w << "\n";
    std::cout << "wrote " << bundle.table_agreement.size() << " model rows to " << out_dir
              << "\n";
    return kOk;
  } catch (const shg::CorpusError& e) {
    std::cerr << "corpus error: " << e.what() << "\n";
    return kCorpusError;
  } catch (const shg::RunnerError& e) {
    std::cerr << "records error: " << e.what() << "\n";
    return kRecordsError;
  } catch (const shg::ReportError& e) {
    std::cerr << "replicate error: " << e.what() << "\n";
    return kRecordsError;
  }
}

int cmd_rank(const std::string& records_path, const std::string& corpus_path,
             std::uint64_t seed, const std::string& labels_csv) {
  try {
    const auto corpus = shg::load_corpus(corpus_path);
    const auto records = filter_records(shg::load_records(records_path), labels_csv);
    const auto bundle = shg::replicate(records, corpus, seed, /*resamples=*/100);
    for (const auto& r : bundle.leaderboard)
      std::cout << r.rank << "\t" << r.model_label << "\n";
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "rank error: " << e.what() << "\n";
    return kRecordsError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic holistic grading harness: grade speeches for populism with "
               "LLM endpoints and evaluate agreement with human coders"};
  app.require_subcommand(1);

  std::string corpus_path, records_path, out_dir = "out", models_spec, endpoint,
              api_key_env, labels_csv;
  int runs = 5, resamples = 1000, parallelism = 4;
  std::uint64_t seed = 0;
  bool resume_flag = false, pooled = false;

  auto* validate = app.add_subcommand("validate", "Check a corpus manifest");
  validate->add_option("--corpus", corpus_path, "Path to manifest.json")->required();

  auto* probe = app.add_subcommand("probe", "Check endpoint health per model");
  probe->add_option("--models", models_spec, "Model slugs (csv) or models.json")->required();
  probe->add_option("--endpoint", endpoint, "Base URL, e.g. https://host/api/v1");
  probe->add_option("--api-key-env", api_key_env, "Env var holding the bearer token");

  auto* run = app.add_subcommand("run", "Execute a grading campaign");
  run->add_option("--corpus", corpus_path, "Path to manifest.json")->required();
  run->add_option("--models", models_spec, "Model slugs (csv) or models.json")->required();
  run->add_option("--endpoint", endpoint, "Base URL for bare slugs");
  run->add_option("--api-key-env", api_key_env, "Env var holding the bearer token");
  run->add_option("--runs", runs, "Runs per (model, speech) cell");
  run->add_option("--seed", seed, "Dispatch-order seed");
  run->add_option("--out", out_dir, "Output directory for records.jsonl");
  run->add_flag("--resume", resume_flag, "Skip cells already recorded");
  run->add_option("--parallelism", parallelism, "Global worker cap");

  auto* replicate = app.add_subcommand("replicate", "Emit replication tables from records");
  replicate->add_option("--records", records_path, "records.jsonl")->required();
  replicate->add_option("--corpus", corpus_path, "Path to manifest.json")->required();
  replicate->add_option("--out", out_dir, "Output directory");
  replicate->add_option("--seed", seed, "Bootstrap seed");
  replicate->add_option("--resamples", resamples, "Bootstrap resamples");
  replicate->add_option("--models", labels_csv, "Restrict to these record labels (csv)");
  replicate->add_flag("--pooled", pooled,
                      "Also emit metrics over all runs pooled (sensitivity variant)");

  auto* rank = app.add_subcommand("rank", "Print the model leaderboard");
  rank->add_option("--records", records_path, "records.jsonl")->required();
  rank->add_option("--corpus", corpus_path, "Path to manifest.json")->required();
  rank->add_option("--seed", seed, "Bootstrap seed");
  rank->add_option("--models", labels_csv, "Restrict to these record labels (csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(corpus_path);
    if (probe->parsed()) return cmd_probe(models_spec, endpoint, api_key_env);
    if (run->parsed())
      return cmd_run(corpus_path, models_spec, endpoint, api_key_env, runs, seed, out_dir,
                     resume_flag, parallelism);
    if (replicate->parsed())
      return cmd_replicate(records_path, corpus_path, out_dir, seed, resamples, labels_csv,
                           pooled);
    if (rank->parsed()) return cmd_rank(records_path, corpus_path, seed, labels_csv);
  } catch (const shg::GatewayError& e) {
    std::cerr << "gateway error (" << shg::GatewayError::kind_name(e.kind()) << "): "
              << e.what() << "\n";
    return kGatewayError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternalError;
  }
  return kUsage;
}
