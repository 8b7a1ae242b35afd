#pragma once

// Command drivers behind the CLI verbs. Each driver is a library function so
// tests exercise exactly the code the CLI runs. Partial failure of one case
// never aborts the others; drivers finish the rest and return exit code 1.

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "tumorboard/chart/fhir.hpp"
#include "tumorboard/chart/store.hpp"
#include "tumorboard/harness/run_config.hpp"
#include "tumorboard/judge/judge.hpp"
#include "tumorboard/llm/gateway.hpp"
#include "tumorboard/llm/http_transport.hpp"
#include "tumorboard/orchestrate/artifact_store.hpp"
#include "tumorboard/orchestrate/strategies.hpp"
#include "tumorboard/ratings/ratings.hpp"
#include "tumorboard/reports/agreement_report.hpp"
#include "tumorboard/reports/comparison.hpp"
#include "tumorboard/util/fs.hpp"

namespace tumorboard {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartialFailure = 1;
inline constexpr int kExitConfigError = 2;

namespace harness_detail {

inline std::unique_ptr<llm::Gateway> make_gateway(const RunConfig& config,
                                                  std::shared_ptr<llm::Transport> transport) {
  llm::GatewayConfig gc;
  gc.mode = config.mode;
  gc.base_url = config.endpoint.base_url;
  gc.path = config.endpoint.path;
  gc.auth_header = config.endpoint.auth_header;
  gc.auth_prefix = config.endpoint.auth_prefix;
  gc.in_flight_cap = config.in_flight_cap;
  gc.per_minute_budget = config.requests_per_minute;
  if (const char* secret = std::getenv(config.endpoint.auth_env.c_str())) gc.auth_secret = secret;

  std::shared_ptr<llm::TranscriptStore> store;
  if (config.mode != llm::GatewayMode::Live) {
    if (config.transcript_dir.empty())
      throw ConfigError("transcript_dir is required in record/replay mode");
    std::filesystem::create_directories(config.transcript_dir);
    store = std::make_shared<llm::TranscriptStore>(config.transcript_dir);
  }
  if (config.mode != llm::GatewayMode::Replay && transport == nullptr) {
    if (gc.base_url.empty())
      throw ConfigError("endpoint.base_url is required in live/record mode");
    transport = llm::make_http_transport(gc);
  }
  return std::make_unique<llm::Gateway>(gc, store, transport);
}

// Bounded pool; results land at their input index so output order never
// depends on scheduling.
template <typename Item, typename Fn>
void parallel_for(const std::vector<Item>& items, int threads, Fn&& fn) {
  if (threads <= 1 || items.size() <= 1) {
    for (std::size_t i = 0; i < items.size(); ++i) fn(i, items[i]);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      fn(i, items[i]);
    }
  };
  std::vector<std::thread> pool;
  int n = std::min<int>(threads, static_cast<int>(items.size()));
  pool.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace harness_detail

// --- ingest-charts ----------------------------------------------------------
// Accepts chart JSON documents and FHIR bundles; bundle notes are grouped by
// patient and merged into existing charts.
inline int cmd_ingest_charts(const RunConfig& config, const std::vector<std::string>& files) {
  if (config.chart_store.empty()) throw ConfigError("chart_store is required for ingest-charts");
  ChartStore store(config.chart_store);
  std::size_t accepted = 0, skipped = 0;
  std::vector<std::string> errors;

  for (const auto& file : files) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(fs::read_file(file));
    } catch (const std::exception& e) {
      errors.push_back(file + ": " + e.what());
      continue;
    }
    try {
      if (doc.contains("entry")) {
        auto report = ingest_fhir_bundle(doc);
        skipped += report.skipped;
        for (const auto& err : report.errors) errors.push_back(file + ": " + err);
        std::map<std::string, std::vector<ClinicalNote>> by_patient;
        for (const auto& note : report.accepted) by_patient[note.patient_id].push_back(note);
        for (auto& [patient_id, notes] : by_patient) {
          PatientChart chart;
          if (store.has_patient(patient_id)) chart = store.chart(patient_id);
          else chart.patient_id = patient_id;
          std::set<std::string> have;
          for (const auto& n : chart.notes) have.insert(n.note_id);
          for (auto& n : notes) {
            if (have.count(n.note_id)) continue;
            if (n.patient_id.empty()) n.patient_id = patient_id;
            chart.notes.push_back(std::move(n));
            ++accepted;
          }
          store.put(std::move(chart));
        }
      } else if (doc.contains("patient_id")) {
        store.put(chart_from_json(doc));
        ++accepted;
      } else {
        errors.push_back(file + ": neither a chart document nor a bundle");
      }
    } catch (const std::exception& e) {
      errors.push_back(file + ": " + e.what());
    }
  }

  nlohmann::json report{{"schema_version", 1},
                        {"accepted", accepted},
                        {"skipped", skipped},
                        {"errors", errors}};
  std::filesystem::create_directories(config.out_dir);
  fs::write_file(config.out_dir / "ingest_report.json", report.dump(2) + "\n");
  return errors.empty() ? kExitOk : kExitPartialFailure;
}

// --- ingest-summaries ---------------------------------------------------------
// Baseline summaries (physician-authored reference, manual-workflow output)
// arrive as JSON files {case_id, method, body[, created_at]} and become
// ordinary summary records. Bodies must respect the character limit; sections
// are parsed when the body follows the standard headings, otherwise the
// record is stored with empty sections and flagged.
inline int cmd_ingest_summaries(const RunConfig& config, const std::vector<std::string>& files) {
  SummaryStorage storage(config.summaries_dir());
  std::filesystem::create_directories(config.summaries_dir());
  std::vector<std::string> errors;
  nlohmann::json ingested = nlohmann::json::array();

  for (const auto& file : files) {
    try {
      nlohmann::json doc = nlohmann::json::parse(fs::read_file(file));
      SummaryArtifact artifact;
      artifact.case_id = doc.at("case_id").get<std::string>();
      artifact.method = method_from_string(doc.at("method").get<std::string>());
      artifact.body = doc.at("body").get<std::string>();
      artifact.created_at = doc.value("created_at", std::string{});
      auto verdict = enforce_character_limit(artifact.body);
      if (!verdict.ok)
        throw std::invalid_argument("body is " + std::to_string(verdict.count) +
                                    " code points, over the limit");
      nlohmann::json extras{{"ingested_from", std::filesystem::path(file).filename().string()}};
      try {
        artifact.structured = parse_summary_sections(artifact.body);
      } catch (const std::exception&) {
        extras["sections_unparsed"] = true;  // free-form baseline text
      }
      std::string id = store_summary(artifact, storage, extras);
      ingested.push_back(nlohmann::json{{"file", file}, {"record_id", id}});
    } catch (const std::exception& e) {
      errors.push_back(file + ": " + e.what());
    }
  }
  nlohmann::json report{{"schema_version", 1}, {"ingested", ingested}, {"errors", errors}};
  std::filesystem::create_directories(config.out_dir);
  fs::write_file(config.out_dir / "ingest_summaries_report.json", report.dump(2) + "\n");
  return errors.empty() ? kExitOk : kExitPartialFailure;
}

// --- generate ----------------------------------------------------------------
inline int cmd_generate(const RunConfig& config,
                        std::shared_ptr<llm::Transport> transport = nullptr,
                        const PromptLibrary& prompts = default_prompts()) {
  if (config.cases.empty()) throw ConfigError("generate requires a nonempty case list");
  if (config.strategies.empty()) throw ConfigError("generate requires a nonempty strategy list");
  for (auto s : config.strategies)
    if (!is_generatable(s))
      throw ConfigError(std::string(to_string(s)) + " is ingest-only and cannot be generated");
  if (config.mode != llm::GatewayMode::Replay) config.require_seed("live generation");

  ChartStore store(config.chart_store);
  auto gateway_ptr = harness_detail::make_gateway(config, std::move(transport));
  llm::Gateway& gateway = *gateway_ptr;
  SummaryStorage storage(config.summaries_dir());
  std::filesystem::create_directories(config.summaries_dir());

  struct Job {
    CaseSpec spec;
    GenerationMethod strategy;
  };
  std::vector<Job> jobs;
  for (const auto& spec : config.cases)
    for (auto strategy : config.strategies) jobs.push_back({spec, strategy});

  struct Outcome {
    nlohmann::json artifact;  // null on failure
    nlohmann::json failure;   // null on success
  };
  std::vector<Outcome> outcomes(jobs.size());

  harness_detail::parallel_for(jobs, config.threads, [&](std::size_t i, const Job& job) {
    StrategyConfig sc;
    sc.strategy = job.strategy;
    sc.model_id = config.generation_model;
    sc.lookback_days = config.lookback_days;
    sc.max_retrievals = config.max_retrievals;
    sc.min_lookback_days = config.min_lookback_days;
    sc.max_lookback_days = config.max_lookback_days;
    try {
      auto run = run_strategy(sc, job.spec.case_id, job.spec.patient_id, job.spec.as_of, gateway,
                              store, &storage, prompts);
      outcomes[i].artifact =
          nlohmann::json{{"case_id", job.spec.case_id},
                         {"method", to_string(job.strategy)},
                         {"record_id", run.record_id ? *run.record_id : ""},
                         {"transcript_digests", run.artifact.transcript_refs}};
    } catch (const std::exception& e) {
      outcomes[i].failure = nlohmann::json{{"case_id", job.spec.case_id},
                                           {"method", to_string(job.strategy)},
                                           {"error", e.what()}};
    }
  });

  nlohmann::json artifacts = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& o : outcomes) {
    if (!o.artifact.is_null()) artifacts.push_back(o.artifact);
    if (!o.failure.is_null()) failures.push_back(o.failure);
  }
  nlohmann::json manifest{{"schema_version", 1},
                          {"config", config.snapshot()},
                          {"artifacts", artifacts},
                          {"failures", failures}};
  std::filesystem::create_directories(config.out_dir);
  fs::write_file(config.out_dir / "generate_manifest.json", manifest.dump(2) + "\n");
  return failures.empty() ? kExitOk : kExitPartialFailure;
}

// --- judge --------------------------------------------------------------------
inline int cmd_judge(const RunConfig& config,
                     std::shared_ptr<llm::Transport> transport = nullptr,
                     const PromptLibrary& prompts = default_prompts()) {
  if (config.rubric_dir.empty()) throw ConfigError("judge requires rubric_dir");
  auto gateway_ptr = harness_detail::make_gateway(config, std::move(transport));
  llm::Gateway& gateway = *gateway_ptr;
  SummaryStorage storage(config.summaries_dir());

  JudgeConfig jc;
  jc.model_id = config.judge_model;

  struct Row {
    std::string case_id;
    std::string method;
    EntailmentRecord record;
  };
  std::vector<Row> rows;
  std::vector<FactScore> scores;
  nlohmann::json failures = nlohmann::json::array();

  // Records sorted by id gives a stable (case, method) processing order.
  for (const auto& record_id : storage.record_ids()) {
    nlohmann::json record = storage.load_record(record_id);
    SummaryArtifact artifact = artifact_from_json(record);
    auto rubric_path = config.rubric_dir / (artifact.case_id + ".json");
    try {
      if (!std::filesystem::exists(rubric_path))
        throw std::runtime_error("no rubric file " + rubric_path.string());
      Rubric rubric = rubric_from_json(nlohmann::json::parse(fs::read_file(rubric_path)));
      std::vector<EntailmentRecord> case_records;
      for (const auto& attr : rubric.attributes) {
        auto verdicts = judge_attribute(attr, artifact.body, gateway, jc, prompts);
        case_records.insert(case_records.end(), verdicts.begin(), verdicts.end());
      }
      FactScore score = score_summary(rubric, case_records);
      score.case_id = artifact.case_id;
      score.method = artifact.method;
      scores.push_back(score);
      for (const auto& rec : case_records)
        rows.push_back(Row{artifact.case_id, to_string(artifact.method), rec});
    } catch (const std::exception& e) {
      failures.push_back(nlohmann::json{{"case_id", artifact.case_id},
                                        {"method", to_string(artifact.method)},
                                        {"error", e.what()}});
    }
  }

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.case_id != b.case_id) return a.case_id < b.case_id;
    if (a.method != b.method) return a.method < b.method;
    return a.record.attribute_id < b.record.attribute_id;
  });
  std::sort(scores.begin(), scores.end(), [](const FactScore& a, const FactScore& b) {
    if (a.case_id != b.case_id) return a.case_id < b.case_id;
    return std::string(to_string(a.method)) < to_string(b.method);
  });

  auto judge_dir = config.out_dir / "judge";
  std::filesystem::create_directories(judge_dir);

  std::string jsonl;
  for (const auto& row : rows) {
    nlohmann::json line{{"schema_version", 1},
                        {"case_id", row.case_id},
                        {"method", row.method},
                        {"attribute_id", row.record.attribute_id},
                        {"entailment", to_string(row.record.entailment)},
                        {"error_type", row.record.error_type
                                           ? nlohmann::json(to_string(*row.record.error_type))
                                           : nlohmann::json(nullptr)}};
    jsonl += line.dump() + "\n";
  }
  fs::write_file(judge_dir / "entailment_records.jsonl", jsonl);

  csv::Writer table({"case_id", "method", "n_items", "fully_present", "fully_or_partial"});
  nlohmann::json scores_json = nlohmann::json::array();
  for (const auto& s : scores) {
    char fully[32], partial[32];
    std::snprintf(fully, sizeof(fully), "%.6f", s.fully_present);
    std::snprintf(partial, sizeof(partial), "%.6f", s.fully_or_partial);
    table.write_row({s.case_id, to_string(s.method), std::to_string(s.n_items), fully, partial});
    nlohmann::json by_type;
    for (const auto& [type, ts] : s.by_type)
      by_type[type] = {{"n_items", ts.n_items},
                       {"n_fully", ts.n_fully},
                       {"n_fully_or_partial", ts.n_fully_or_partial}};
    scores_json.push_back(nlohmann::json{{"case_id", s.case_id},
                                         {"method", to_string(s.method)},
                                         {"n_items", s.n_items},
                                         {"fully_present", s.fully_present},
                                         {"fully_or_partial", s.fully_or_partial},
                                         {"by_type", by_type}});
  }
  fs::write_file(judge_dir / "fact_scores.csv", table.str());
  fs::write_file(judge_dir / "fact_scores.json",
                 nlohmann::json{{"schema_version", 1}, {"scores", scores_json}}.dump(2) + "\n");
  fs::write_file(judge_dir / "judge_manifest.json",
                 nlohmann::json{{"schema_version", 1},
                                {"config", config.snapshot()},
                                {"failures", failures}}
                         .dump(2) +
                     "\n");
  return failures.empty() ? kExitOk : kExitPartialFailure;
}

inline std::vector<FactScore> fact_scores_from_json(const nlohmann::json& j) {
  std::vector<FactScore> scores;
  for (const auto& item : j.at("scores")) {
    FactScore s;
    s.case_id = item.at("case_id").get<std::string>();
    s.method = method_from_string(item.at("method").get<std::string>());
    s.n_items = item.at("n_items").get<int>();
    s.fully_present = item.at("fully_present").get<double>();
    s.fully_or_partial = item.at("fully_or_partial").get<double>();
    if (item.contains("by_type")) {
      for (const auto& [type, ts] : item["by_type"].items()) {
        TypeScore t;
        t.n_items = ts.value("n_items", 0);
        t.n_fully = ts.value("n_fully", 0);
        t.n_fully_or_partial = ts.value("n_fully_or_partial", 0);
        s.by_type[type] = t;
      }
    }
    scores.push_back(std::move(s));
  }
  return scores;
}

// --- compare ------------------------------------------------------------------
inline int cmd_compare(const RunConfig& config) {
  auto scores_path = config.out_dir / "judge" / "fact_scores.json";
  if (!std::filesystem::exists(scores_path))
    throw ConfigError("compare needs " + scores_path.string() + " (run judge first)");
  auto fact_scores = fact_scores_from_json(nlohmann::json::parse(fs::read_file(scores_path)));

  std::vector<RatingRecord> ratings;
  if (!config.ratings_csv.empty())
    ratings = ratings_from_csv(csv::parse_file(config.ratings_csv.string()));

  ComparisonReport report = comparison_report(fact_scores, ratings, config.baseline, config.alpha);

  auto dir = config.out_dir / "compare";
  std::filesystem::create_directories(dir);
  fs::write_file(dir / "per_case_scores.csv", case_rows_to_csv(report));
  fs::write_file(dir / "fact_comparisons.csv", fact_comparisons_to_csv(report));
  fs::write_file(dir / "friedman.csv", friedman_to_csv(report));
  fs::write_file(dir / "by_type_matrix.csv", by_type_to_csv(report));
  if (!report.likert.empty()) {
    fs::write_file(dir / "subjective_likert.csv", likert_to_csv(report));
    fs::write_file(dir / "subjective_comparisons.csv", subjective_comparisons_to_csv(report));
  }
  fs::write_file(dir / "comparison_report.json", comparison_report_to_json(report).dump(2) + "\n");
  return kExitOk;
}

// --- agreement ------------------------------------------------------------------
inline int cmd_agreement(const RunConfig& config, const std::filesystem::path& labels_csv) {
  if (labels_csv.empty()) throw ConfigError("agreement requires a labels CSV");
  auto rows = labels_from_csv(csv::parse_file(labels_csv.string()));

  AgreementReportConfig ac;
  ac.machine_rater_id = config.machine_rater_id;
  ac.n_reps = config.bootstrap_reps;
  ac.seed = config.require_seed("bootstrap confidence intervals");

  AgreementReport report = agreement_report(rows, ac);
  auto dir = config.out_dir / "agreement";
  std::filesystem::create_directories(dir);
  fs::write_file(dir / "pairwise.csv", agreement_pairwise_to_csv(report));
  fs::write_file(dir / "fleiss.csv", agreement_fleiss_to_csv(report));
  fs::write_file(dir / "agreement_report.json", agreement_report_to_json(report).dump(2) + "\n");
  return kExitOk;
}

// --- monitor --------------------------------------------------------------------
inline int cmd_monitor(const RunConfig& config, const std::filesystem::path& ratings_csv) {
  std::filesystem::path path = ratings_csv.empty() ? config.ratings_csv : ratings_csv;
  if (path.empty()) throw ConfigError("monitor requires a ratings CSV");
  auto records = ratings_from_csv(csv::parse_file(path.string()));
  MonitorReport report =
      weekly_monitor(records, {}, kAcceptabilityThreshold, config.bootstrap_reps,
                     config.require_seed("bootstrap confidence intervals"));
  auto dir = config.out_dir / "monitor";
  std::filesystem::create_directories(dir);
  fs::write_file(dir / "weekly.csv", monitor_report_to_csv(report));
  fs::write_file(dir / "weekly.json", monitor_report_to_json(report).dump(2) + "\n");
  return kExitOk;
}

}  // namespace tumorboard
