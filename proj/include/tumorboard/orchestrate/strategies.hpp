#pragma once

// The five generation strategies over one gateway/store pair:
//   SingleNote      one call on the most recent oncology note
//   SingleStep      one call on the chronological 180-day concatenation
//   MultiStep       per-note constrained extracts, then one synthesis call
//   MultiAgentLow   sequential DataLoader -> Fhir -> Curator -> Summarizer,
//                   fixed window, one retrieval, prescriptive curation
//   MultiAgentHigh  same pipeline with model-chosen bounded lookback,
//                   iterative retrieval, and discretionary curation
// Every path emits an artifact whose body passes the character limit and
// whose sections parse; violations trigger bounded corrective re-asks.

#include <json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tumorboard/chart/store.hpp"
#include "tumorboard/core/char_limit.hpp"
#include "tumorboard/core/sections.hpp"
#include "tumorboard/core/types.hpp"
#include "tumorboard/llm/gateway.hpp"
#include "tumorboard/orchestrate/artifact_store.hpp"
#include "tumorboard/orchestrate/citation.hpp"
#include "tumorboard/orchestrate/prompts.hpp"
#include "tumorboard/orchestrate/workspace.hpp"

namespace tumorboard {

struct StrategyConfig {
  GenerationMethod strategy = GenerationMethod::SingleStep;
  std::string model_id = "generation-model";
  int lookback_days = 180;        // fixed window for SingleStep/MultiStep/MultiAgentLow
  int max_retrievals = 5;         // high-autonomy iteration cap
  int min_lookback_days = 30;     // high-autonomy lookback bounds
  int max_lookback_days = 1095;
  int max_regen_attempts = 2;     // corrective re-asks on limit/format violations
  int max_agent_steps = 12;
  std::size_t max_prompt_code_points = 400000;

  nlohmann::json snapshot(const PromptLibrary& prompts) const {
    nlohmann::json versions;
    for (const auto& [id, v] : prompts.versions()) versions[id] = v;
    return nlohmann::json{{"strategy", to_string(strategy)},
                          {"model_id", model_id},
                          {"lookback_days", lookback_days},
                          {"max_retrievals", max_retrievals},
                          {"min_lookback_days", min_lookback_days},
                          {"max_lookback_days", max_lookback_days},
                          {"max_regen_attempts", max_regen_attempts},
                          {"prompt_versions", versions}};
  }
};

struct CharacterLimitViolation : std::runtime_error {
  explicit CharacterLimitViolation(std::size_t count_)
      : std::runtime_error("summary body is " + std::to_string(count_) +
                           " code points, over the limit of " + std::to_string(kSummaryCharLimit)),
        count(count_) {}
  std::size_t count;
};

struct SectionParseFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExtractFormatViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RetrievalBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoteSetTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoNotesInWindow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AgentLoopOverrun : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SummaryNotStored : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kExtractSentinel = "Note does not include any relevant information.";

struct NoteExtract {
  std::string text;
  bool sentinel = false;
};

struct StrategyRun {
  SummaryArtifact artifact;
  nlohmann::json extras;                  // config snapshot; audit for agent runs
  std::optional<std::string> record_id;   // set when a storage was supplied
};

namespace strategy_detail {

inline std::string format_note(const ClinicalNote& note) {
  return "--- note " + note.note_id + " (" + dates::format_date(dates::date_of(note.timestamp)) +
         ", " + note.author_specialty + ") ---\n" + note.text;
}

inline std::string trim_copy(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool valid_extract_date_line(const std::string& line) {
  if (line.rfind("Note Date: ", 0) != 0) return false;
  std::string rest = line.substr(11);
  if (rest == "Unknown") return true;
  if (rest.size() != 10 || rest[4] != '-' || rest[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (rest[i] < '0' || rest[i] > '9') return false;
  return true;
}

// Nonblank lines; the extract format allows blank separators.
inline std::vector<std::string> nonblank_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    if (!trim_copy(line).empty()) lines.push_back(trim_copy(line));
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return lines;
}

inline std::string validate_extract(const std::string& raw) {
  std::string text = trim_copy(raw);
  if (text == kExtractSentinel) return text;
  auto lines = nonblank_lines(text);
  if (lines.empty()) throw ExtractFormatViolation("empty extract");
  if (lines.size() > 5)
    throw ExtractFormatViolation("extract has " + std::to_string(lines.size()) +
                                 " lines, at most 5 allowed");
  if (!valid_extract_date_line(lines[0]))
    throw ExtractFormatViolation("first line must be \"Note Date: <YYYY-MM-DD or Unknown>\"");
  return text;
}

struct ValidatedSummary {
  std::string body;
  StructuredSummary structured;
};

inline ValidatedSummary validate_summary_text(const std::string& raw) {
  std::string body = trim_copy(raw);
  auto verdict = enforce_character_limit(body);
  if (!verdict.ok) throw CharacterLimitViolation(verdict.count);
  try {
    StructuredSummary structured = parse_summary_sections(body);
    return ValidatedSummary{body, structured};
  } catch (const std::exception& e) {
    throw SectionParseFailure(e.what());
  }
}

inline std::string correction_for(const std::exception& failure) {
  if (auto* limit = dynamic_cast<const CharacterLimitViolation*>(&failure)) {
    return "The summary is " + std::to_string(limit->count) +
           " characters including spaces, over the 999-character limit. Regenerate the summary "
           "in the same format using 999 characters or less.";
  }
  return std::string("The summary format is invalid: ") + failure.what() +
         ". Regenerate using exactly the three headings \"ID:\", \"Biomarkers/NGS:\" and "
         "\"Prior therapy:\", one category per line with one blank line between categories.";
}

}  // namespace strategy_detail

// Per-note extraction used by the multi-step pipeline. Output is the exact
// sentinel or at most five lines starting with a well-formed date line.
inline NoteExtract extract_note_facts(const ClinicalNote& note, llm::Gateway& gateway,
                                      const StrategyConfig& config,
                                      const PromptLibrary& prompts = default_prompts(),
                                      std::vector<std::string>* digests = nullptr) {
  if (note.text.empty()) throw std::invalid_argument("note text must be nonempty");
  llm::ChatRequest request;
  request.model_id = config.model_id;
  request.temperature = 0.0;
  request.messages.push_back(
      llm::ChatMessage::user(prompts.render("multistep_extract", {{"note", strategy_detail::format_note(note)}})));

  for (int attempt = 0; attempt <= config.max_regen_attempts; ++attempt) {
    auto completion = gateway.complete(request);
    if (digests) digests->push_back(completion.request_digest);
    try {
      std::string text = strategy_detail::validate_extract(completion.response.content);
      return NoteExtract{text, text == kExtractSentinel};
    } catch (const ExtractFormatViolation& violation) {
      if (attempt == config.max_regen_attempts) throw;
      request.messages.push_back(llm::ChatMessage::assistant(completion.response.content));
      request.messages.push_back(llm::ChatMessage::user(
          std::string("Your previous reply was invalid: ") + violation.what() +
          ". Reply with at most 5 lines in the required format, or exactly \"" + kExtractSentinel +
          "\"."));
    }
  }
  throw ExtractFormatViolation("unreachable");
}

// ---------------------------------------------------------------------------
// Multi-agent engine

class MultiAgentEngine {
 public:
  MultiAgentEngine(const StrategyConfig& config, std::string case_id, std::string patient_id,
                   dates::Date as_of, llm::Gateway& gateway, const ChartStore& store,
                   const PromptLibrary& prompts)
      : config_(config),
        case_id_(std::move(case_id)),
        patient_id_(std::move(patient_id)),
        as_of_(as_of),
        gateway_(gateway),
        store_(store),
        prompts_(prompts),
        high_autonomy_(config.strategy == GenerationMethod::MultiAgentHigh),
        roster_(agent_roster(high_autonomy_)),
        workspace_(case_id_ + ":" + to_string(config.strategy)) {}

  SummaryArtifact run() {
    run_agent(roster_.data_loader, "Load patient data for patient ID: " + patient_id_ + ".");
    run_curation();
    run_agent(roster_.summarizer,
              "Generate the tumor board summary for patient ID: " + patient_id_ +
                  ". The tumor board date is " + dates::format_date(as_of_) + ".");
    if (!artifact_)
      throw SummaryNotStored("summarization agent finished without calling store_summary");
    artifact_->transcript_refs = digests_;
    return *artifact_;
  }

  const Workspace& workspace() const { return workspace_; }
  Workspace& workspace() { return workspace_; }
  const std::optional<FilterAudit>& filter_audit() const { return filter_audit_; }

 private:
  static nlohmann::json tool_schemas(const AgentSpec& agent) {
    nlohmann::json tools = nlohmann::json::array();
    for (const auto& name : agent.allowed_tools)
      tools.push_back(nlohmann::json{{"type", "function"}, {"function", {{"name", name}}}});
    return tools;
  }

  std::string run_agent(const AgentSpec& agent, const std::string& task) {
    llm::ChatRequest request;
    request.model_id = config_.model_id;
    request.temperature = 0.0;
    request.tools = tool_schemas(agent);
    request.messages.push_back(llm::ChatMessage::system(prompts_.get(agent.system_prompt_asset).text));
    request.messages.push_back(llm::ChatMessage::user(task));

    for (int step = 0; step < config_.max_agent_steps; ++step) {
      auto completion = gateway_.complete(request);
      digests_.push_back(completion.request_digest);
      const auto& response = completion.response;
      if (response.tool_calls.empty()) return response.content;

      llm::ChatMessage assistant{llm::Role::Assistant, response.content, response.tool_calls, {}, {}};
      request.messages.push_back(assistant);
      for (const auto& call : response.tool_calls) {
        if (!agent.allowed_tools.count(call.name)) {
          workspace_.log(agent.name, call.name, call.arguments, false, "permission denied");
          throw ToolPermissionViolation(agent.name, call.name);
        }
        std::string result = dispatch_tool(agent, call);
        request.messages.push_back(llm::ChatMessage::tool_result(call.id, call.name, result));
      }
    }
    throw AgentLoopOverrun("agent " + agent.name + " exceeded " +
                           std::to_string(config_.max_agent_steps) + " steps");
  }

  std::string dispatch_tool(const AgentSpec& agent, const llm::ToolCall& call) {
    if (call.name == "FhirAgent") return tool_fhir_handoff(agent, call);
    if (call.name == "FhirOrchestratorPlugin.load_patient_data") return tool_load_patient_data(agent, call);
    if (call.name == "workspace.filter_items") return tool_filter_items(agent, call);
    if (call.name == "workspace.load_items") return tool_load_items(agent, call);
    if (call.name == "store_summary") return tool_store_summary(agent, call);
    workspace_.log(agent.name, call.name, call.arguments, false, "unknown tool");
    throw ToolPermissionViolation(agent.name, call.name);
  }

  std::string tool_fhir_handoff(const AgentSpec& agent, const llm::ToolCall& call) {
    workspace_.log(agent.name, call.name, call.arguments, true, "handoff to FHIR agent");
    std::string pid = call.arguments.value("patient_id", patient_id_);
    if (!store_.has_patient(pid)) return "Patient " + pid + " was not found.";
    return run_agent(roster_.fhir, "Load patient data for patient ID: " + pid +
                                       ". The tumor board date is " + dates::format_date(as_of_) + ".");
  }

  std::string tool_load_patient_data(const AgentSpec& agent, const llm::ToolCall& call) {
    int cap = high_autonomy_ ? config_.max_retrievals : 1;
    if (retrievals_ + 1 > cap) {
      workspace_.log(agent.name, call.name, call.arguments, true, "budget exceeded");
      throw RetrievalBudgetExceeded("retrieval budget of " + std::to_string(cap) +
                                    " exceeded for " + to_string(config_.strategy));
    }
    ++retrievals_;

    // Low autonomy runs the fixed window no matter what the model asked for;
    // high autonomy honors the request clamped into the configured bounds.
    int lookback = config_.lookback_days;
    if (high_autonomy_) {
      lookback = call.arguments.value("lookback_days", config_.lookback_days);
      lookback = std::clamp(lookback, config_.min_lookback_days, config_.max_lookback_days);
    }

    auto result = store_.retrieve_notes(
        NoteQuery{patient_id_, as_of_, lookback, {"clinical-note"}});
    if (workspace_.items("Demographics").empty()) {
      const auto& d = store_.chart(patient_id_).demographics;
      workspace_.put_item("Demographics",
                          WorkspaceItem{"demographics", as_of_.start_of_day(),
                                        d.last_name + ", " + std::to_string(d.age) + d.sex});
    }
    std::set<std::string> present;
    for (const auto& item : workspace_.items("PatientData")) present.insert(item.item_id);
    for (const auto& note : result.notes) {
      if (!present.count(note.note_id))
        workspace_.put_item("PatientData", WorkspaceItem{note.note_id, note.timestamp, note.text});
    }
    workspace_.log(agent.name, call.name,
                   nlohmann::json{{"patient_id", patient_id_}, {"lookback_days", lookback}}, true,
                   "retrieved " + std::to_string(result.notes.size()) + " notes (lookback " +
                       std::to_string(lookback) + ")");
    return "Retrieved " + std::to_string(result.notes.size()) + " records from the last " +
           std::to_string(lookback) + " days. Total records available: " +
           std::to_string(result.total_count) + ".";
  }

  static nlohmann::json items_listing(const std::vector<WorkspaceItem>& items) {
    std::vector<WorkspaceItem> sorted = items;
    std::sort(sorted.begin(), sorted.end(), [](const WorkspaceItem& a, const WorkspaceItem& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.item_id < b.item_id;
    });
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& item : sorted) {
      arr.push_back(nlohmann::json{{"id", item.item_id},
                                   {"date", dates::format_timestamp(item.timestamp)},
                                   {"text", item.text}});
    }
    return arr;
  }

  std::string tool_filter_items(const AgentSpec& agent, const llm::ToolCall& call) {
    std::string folder = call.arguments.value("folder", std::string{"PatientData"});
    std::vector<std::string> before;
    for (const auto& item : workspace_.items(folder)) before.push_back(item.item_id);

    FilterAudit audit;
    audit.criteria_summary = call.arguments.value("criteria_summary", std::string{});
    std::set<std::string> removed_ids;
    if (call.arguments.contains("remove")) {
      for (const auto& r : call.arguments["remove"]) {
        std::string id = r.at("item_id").get<std::string>();
        if (std::find(before.begin(), before.end(), id) == before.end()) continue;
        removed_ids.insert(id);
        audit.removed.emplace_back(id, r.value("rationale", std::string{}));
      }
    }
    workspace_.remove_items(folder, removed_ids);
    for (const auto& id : before)
      if (!removed_ids.count(id)) audit.kept.push_back(id);

    workspace_.log(agent.name, call.name, call.arguments, true,
                   "kept " + std::to_string(audit.kept.size()) + ", removed " +
                       std::to_string(audit.removed.size()));
    filter_audit_ = audit;
    nlohmann::json removed = nlohmann::json::array();
    for (const auto& [id, rationale] : audit.removed)
      removed.push_back(nlohmann::json{{"item_id", id}, {"rationale", rationale}});
    return nlohmann::json{{"kept", audit.kept},
                          {"removed", removed},
                          {"criteria_summary", audit.criteria_summary}}
        .dump(2);
  }

  std::string tool_load_items(const AgentSpec& agent, const llm::ToolCall& call) {
    std::vector<std::string> folders;
    if (call.arguments.contains("folders"))
      for (const auto& f : call.arguments["folders"]) folders.push_back(f.get<std::string>());
    if (folders.empty()) folders = {"Demographics", "PatientData"};
    nlohmann::json out;
    std::size_t total = 0;
    for (const auto& f : folders) {
      out[f] = items_listing(workspace_.items(f));
      total += workspace_.items(f).size();
    }
    workspace_.log(agent.name, call.name, call.arguments, true,
                   "loaded " + std::to_string(total) + " items");
    return out.dump(2);
  }

  std::string tool_store_summary(const AgentSpec& agent, const llm::ToolCall& call) {
    std::string summary = call.arguments.value("summary", std::string{});
    try {
      auto validated = strategy_detail::validate_summary_text(summary);
      SummaryArtifact artifact;
      artifact.case_id = case_id_;
      artifact.method = config_.strategy;
      artifact.body = validated.body;
      artifact.structured = validated.structured;
      artifact.created_at = dates::format_timestamp(as_of_.start_of_day());
      if (call.arguments.contains("citations")) {
        for (const auto& c : call.arguments["citations"]) {
          std::string note_id = c.value("note_id", std::string{});
          std::string snippet = c.value("snippet", std::string{});
          std::string note_text;
          for (const auto& item : workspace_.items("PatientData"))
            if (item.item_id == note_id) note_text = item.text;
          artifact.citations.push_back(make_citation(note_id, snippet, note_text));
        }
      }
      artifact_ = std::move(artifact);
      workspace_.log(agent.name, call.name,
                     nlohmann::json{{"artifact_name", call.arguments.value("artifact_name", std::string{})},
                                    {"citations", artifact_->citations.size()}},
                     true, "summary accepted");
      return "Summary stored as " + std::string(kArtifactName) + ".";
    } catch (const std::exception& failure) {
      if (store_failures_ >= config_.max_regen_attempts) throw;
      ++store_failures_;
      workspace_.log(agent.name, call.name, nlohmann::json{{"rejected", true}}, true,
                     std::string("summary rejected: ") + failure.what());
      return "ERROR: " + strategy_detail::correction_for(failure) +
             " Then call store_summary again.";
    }
  }

  void run_curation() {
    const auto& items = workspace_.items("PatientData");
    if (items.empty()) {
      filter_audit_ = FilterAudit{};
      return;
    }
    run_agent(roster_.curator,
              "Process the clinical notes in the workspace folder \"PatientData\" in "
              "chronological order. Current items:\n\n" +
                  items_listing(items).dump(2) +
                  "\n\nUse workspace.filter_items to remove notes that are not relevant, then "
                  "report what was kept and deleted.");
  }

  const StrategyConfig& config_;
  std::string case_id_;
  std::string patient_id_;
  dates::Date as_of_;
  llm::Gateway& gateway_;
  const ChartStore& store_;
  const PromptLibrary& prompts_;
  bool high_autonomy_;
  AgentRoster roster_;
  Workspace workspace_;
  std::vector<std::string> digests_;
  int retrievals_ = 0;
  int store_failures_ = 0;
  std::optional<SummaryArtifact> artifact_;
  std::optional<FilterAudit> filter_audit_;
};

// Standalone curation step against an existing workspace (the engine uses the
// same tool path internally). The permission check runs before any model call.
inline FilterAudit filter_workspace(Workspace& workspace, const std::string& folder,
                                    const AgentSpec& agent, llm::Gateway& gateway,
                                    const StrategyConfig& config,
                                    const PromptLibrary& prompts = default_prompts(),
                                    std::vector<std::string>* digests = nullptr) {
  if (!agent.allowed_tools.count("workspace.filter_items")) {
    workspace.log(agent.name, "workspace.filter_items", nlohmann::json{{"folder", folder}}, false,
                  "permission denied");
    throw ToolPermissionViolation(agent.name, "workspace.filter_items");
  }
  const auto& items = workspace.items(folder);
  if (items.empty()) return FilterAudit{};

  nlohmann::json listing = nlohmann::json::array();
  std::vector<WorkspaceItem> sorted = items;
  std::sort(sorted.begin(), sorted.end(), [](const WorkspaceItem& a, const WorkspaceItem& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.item_id < b.item_id;
  });
  for (const auto& item : sorted)
    listing.push_back(nlohmann::json{{"id", item.item_id},
                                     {"date", dates::format_timestamp(item.timestamp)},
                                     {"text", item.text}});

  llm::ChatRequest request;
  request.model_id = config.model_id;
  request.temperature = 0.0;
  request.tools = nlohmann::json::array(
      {nlohmann::json{{"type", "function"}, {"function", {{"name", "workspace.filter_items"}}}}});
  request.messages.push_back(llm::ChatMessage::system(prompts.get(agent.system_prompt_asset).text));
  request.messages.push_back(llm::ChatMessage::user(
      "Process the clinical notes in the workspace folder \"" + folder +
      "\" in chronological order. Current items:\n\n" + listing.dump(2) +
      "\n\nUse workspace.filter_items to remove notes that are not relevant, then report what "
      "was kept and deleted."));

  std::optional<FilterAudit> audit;
  for (int step = 0; step < config.max_agent_steps; ++step) {
    auto completion = gateway.complete(request);
    if (digests) digests->push_back(completion.request_digest);
    if (completion.response.tool_calls.empty()) break;
    request.messages.push_back(
        llm::ChatMessage{llm::Role::Assistant, completion.response.content,
                         completion.response.tool_calls, {}, {}});
    for (const auto& call : completion.response.tool_calls) {
      if (call.name != "workspace.filter_items") throw ToolPermissionViolation(agent.name, call.name);
      std::vector<std::string> before;
      for (const auto& item : workspace.items(folder)) before.push_back(item.item_id);
      FilterAudit a;
      a.criteria_summary = call.arguments.value("criteria_summary", std::string{});
      std::set<std::string> removed_ids;
      if (call.arguments.contains("remove")) {
        for (const auto& r : call.arguments["remove"]) {
          std::string id = r.at("item_id").get<std::string>();
          if (std::find(before.begin(), before.end(), id) == before.end()) continue;
          removed_ids.insert(id);
          a.removed.emplace_back(id, r.value("rationale", std::string{}));
        }
      }
      workspace.remove_items(folder, removed_ids);
      for (const auto& id : before)
        if (!removed_ids.count(id)) a.kept.push_back(id);
      workspace.log(agent.name, call.name, call.arguments, true,
                    "kept " + std::to_string(a.kept.size()) + ", removed " +
                        std::to_string(a.removed.size()));
      audit = a;
      nlohmann::json removed = nlohmann::json::array();
      for (const auto& [id, rationale] : a.removed)
        removed.push_back(nlohmann::json{{"item_id", id}, {"rationale", rationale}});
      request.messages.push_back(llm::ChatMessage::tool_result(
          call.id, call.name,
          nlohmann::json{{"kept", a.kept}, {"removed", removed}}.dump(2)));
    }
  }
  if (!audit) throw AgentLoopOverrun("curator never called workspace.filter_items");
  return *audit;
}

namespace strategy_detail {

// One-call generation with the bounded corrective-regeneration loop shared by
// the single-note, single-step and synthesis paths.
inline ValidatedSummary complete_summary(llm::Gateway& gateway, const StrategyConfig& config,
                                         const std::string& prompt,
                                         std::vector<std::string>& digests) {
  llm::ChatRequest request;
  request.model_id = config.model_id;
  request.temperature = 0.0;
  request.messages.push_back(llm::ChatMessage::user(prompt));
  for (int attempt = 0; attempt <= config.max_regen_attempts; ++attempt) {
    auto completion = gateway.complete(request);
    digests.push_back(completion.request_digest);
    try {
      return validate_summary_text(completion.response.content);
    } catch (const std::exception& failure) {
      if (attempt == config.max_regen_attempts) throw;
      request.messages.push_back(llm::ChatMessage::assistant(completion.response.content));
      request.messages.push_back(llm::ChatMessage::user(correction_for(failure)));
    }
  }
  throw SectionParseFailure("unreachable");
}

}  // namespace strategy_detail

inline StrategyRun run_strategy(const StrategyConfig& config, const std::string& case_id,
                                const std::string& patient_id, dates::Date as_of,
                                llm::Gateway& gateway, const ChartStore& store,
                                const SummaryStorage* storage = nullptr,
                                const PromptLibrary& prompts = default_prompts()) {
  if (!is_generatable(config.strategy))
    throw std::invalid_argument(std::string(to_string(config.strategy)) +
                                " is an ingest-only baseline, not a pipeline");
  if (!store.has_patient(patient_id)) throw PatientNotFound(patient_id);

  StrategyRun run;
  run.extras["strategy_config"] = config.snapshot(prompts);
  std::vector<std::string> digests;

  auto window_notes = [&]() {
    auto result = store.retrieve_notes(
        NoteQuery{patient_id, as_of, config.lookback_days, {"clinical-note"}});
    if (result.notes.empty())
      throw NoNotesInWindow("no clinical notes in the " + std::to_string(config.lookback_days) +
                            "-day window before " + dates::format_date(as_of));
    return result.notes;
  };

  auto finish = [&](strategy_detail::ValidatedSummary validated,
                    std::vector<Citation> citations) {
    SummaryArtifact artifact;
    artifact.case_id = case_id;
    artifact.method = config.strategy;
    artifact.body = validated.body;
    artifact.structured = validated.structured;
    artifact.citations = std::move(citations);
    artifact.transcript_refs = digests;
    artifact.created_at = dates::format_timestamp(as_of.start_of_day());
    run.artifact = std::move(artifact);
  };

  switch (config.strategy) {
    case GenerationMethod::SingleNote: {
      ClinicalNote note = store.most_recent_note(patient_id, as_of, "oncology");
      std::string prompt = prompts.render(
          "single_note_task", {{"notes", strategy_detail::format_note(note)}});
      finish(strategy_detail::complete_summary(gateway, config, prompt, digests), {});
      break;
    }
    case GenerationMethod::SingleStep: {
      auto notes = window_notes();
      std::string joined;
      for (const auto& note : notes) {
        if (!joined.empty()) joined += "\n\n";
        joined += strategy_detail::format_note(note);
      }
      std::string prompt = prompts.render("single_step_task", {{"notes", joined}});
      if (unicode::code_point_count(prompt) > config.max_prompt_code_points)
        throw NoteSetTooLarge("concatenated notes exceed the prompt budget (" +
                              std::to_string(unicode::code_point_count(prompt)) + " code points)");
      finish(strategy_detail::complete_summary(gateway, config, prompt, digests), {});
      break;
    }
    case GenerationMethod::MultiStep: {
      auto notes = window_notes();
      std::string joined;
      for (const auto& note : notes) {
        NoteExtract extract =
            note.text.empty()
                ? NoteExtract{kExtractSentinel, true}
                : extract_note_facts(note, gateway, config, prompts, &digests);
        if (!joined.empty()) joined += "\n\n";
        joined += extract.text;
      }
      std::string prompt =
          prompts.render("multistep_synthesis", {{"concatenated_summaries", joined}});
      if (unicode::code_point_count(prompt) > config.max_prompt_code_points)
        throw NoteSetTooLarge("concatenated extracts exceed the prompt budget");
      finish(strategy_detail::complete_summary(gateway, config, prompt, digests), {});
      break;
    }
    case GenerationMethod::MultiAgentLow:
    case GenerationMethod::MultiAgentHigh: {
      MultiAgentEngine engine(config, case_id, patient_id, as_of, gateway, store, prompts);
      SummaryArtifact artifact = engine.run();
      run.extras["audit"] = engine.workspace().audit_json();
      if (engine.filter_audit()) {
        nlohmann::json removed = nlohmann::json::array();
        for (const auto& [id, rationale] : engine.filter_audit()->removed)
          removed.push_back(nlohmann::json{{"item_id", id}, {"rationale", rationale}});
        run.extras["filter_audit"] = nlohmann::json{
            {"kept", engine.filter_audit()->kept},
            {"removed", removed},
            {"criteria_summary", engine.filter_audit()->criteria_summary}};
      }
      run.artifact = std::move(artifact);
      break;
    }
    default:
      throw std::logic_error("unhandled strategy");
  }

  if (storage != nullptr) run.record_id = store_summary(run.artifact, *storage, run.extras);
  return run;
}

}  // namespace tumorboard
