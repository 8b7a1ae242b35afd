#pragma once

// Rubric fact scoring with a judge model: one standardized prompt per
// attribute, a strict response schema (one record per attribute id, label and
// error-type consistency), bounded re-asks on violations, and aggregation at
// the highest granularity.

#include <json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tumorboard/core/rubric.hpp"
#include "tumorboard/core/types.hpp"
#include "tumorboard/llm/gateway.hpp"
#include "tumorboard/orchestrate/prompts.hpp"

namespace tumorboard {

enum class Entailment { Yes, Partial, No };
enum class ErrorType { Missing, Incorrect, Ambiguous, Other };

inline const char* to_string(Entailment e) {
  switch (e) {
    case Entailment::Yes: return "Yes";
    case Entailment::Partial: return "Partial";
    case Entailment::No: return "No";
  }
  throw std::logic_error("unknown entailment");
}

inline Entailment entailment_from_string(const std::string& s) {
  if (s == "Yes") return Entailment::Yes;
  if (s == "Partial") return Entailment::Partial;
  if (s == "No") return Entailment::No;
  throw std::invalid_argument("unknown entailment label: " + s);
}

inline const char* to_string(ErrorType e) {
  switch (e) {
    case ErrorType::Missing: return "Missing";
    case ErrorType::Incorrect: return "Incorrect";
    case ErrorType::Ambiguous: return "Ambiguous";
    case ErrorType::Other: return "Other";
  }
  throw std::logic_error("unknown error type");
}

inline ErrorType error_type_from_string(const std::string& s) {
  if (s == "Missing") return ErrorType::Missing;
  if (s == "Incorrect") return ErrorType::Incorrect;
  if (s == "Ambiguous") return ErrorType::Ambiguous;
  if (s == "Other") return ErrorType::Other;
  throw std::invalid_argument("unknown error type: " + s);
}

// One judge verdict for one attribute or subattribute id.
struct EntailmentRecord {
  std::string attribute_id;
  Entailment entailment = Entailment::No;
  std::optional<ErrorType> error_type;  // absent iff entailment == Yes
};

struct JudgeSchemaViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingRecords : std::runtime_error {
  explicit MissingRecords(std::vector<std::string> ids_)
      : std::runtime_error("records missing for rubric ids: " + join(ids_)), ids(std::move(ids_)) {}
  std::vector<std::string> ids;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += ", ";
      out += s;
    }
    return out;
  }
};

struct TypeScore {
  int n_items = 0;
  int n_fully = 0;
  int n_fully_or_partial = 0;
};

struct FactScore {
  std::string case_id;
  GenerationMethod method = GenerationMethod::SingleNote;
  int n_items = 0;
  double fully_present = 0;
  double fully_or_partial = 0;
  std::map<std::string, TypeScore> by_type;
};

// JSON text for the judge prompt: the attribute object with subattributes as
// a nested array or null.
inline std::string serialize_attribute(const Attribute& attr) {
  return attribute_to_json(attr).dump(2);
}

struct JudgeConfig {
  std::string model_id = "judge-model";
  int max_reasks = 2;
  llm::ReasoningEffort reasoning_effort = llm::ReasoningEffort::Medium;
};

namespace judge_detail {

// Accepts a bare JSON array or one wrapped in a code fence.
inline nlohmann::json parse_array_reply(const std::string& content) {
  std::string body = content;
  auto fence = body.find("```");
  if (fence != std::string::npos) {
    auto start = body.find('\n', fence);
    auto end = body.rfind("```");
    if (start != std::string::npos && end != std::string::npos && end > start)
      body = body.substr(start + 1, end - start - 1);
  }
  auto first = body.find('[');
  auto last = body.rfind(']');
  if (first == std::string::npos || last == std::string::npos || last < first)
    throw JudgeSchemaViolation("response does not contain a JSON array");
  nlohmann::json j = nlohmann::json::parse(body.substr(first, last - first + 1), nullptr, false);
  if (j.is_discarded() || !j.is_array())
    throw JudgeSchemaViolation("response is not valid JSON array");
  return j;
}

inline std::vector<EntailmentRecord> validate_records(const nlohmann::json& arr,
                                                      const std::vector<std::string>& expected_ids) {
  if (arr.size() != expected_ids.size())
    throw JudgeSchemaViolation("expected exactly " + std::to_string(expected_ids.size()) +
                               " records (attribute plus subattributes), got " +
                               std::to_string(arr.size()));
  std::set<std::string> expected(expected_ids.begin(), expected_ids.end());
  std::set<std::string> seen;
  std::vector<EntailmentRecord> records;
  for (const auto& item : arr) {
    if (!item.is_object() || !item.contains("attribute_id") || !item.contains("entailment"))
      throw JudgeSchemaViolation("each record needs attribute_id and entailment");
    EntailmentRecord rec;
    rec.attribute_id = item["attribute_id"].get<std::string>();
    if (!expected.count(rec.attribute_id))
      throw JudgeSchemaViolation("unexpected attribute_id: " + rec.attribute_id);
    if (!seen.insert(rec.attribute_id).second)
      throw JudgeSchemaViolation("duplicate attribute_id: " + rec.attribute_id);
    try {
      rec.entailment = entailment_from_string(item["entailment"].get<std::string>());
    } catch (const std::exception& e) {
      throw JudgeSchemaViolation(e.what());
    }
    bool has_error = item.contains("error_type") && !item["error_type"].is_null();
    if (rec.entailment == Entailment::Yes) {
      if (has_error)
        throw JudgeSchemaViolation("error_type must be null when entailment is \"Yes\"");
    } else {
      if (!has_error)
        throw JudgeSchemaViolation("error_type required when entailment is not \"Yes\"");
      try {
        rec.error_type = error_type_from_string(item["error_type"].get<std::string>());
      } catch (const std::exception& e) {
        throw JudgeSchemaViolation(e.what());
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace judge_detail

struct JudgeOutcome {
  std::vector<EntailmentRecord> records;
  std::vector<std::string> transcript_digests;
};

inline JudgeOutcome judge_attribute_with_digests(const Attribute& attr,
                                                 const std::string& summary_text,
                                                 llm::Gateway& gateway,
                                                 const JudgeConfig& config = {},
                                                 const PromptLibrary& prompts = default_prompts()) {
  if (summary_text.empty()) throw std::invalid_argument("summary text must be nonempty");

  std::vector<std::string> expected_ids{attr.attribute_id};
  for (const auto& sub : attr.subattributes) expected_ids.push_back(sub.attribute_id);

  std::string prompt = prompts.render("judge_entailment", {{"attribute_json", serialize_attribute(attr)},
                                                           {"patient_summary", summary_text}});
  llm::ChatRequest request;
  request.model_id = config.model_id;
  request.reasoning_effort = config.reasoning_effort;
  request.messages.push_back(llm::ChatMessage::user(prompt));

  JudgeOutcome outcome;
  for (int attempt = 0; attempt <= config.max_reasks; ++attempt) {
    auto completion = gateway.complete(request);
    outcome.transcript_digests.push_back(completion.request_digest);
    try {
      auto arr = judge_detail::parse_array_reply(completion.response.content);
      outcome.records = judge_detail::validate_records(arr, expected_ids);
      return outcome;
    } catch (const JudgeSchemaViolation& violation) {
      if (attempt == config.max_reasks) throw;
      request.messages.push_back(llm::ChatMessage::assistant(completion.response.content));
      request.messages.push_back(llm::ChatMessage::user(
          std::string("Your previous response was invalid: ") + violation.what() +
          ". Respond with only a JSON array of objects with keys attribute_id, entailment, "
          "error_type."));
    }
  }
  throw JudgeSchemaViolation("unreachable");
}

inline std::vector<EntailmentRecord> judge_attribute(const Attribute& attr,
                                                     const std::string& summary_text,
                                                     llm::Gateway& gateway,
                                                     const JudgeConfig& config = {},
                                                     const PromptLibrary& prompts = default_prompts()) {
  return judge_attribute_with_digests(attr, summary_text, gateway, config, prompts).records;
}

// Aggregation: records must cover every rubric id (parents included); scoring
// restricts to the highest-granularity items, so a parent's own verdict never
// double-counts its children.
inline FactScore score_summary(const Rubric& rubric, const std::vector<EntailmentRecord>& records) {
  std::map<std::string, const EntailmentRecord*> by_id;
  for (const auto& rec : records) by_id[rec.attribute_id] = &rec;

  std::vector<std::string> missing;
  for (const auto& id : all_attribute_ids(rubric))
    if (!by_id.count(id)) missing.push_back(id);
  if (!missing.empty()) throw MissingRecords(std::move(missing));

  FactScore score;
  auto items = items_at_highest_granularity(rubric);
  score.n_items = static_cast<int>(items.size());
  int fully = 0, partial_or_fully = 0;
  for (const auto& item : items) {
    const EntailmentRecord& rec = *by_id.at(item.item_id);
    TypeScore& type = score.by_type[item.attribute_type];
    ++type.n_items;
    if (rec.entailment == Entailment::Yes) {
      ++fully;
      ++type.n_fully;
    }
    if (rec.entailment == Entailment::Yes || rec.entailment == Entailment::Partial) {
      ++partial_or_fully;
      ++type.n_fully_or_partial;
    }
  }
  score.fully_present = score.n_items ? static_cast<double>(fully) / score.n_items : 0.0;
  score.fully_or_partial =
      score.n_items ? static_cast<double>(partial_or_fully) / score.n_items : 0.0;
  return score;
}

}  // namespace tumorboard
