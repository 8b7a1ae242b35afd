#pragma once

// Deterministic fake chat-completion backend for tests. Implements the
// Transport seam, so a record-mode gateway can run every pipeline against it
// and persist transcripts that replay-mode runs then serve. Replies are pure
// functions of the request body: same request, same reply, byte for byte.
//
// The scripted behaviors understand the synthetic chart note layout
// (Patient:/Diagnosis:/Stage:/Biomarkers:/treatment lines) and produce
// format-conformant summaries, extracts, agent tool calls and judge verdicts.

#include <json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tumorboard/llm/gateway.hpp"
#include "tumorboard/util/unicode.hpp"

namespace tbtest {

using nlohmann::json;

// --- chart-fact scraping ------------------------------------------------------

struct TherapyFact {
  std::string date;  // ISO or empty (sorts last)
  std::string desc;
  std::string modality;
};

struct ScrapedFacts {
  std::string patient;    // "ZEPHYRIN, 65M"
  std::string diagnosis;
  std::string stage;
  std::vector<std::string> biomarkers;
  std::vector<TherapyFact> therapy;

  // snippet -> source note id, for citation emission
  std::vector<std::pair<std::string, std::string>> snippets;

  bool empty() const {
    return patient.empty() && diagnosis.empty() && stage.empty() && biomarkers.empty() &&
           therapy.empty();
  }

  void add_snippet(const std::string& note_id, const std::string& snippet) {
    if (note_id.empty() || snippet.empty()) return;
    for (const auto& [existing, _] : snippets)
      if (existing == snippet) return;
    snippets.push_back({snippet, note_id});
  }
};

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    lines.push_back(text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos));
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return lines;
}

inline std::string strip_dot(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  return s;
}

inline std::optional<TherapyFact> parse_therapy_item(const std::string& body,
                                                     const std::string& fallback_date) {
  // "desc (modality, YYYY-MM-DD)" or "desc (modality)"
  auto open = body.rfind('(');
  auto close = body.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
  TherapyFact fact;
  fact.desc = strip_dot(body.substr(0, open));
  while (!fact.desc.empty() && fact.desc.back() == ' ') fact.desc.pop_back();
  std::string inner = body.substr(open + 1, close - open - 1);
  auto comma = inner.find(", ");
  if (comma == std::string::npos) {
    fact.modality = inner;
    fact.date = fallback_date;
  } else {
    fact.modality = inner.substr(0, comma);
    fact.date = inner.substr(comma + 2);
  }
  return fact;
}

inline void add_therapy(ScrapedFacts& facts, TherapyFact fact) {
  for (const auto& t : facts.therapy)
    if (t.desc == fact.desc) return;
  facts.therapy.push_back(std::move(fact));
}

inline void scrape_note(ScrapedFacts& facts, const std::string& note_id, const std::string& text,
                        const std::string& note_date) {
  bool in_history = false;
  bool in_outside = false;
  for (const auto& raw : split_lines(text)) {
    std::string line = raw;
    if (line.rfind("Treatment history:", 0) == 0) { in_history = true; in_outside = false; continue; }
    if (line.rfind("Outside records reviewed:", 0) == 0) { in_outside = true; in_history = false; continue; }
    if (line.rfind("- ", 0) == 0 && (in_history || in_outside)) {
      std::string body = line.substr(2);
      if (in_history) {
        if (auto fact = parse_therapy_item(body, note_date)) {
          facts.add_snippet(note_id, fact->desc);
          add_therapy(facts, *fact);
        }
      } else {
        std::string value = strip_dot(body);
        if (value.rfind("Stage", 0) == 0) {
          facts.stage = value;
        } else if (value.find("TPS") != std::string::npos ||
                   value.find("fusion") != std::string::npos ||
                   value.find("Ex19") != std::string::npos) {
          if (std::find(facts.biomarkers.begin(), facts.biomarkers.end(), value) ==
              facts.biomarkers.end())
            facts.biomarkers.push_back(value);
        } else {
          add_therapy(facts, TherapyFact{"", value, "outside records"});
        }
        facts.add_snippet(note_id, value);
      }
      continue;
    }
    in_history = in_outside = false;
    auto take = [&](const char* prefix) -> std::optional<std::string> {
      std::size_t n = std::string(prefix).size();
      if (line.rfind(prefix, 0) == 0) return strip_dot(line.substr(n));
      return std::nullopt;
    };
    if (auto v = take("Patient: ")) {
      if (facts.patient.empty()) facts.patient = *v;
      facts.add_snippet(note_id, *v);
    } else if (auto v = take("Diagnosis: ")) {
      if (facts.diagnosis.empty()) facts.diagnosis = *v;
      facts.add_snippet(note_id, *v);
    } else if (auto v = take("Stage: ")) {
      facts.stage = *v;  // later notes win
      facts.add_snippet(note_id, *v);
    } else if (auto v = take("Biomarkers: ")) {
      if (std::find(facts.biomarkers.begin(), facts.biomarkers.end(), *v) ==
          facts.biomarkers.end())
        facts.biomarkers.push_back(*v);
      facts.add_snippet(note_id, *v);
    } else if (auto v = take("Performed: ")) {
      if (auto fact = parse_therapy_item(*v, note_date)) {
        facts.add_snippet(note_id, fact->desc);
        add_therapy(facts, *fact);
      }
    }
  }
}

// Formatted note blocks: "--- note <id> (<date>, <specialty>) ---\n<text>"
struct NoteBlock {
  std::string note_id;
  std::string date;
  std::string text;
};

inline std::vector<NoteBlock> parse_note_blocks(const std::string& blob) {
  std::vector<NoteBlock> blocks;
  const std::string marker = "--- note ";
  std::size_t pos = blob.find(marker);
  while (pos != std::string::npos) {
    std::size_t header_end = blob.find(" ---\n", pos);
    if (header_end == std::string::npos) break;
    std::string header = blob.substr(pos + marker.size(), header_end - pos - marker.size());
    NoteBlock block;
    auto paren = header.find(" (");
    block.note_id = paren == std::string::npos ? header : header.substr(0, paren);
    if (paren != std::string::npos) block.date = header.substr(paren + 2, 10);
    std::size_t body_start = header_end + 5;
    std::size_t next = blob.find(marker, body_start);
    block.text = blob.substr(body_start, next == std::string::npos ? std::string::npos
                                                                   : next - body_start);
    blocks.push_back(block);
    pos = next;
  }
  return blocks;
}

inline std::string compose_summary(const ScrapedFacts& facts, std::size_t drop_therapy = 0) {
  std::string last_name = facts.patient.substr(0, facts.patient.find(','));
  std::string age_sex;
  if (auto comma = facts.patient.find(", "); comma != std::string::npos)
    age_sex = facts.patient.substr(comma + 2);

  std::string id_section = "[" + last_name + "]";
  if (!age_sex.empty()) id_section += " " + age_sex;
  if (!facts.diagnosis.empty()) id_section += ", " + facts.diagnosis;
  if (!facts.stage.empty()) id_section += ", " + facts.stage;

  std::string biomarkers;
  for (const auto& b : facts.biomarkers) {
    if (!biomarkers.empty()) biomarkers += "; ";
    biomarkers += b;
  }
  if (biomarkers.empty()) biomarkers = "Unknown";

  std::vector<TherapyFact> therapy = facts.therapy;
  std::stable_sort(therapy.begin(), therapy.end(), [](const TherapyFact& a, const TherapyFact& b) {
    if (a.date.empty() != b.date.empty()) return !a.date.empty();
    return a.date < b.date;
  });
  if (drop_therapy < therapy.size())
    therapy.resize(therapy.size() - drop_therapy);
  else if (drop_therapy > 0)
    therapy.clear();

  std::string prior;
  for (const auto& t : therapy) {
    if (!prior.empty()) prior += "; ";
    prior += t.desc;
    if (!t.date.empty()) prior += " (" + t.modality + ", " + t.date + ")";
  }
  if (prior.empty()) prior = "None documented";

  std::string body = "ID: " + id_section + "\n\nBiomarkers/NGS: " + biomarkers +
                     "\n\nPrior therapy: " + prior;
  // Stay under the limit by shedding therapy detail if a fixture ever grows.
  while (tumorboard::unicode::code_point_count(body) > 999 && !therapy.empty()) {
    therapy.pop_back();
    prior.clear();
    for (const auto& t : therapy) {
      if (!prior.empty()) prior += "; ";
      prior += t.desc;
      if (!t.date.empty()) prior += " (" + t.modality + ", " + t.date + ")";
    }
    if (prior.empty()) prior = "None documented";
    body = "ID: " + id_section + "\n\nBiomarkers/NGS: " + biomarkers + "\n\nPrior therapy: " + prior;
  }
  return body;
}

// --- the scripted transport ----------------------------------------------------

class ScriptedModel : public tumorboard::llm::Transport {
 public:
  tumorboard::llm::TransportReply post(const std::string&,
                                       const std::vector<tumorboard::llm::Header>&,
                                       const std::string& body) override {
    json request = json::parse(body);
    return {200, respond(request).dump(), ""};
  }

  json respond(const json& request) const {
    const json& messages = request.at("messages");
    std::string system = message_content(messages, "system");
    if (system.rfind("You are a DataLoaderAgent", 0) == 0) return data_loader(messages);
    if (system.rfind("You are a FHIR Agent", 0) == 0)
      return fhir_agent(messages, system.find("choose an appropriate lookback window") !=
                                       std::string::npos);
    if (system.rfind("You are a CuratorAgent", 0) == 0) return curator(messages);
    if (system.find("Follow each step exactly") != std::string::npos) return summarizer(messages);

    std::string user = message_content(messages, "user");
    if (user.find("evaluates the entailment status") != std::string::npos) return judge(messages);
    if (user.find("Extract ONLY tumor-board-relevant facts") != std::string::npos)
      return extract(messages);
    if (user.find("Here are the summaries of the patient's most recent notes") != std::string::npos)
      return synthesis(messages);
    if (user.find("Here are the clinical notes for this patient") != std::string::npos)
      return summarize_notes(messages);
    return text_response("I cannot help with that request.");
  }

 private:
  // -- message helpers --

  static std::string message_content(const json& messages, const std::string& role) {
    for (const auto& m : messages)
      if (m.value("role", "") == role && m.contains("content") && m["content"].is_string())
        return m["content"].get<std::string>();
    return {};
  }

  static int count_tool_results(const json& messages, const std::string& name) {
    int n = 0;
    for (const auto& m : messages)
      if (m.value("role", "") == "tool" && m.value("name", "") == name) ++n;
    return n;
  }

  static std::string last_tool_result(const json& messages, const std::string& name) {
    std::string content;
    for (const auto& m : messages)
      if (m.value("role", "") == "tool" && m.value("name", "") == name)
        content = m.value("content", "");
    return content;
  }

  static int count_assistant(const json& messages) {
    int n = 0;
    for (const auto& m : messages)
      if (m.value("role", "") == "assistant") ++n;
    return n;
  }

  static json text_response(const std::string& content) {
    return json{{"choices",
                 json::array({json{{"message", {{"role", "assistant"}, {"content", content}}},
                                   {"finish_reason", "stop"}}})}};
  }

  static json tool_response(const json& messages, const std::string& name, const json& args) {
    json call{{"id", "call_" + std::to_string(messages.size())},
              {"type", "function"},
              {"function", {{"name", name}, {"arguments", args.dump()}}}};
    return json{{"choices", json::array({json{{"message",
                                               {{"role", "assistant"},
                                                {"content", ""},
                                                {"tool_calls", json::array({call})}}},
                                              {"finish_reason", "tool_calls"}}})}};
  }

  static std::string slice_between(const std::string& text, const std::string& begin,
                                   const std::string& end, std::size_t from = 0) {
    auto b = text.find(begin, from);
    if (b == std::string::npos) return {};
    b += begin.size();
    auto e = text.find(end, b);
    if (e == std::string::npos) return text.substr(b);
    return text.substr(b, e - b);
  }

  // -- agent behaviors --

  json data_loader(const json& messages) const {
    if (count_tool_results(messages, "FhirAgent") > 0)
      return text_response(last_tool_result(messages, "FhirAgent"));
    std::string user = message_content(messages, "user");
    std::string pid = strip_dot(slice_between(user, "patient ID: ", "\n"));
    return tool_response(messages, "FhirAgent", json{{"patient_id", pid}});
  }

  static int parse_retrieved_count(const std::string& result) {
    auto pos = result.find("Retrieved ");
    if (pos == std::string::npos) return 0;
    return std::atoi(result.c_str() + pos + 10);
  }

  json fhir_agent(const json& messages, bool high_autonomy) const {
    std::string user = message_content(messages, "user");
    std::string pid = strip_dot(slice_between(user, "patient ID: ", "."));
    int retrievals = count_tool_results(messages, "FhirOrchestratorPlugin.load_patient_data");
    std::string last = last_tool_result(messages, "FhirOrchestratorPlugin.load_patient_data");
    if (!high_autonomy) {
      if (retrievals == 0)
        return tool_response(messages, "FhirOrchestratorPlugin.load_patient_data",
                             json{{"patient_id", pid}, {"lookback_days", 180}});
      return text_response("Total records available: " +
                           std::to_string(parse_retrieved_count(last)) + ".");
    }
    // High autonomy: start narrow, widen once if the first pass looks thin.
    if (retrievals == 0)
      return tool_response(messages, "FhirOrchestratorPlugin.load_patient_data",
                           json{{"patient_id", pid}, {"lookback_days", 30}});
    if (retrievals == 1 && parse_retrieved_count(last) < 4)
      return tool_response(messages, "FhirOrchestratorPlugin.load_patient_data",
                           json{{"patient_id", pid}, {"lookback_days", 365}});
    return text_response("Total records available: " + std::to_string(parse_retrieved_count(last)) +
                         ".");
  }

  json curator(const json& messages) const {
    if (count_tool_results(messages, "workspace.filter_items") > 0) {
      json audit = json::parse(last_tool_result(messages, "workspace.filter_items"));
      return text_response("Kept " + std::to_string(audit["kept"].size()) + " notes; removed " +
                           std::to_string(audit["removed"].size()) +
                           " notes without tumor-board-relevant content.");
    }
    std::string user = message_content(messages, "user");
    std::string listing = slice_between(user, "Current items:\n\n", "\n\nUse workspace");
    json items = json::parse(listing);
    json remove = json::array();
    for (const auto& item : items) {
      if (item.value("text", "").find("Scheduling note") != std::string::npos) {
        remove.push_back(json{{"item_id", item["id"]},
                              {"rationale", "Administrative scheduling note with no clinical "
                                            "content relevant to tumor board."}});
      }
    }
    return tool_response(messages, "workspace.filter_items",
                         json{{"folder", "PatientData"},
                              {"remove", remove},
                              {"criteria_summary",
                               "Kept notes containing demographics, cancer type, staging, "
                               "biomarker, or prior therapy content; removed administrative "
                               "notes."}});
  }

  json summarizer(const json& messages) const {
    if (count_tool_results(messages, "workspace.load_items") == 0)
      return tool_response(messages, "workspace.load_items",
                           json{{"folders", json::array({"Demographics", "PatientData"})}});
    std::string last_store = last_tool_result(messages, "store_summary");
    int stores = count_tool_results(messages, "store_summary");
    if (stores > 0 && last_store.rfind("ERROR:", 0) != 0)
      return text_response("The tumor board summary has been saved.");

    json loaded = json::parse(last_tool_result(messages, "workspace.load_items"));
    ScrapedFacts facts;
    if (loaded.contains("Demographics"))
      for (const auto& item : loaded["Demographics"]) facts.patient = item.value("text", "");
    if (loaded.contains("PatientData")) {
      for (const auto& item : loaded["PatientData"]) {
        scrape_note(facts, item.value("id", ""), item.value("text", ""),
                    item.value("date", "").substr(0, 10));
      }
    }
    std::string body = compose_summary(facts, static_cast<std::size_t>(stores));
    json citations = json::array();
    for (const auto& [snippet, note_id] : facts.snippets) {
      if (body.find(snippet) == std::string::npos) continue;
      citations.push_back(json{{"note_id", note_id}, {"snippet", snippet}});
    }
    return tool_response(messages, "store_summary",
                         json{{"artifact_name", "TumorBoardSummary"},
                              {"summary", body},
                              {"citations", citations}});
  }

  // -- one-call behaviors --

  json summarize_notes(const json& messages) const {
    std::string user = message_content(messages, "user");
    std::string blob = user.substr(user.find("chronological order:"));
    ScrapedFacts facts;
    for (const auto& block : parse_note_blocks(blob))
      scrape_note(facts, block.note_id, block.text, block.date);
    return text_response(compose_summary(facts, static_cast<std::size_t>(count_assistant(messages))));
  }

  json extract(const json& messages) const {
    std::string user = message_content(messages, "user");
    std::string blob = user.substr(user.find("Note\n\n") + 6);
    auto blocks = parse_note_blocks(blob);
    ScrapedFacts facts;
    std::string date = "Unknown";
    if (!blocks.empty()) {
      date = blocks[0].date;
      scrape_note(facts, blocks[0].note_id, blocks[0].text, blocks[0].date);
    }
    if (facts.empty())
      return text_response("Note does not include any relevant information.");

    std::string out = "Note Date: " + date;
    if (!facts.patient.empty() || !facts.diagnosis.empty() || !facts.stage.empty()) {
      out += "\nID: " + facts.patient;
      if (!facts.diagnosis.empty()) out += " - " + facts.diagnosis;
      if (!facts.stage.empty()) out += "; " + facts.stage;
    }
    if (!facts.biomarkers.empty()) {
      out += "\nBiomarkers/NGS: ";
      for (std::size_t i = 0; i < facts.biomarkers.size(); ++i)
        out += (i ? "; " : "") + facts.biomarkers[i];
    }
    if (!facts.therapy.empty()) {
      out += "\nPrior therapy: ";
      for (std::size_t i = 0; i < facts.therapy.size(); ++i) {
        const auto& t = facts.therapy[i];
        out += (i ? "; " : "") + t.desc;
        if (!t.date.empty()) out += " (" + t.modality + ", " + t.date + ")";
      }
    }
    return text_response(out);
  }

  json synthesis(const json& messages) const {
    std::string user = message_content(messages, "user");
    std::string blob = user.substr(user.find("chronological order:"));
    ScrapedFacts facts;
    for (const auto& line : split_lines(blob)) {
      if (line.rfind("ID: ", 0) == 0) {
        std::string rest = line.substr(4);
        auto dash = rest.find(" - ");
        std::string patient = dash == std::string::npos ? rest : rest.substr(0, dash);
        if (facts.patient.empty()) facts.patient = patient;
        if (dash != std::string::npos) {
          std::string tail = rest.substr(dash + 3);
          auto semi = tail.find("; ");
          std::string diagnosis = semi == std::string::npos ? tail : tail.substr(0, semi);
          if (facts.diagnosis.empty()) facts.diagnosis = diagnosis;
          if (semi != std::string::npos) facts.stage = tail.substr(semi + 2);
        }
      } else if (line.rfind("Biomarkers/NGS: ", 0) == 0) {
        std::string value = line.substr(16);
        if (std::find(facts.biomarkers.begin(), facts.biomarkers.end(), value) ==
            facts.biomarkers.end())
          facts.biomarkers.push_back(value);
      } else if (line.rfind("Prior therapy: ", 0) == 0) {
        std::string value = line.substr(15);
        std::size_t pos = 0;
        while (pos < value.size()) {
          auto next = value.find("; ", pos);
          std::string item = value.substr(pos, next == std::string::npos ? std::string::npos
                                                                         : next - pos);
          if (auto fact = parse_therapy_item(item, ""))
            add_therapy(facts, *fact);
          else
            add_therapy(facts, TherapyFact{"", strip_dot(item), ""});
          if (next == std::string::npos) break;
          pos = next + 2;
        }
      }
    }
    return text_response(compose_summary(facts, static_cast<std::size_t>(count_assistant(messages))));
  }

  // -- judge behavior: substring containment verdicts --

  json judge(const json& messages) const {
    std::string user = message_content(messages, "user");
    auto inputs = user.find("Here is the attribute:");
    std::string attr_text = slice_between(user, "```\n", "\n```", inputs);
    auto summary_anchor = user.find("And here is the patient summary:");
    std::string summary = slice_between(user, "```\n", "\n```", summary_anchor);

    json attr = json::parse(attr_text);
    auto contained = [&summary](const std::string& value) {
      return summary.find(value) != std::string::npos;
    };
    json out = json::array();
    if (attr.contains("subattributes") && !attr["subattributes"].is_null() &&
        !attr["subattributes"].empty()) {
      int yes = 0;
      json subs = json::array();
      for (const auto& sub : attr["subattributes"]) {
        bool hit = contained(sub.value("value", ""));
        if (hit) ++yes;
        json rec{{"attribute_id", sub["attribute_id"]},
                 {"entailment", hit ? "Yes" : "No"},
                 {"error_type", hit ? json(nullptr) : json("Missing")}};
        subs.push_back(rec);
      }
      std::string parent_label = yes == static_cast<int>(attr["subattributes"].size())
                                     ? "Yes"
                                     : (yes > 0 ? "Partial" : "No");
      out.push_back(json{{"attribute_id", attr["attribute_id"]},
                         {"entailment", parent_label},
                         {"error_type", parent_label == "Yes" ? json(nullptr) : json("Missing")}});
      for (const auto& s : subs) out.push_back(s);
    } else {
      bool hit = contained(attr.value("value", ""));
      out.push_back(json{{"attribute_id", attr["attribute_id"]},
                         {"entailment", hit ? "Yes" : "No"},
                         {"error_type", hit ? json(nullptr) : json("Missing")}});
    }
    return text_response(out.dump(2));
  }
};

// Stages an exact transcript for a request, for tests that need handcrafted
// (e.g. malformed) model replies.
inline void stage_transcript(const tumorboard::llm::TranscriptStore& store,
                             const tumorboard::llm::ChatRequest& request,
                             const tumorboard::llm::ChatResponse& response) {
  tumorboard::llm::TranscriptRecord rec;
  rec.request_digest = tumorboard::llm::canonical_digest(request);
  rec.request = tumorboard::llm::canonical_request_json(request);
  rec.response = tumorboard::llm::response_to_json(response);
  rec.latency_ms = 0;
  rec.created_at = "2026-01-01T00:00:00Z";
  store.put(rec);
}

}  // namespace tbtest
