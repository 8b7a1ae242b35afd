#pragma once

// Ephemeral per-run workspace: named folders of timestamped text items plus
// an ordered audit log of every attempted tool call. Agent tool permissions
// are declared per agent and enforced before any tool executes.

#include <json.hpp>

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tumorboard/util/dates.hpp"

namespace tumorboard {

struct WorkspaceItem {
  std::string item_id;
  dates::Timestamp timestamp;
  std::string text;
};

struct AuditRecord {
  int seq = 0;
  std::string agent;
  std::string tool;
  nlohmann::json arguments;
  bool allowed = true;
  std::string note;  // short outcome, e.g. "retrieved 4 notes (lookback 180)"
};

struct ToolPermissionViolation : std::runtime_error {
  ToolPermissionViolation(const std::string& agent_, const std::string& tool_)
      : std::runtime_error("agent " + agent_ + " is not permitted to call tool " + tool_),
        agent(agent_),
        tool(tool_) {}
  std::string agent;
  std::string tool;
};

struct FilterAudit {
  std::vector<std::string> kept;
  std::vector<std::pair<std::string, std::string>> removed;  // (item_id, rationale)
  std::string criteria_summary;
};

class Workspace {
 public:
  explicit Workspace(std::string run_id) : run_id_(std::move(run_id)) {}

  const std::string& run_id() const { return run_id_; }

  void put_item(const std::string& folder, WorkspaceItem item) {
    folders_[folder].push_back(std::move(item));
  }

  bool has_folder(const std::string& folder) const { return folders_.count(folder) > 0; }

  const std::vector<WorkspaceItem>& items(const std::string& folder) const {
    static const std::vector<WorkspaceItem> empty;
    auto it = folders_.find(folder);
    return it == folders_.end() ? empty : it->second;
  }

  // Removes the listed items in place; returns how many were actually present.
  std::size_t remove_items(const std::string& folder, const std::set<std::string>& ids) {
    auto it = folders_.find(folder);
    if (it == folders_.end()) return 0;
    auto& items = it->second;
    std::size_t before = items.size();
    items.erase(std::remove_if(items.begin(), items.end(),
                               [&](const WorkspaceItem& item) { return ids.count(item.item_id); }),
                items.end());
    return before - items.size();
  }

  void log(const std::string& agent, const std::string& tool, nlohmann::json arguments,
           bool allowed, std::string note) {
    audit_.push_back(AuditRecord{static_cast<int>(audit_.size()) + 1, agent, tool,
                                 std::move(arguments), allowed, std::move(note)});
  }

  const std::vector<AuditRecord>& audit_log() const { return audit_; }

  nlohmann::json audit_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& rec : audit_) {
      arr.push_back(nlohmann::json{{"seq", rec.seq},
                                   {"agent", rec.agent},
                                   {"tool", rec.tool},
                                   {"arguments", rec.arguments},
                                   {"allowed", rec.allowed},
                                   {"note", rec.note}});
    }
    return arr;
  }

 private:
  std::string run_id_;
  std::map<std::string, std::vector<WorkspaceItem>> folders_;
  std::vector<AuditRecord> audit_;
};

struct AgentSpec {
  std::string name;                  // DataLoader | Fhir | Curator | Summarizer
  std::string system_prompt_asset;   // prompt library id
  std::set<std::string> allowed_tools;
};

struct AgentRoster {
  AgentSpec data_loader;
  AgentSpec fhir;
  AgentSpec curator;
  AgentSpec summarizer;
};

// Tool permissions mirror the deployed pipeline's per-agent grants: retrieval
// handoff, FHIR retrieval, workspace filtering, workspace read + persistence.
inline AgentRoster agent_roster(bool high_autonomy) {
  const char* suffix = high_autonomy ? "_high" : "_low";
  AgentRoster roster;
  roster.data_loader = AgentSpec{"DataLoader", "agent_data_loader", {"FhirAgent"}};
  roster.fhir = AgentSpec{"Fhir", std::string("agent_fhir") + suffix,
                          {"FhirOrchestratorPlugin.load_patient_data"}};
  roster.curator = AgentSpec{"Curator", std::string("agent_curator") + suffix,
                             {"workspace.filter_items"}};
  roster.summarizer = AgentSpec{"Summarizer", std::string("agent_summarizer") + suffix,
                                {"workspace.load_items", "store_summary"}};
  return roster;
}

}  // namespace tumorboard
