#pragma once

// Run configuration for the command drivers. One JSON file describes the
// chart store, transcript mode, strategy list, case list and output layout;
// CLI flags may override mode, seed and output directory.

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tumorboard/core/types.hpp"
#include "tumorboard/llm/gateway.hpp"
#include "tumorboard/util/dates.hpp"
#include "tumorboard/util/fs.hpp"

namespace tumorboard {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CaseSpec {
  std::string case_id;
  std::string patient_id;
  dates::Date as_of;
};

struct EndpointConfig {
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string auth_header = "Authorization";
  std::string auth_prefix = "Bearer ";
  std::string auth_env = "TB_API_KEY";  // env var holding the secret
};

struct RunConfig {
  std::filesystem::path chart_store;
  std::filesystem::path transcript_dir;
  llm::GatewayMode mode = llm::GatewayMode::Replay;
  std::filesystem::path out_dir = "out";
  std::filesystem::path rubric_dir;
  std::filesystem::path summaries_override;  // default: out_dir/summaries
  std::filesystem::path ratings_csv;
  std::vector<GenerationMethod> strategies;
  GenerationMethod baseline = GenerationMethod::SecureGPT;
  std::vector<CaseSpec> cases;
  std::optional<std::uint64_t> seed;
  std::string generation_model = "generation-model";
  std::string judge_model = "judge-model";
  std::string machine_rater_id = "llm";
  EndpointConfig endpoint;
  int bootstrap_reps = 10000;
  double alpha = 0.05;
  int threads = 1;
  int in_flight_cap = 4;         // gateway concurrency cap (<= 0: unlimited)
  int requests_per_minute = 0;   // live-mode budget (<= 0: unlimited)
  int max_retrievals = 5;
  int min_lookback_days = 30;
  int max_lookback_days = 1095;
  int lookback_days = 180;

  std::filesystem::path summaries_dir() const {
    return summaries_override.empty() ? out_dir / "summaries" : summaries_override;
  }

  std::uint64_t require_seed(const std::string& why) const {
    if (!seed) throw ConfigError("seed is required for " + why);
    return *seed;
  }

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
      c.chart_store = j.value("chart_store", std::string{});
      c.transcript_dir = j.value("transcript_dir", std::string{});
      if (j.contains("mode")) c.mode = llm::mode_from_string(j["mode"].get<std::string>());
      c.out_dir = j.value("out_dir", std::string{"out"});
      c.rubric_dir = j.value("rubric_dir", std::string{});
      c.summaries_override = j.value("summaries_dir", std::string{});
      c.ratings_csv = j.value("ratings_csv", std::string{});
      if (j.contains("strategies"))
        for (const auto& s : j["strategies"])
          c.strategies.push_back(method_from_string(s.get<std::string>()));
      if (j.contains("baseline")) c.baseline = method_from_string(j["baseline"].get<std::string>());
      if (j.contains("cases")) {
        for (const auto& item : j["cases"]) {
          CaseSpec spec;
          spec.patient_id = item.at("patient_id").get<std::string>();
          spec.case_id = item.value("case_id", spec.patient_id);
          spec.as_of = dates::parse_date(item.at("as_of").get<std::string>());
          c.cases.push_back(spec);
        }
      }
      if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
      c.generation_model = j.value("generation_model", c.generation_model);
      c.judge_model = j.value("judge_model", c.judge_model);
      c.machine_rater_id = j.value("machine_rater_id", c.machine_rater_id);
      if (j.contains("endpoint")) {
        const auto& e = j["endpoint"];
        c.endpoint.base_url = e.value("base_url", std::string{});
        c.endpoint.path = e.value("path", c.endpoint.path);
        c.endpoint.auth_header = e.value("auth_header", c.endpoint.auth_header);
        c.endpoint.auth_prefix = e.value("auth_prefix", c.endpoint.auth_prefix);
        c.endpoint.auth_env = e.value("auth_env", c.endpoint.auth_env);
      }
      c.bootstrap_reps = j.value("bootstrap_reps", c.bootstrap_reps);
      c.alpha = j.value("alpha", c.alpha);
      c.threads = j.value("threads", c.threads);
      c.in_flight_cap = j.value("in_flight_cap", c.in_flight_cap);
      c.requests_per_minute = j.value("requests_per_minute", c.requests_per_minute);
      c.max_retrievals = j.value("max_retrievals", c.max_retrievals);
      c.min_lookback_days = j.value("min_lookback_days", c.min_lookback_days);
      c.max_lookback_days = j.value("max_lookback_days", c.max_lookback_days);
      c.lookback_days = j.value("lookback_days", c.lookback_days);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid run config: ") + e.what());
    }
    return c;
  }

  static RunConfig load(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(fs::read_file(path), nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path.string());
    return from_json(j);
  }

  // Secret-free snapshot recorded into run manifests.
  nlohmann::json snapshot() const {
    nlohmann::json cases_json = nlohmann::json::array();
    for (const auto& c : cases)
      cases_json.push_back(nlohmann::json{{"case_id", c.case_id},
                                          {"patient_id", c.patient_id},
                                          {"as_of", dates::format_date(c.as_of)}});
    nlohmann::json strategies_json = nlohmann::json::array();
    for (auto s : strategies) strategies_json.push_back(to_string(s));
    return nlohmann::json{{"mode", llm::to_string(mode)},
                          {"baseline", to_string(baseline)},
                          {"strategies", strategies_json},
                          {"cases", cases_json},
                          {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
                          {"generation_model", generation_model},
                          {"judge_model", judge_model},
                          {"bootstrap_reps", bootstrap_reps},
                          {"alpha", alpha},
                          {"lookback_days", lookback_days},
                          {"max_retrievals", max_retrievals}};
  }
};

}  // namespace tumorboard
