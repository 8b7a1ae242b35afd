#pragma once

#include <functional>
#include <memory>
#include <string>

#include "tumorboard/chart/synthetic.hpp"
#include "tumorboard/core/types.hpp"
#include "tumorboard/llm/gateway.hpp"
#include "tumorboard/util/dates.hpp"

namespace tbtest {

// The judge prompt's worked example: a surgical-treatment fact with two
// constituent details.
inline tumorboard::Rubric worked_example_rubric() {
  using tumorboard::Attribute;
  Attribute parent{"4", "Surg_tx", "Resection 2021", "Critical", {}};
  parent.subattributes.push_back(Attribute{"4a", "Surg_tx_attribute", "Resection", "Critical", {}});
  parent.subattributes.push_back(Attribute{"4b", "Surg_tx_attribute", "2021", "Medium", {}});
  return tumorboard::Rubric{"pt-worked", {parent}};
}

inline const char* worked_example_summary() {
  return "Prior therapy: Resection.\n\n"
         "Current treatment: Carboplatin + Pemetrexed + Bevacizumab, Cycle 2 Day 1 on 06/05/25.\n\n"
         "Active issues: Fatigue, decreased appetite, muscle aches, mouth sore. Diarrhea improved. "
         "Treatment tolerated without incident. Next follow-up on 06/26/25. Labs from last 24 "
         "hours not fully reviewed. Patient utilizes MyChart for appointments and understands "
         "follow-up procedures.";
}

inline tumorboard::SyntheticProfile standard_profile() {
  using tumorboard::dates::parse_date;
  tumorboard::SyntheticProfile p;
  p.cancer_type = "NSCLC adenocarcinoma";
  p.has_ngs_report = true;
  p.n_notes = 6;
  p.therapy_events = {
      {parse_date("2024-11-02"), "surgical", "RUL lobectomy"},
      {parse_date("2025-02-10"), "medical", "carboplatin/pemetrexed"},
  };
  p.staging_history = {{parse_date("2025-03-15"), "Stage IIIA"}};
  return p;
}

inline tumorboard::dates::Date standard_as_of() {
  return tumorboard::dates::parse_date("2025-06-01");
}

// Transport built from a lambda, for precise control of model replies.
class LambdaTransport : public tumorboard::llm::Transport {
 public:
  using Fn = std::function<tumorboard::llm::TransportReply(const std::string& body)>;
  explicit LambdaTransport(Fn fn) : fn_(std::move(fn)) {}
  tumorboard::llm::TransportReply post(const std::string&,
                                       const std::vector<tumorboard::llm::Header>&,
                                       const std::string& body) override {
    return fn_(body);
  }

 private:
  Fn fn_;
};

inline tumorboard::llm::TransportReply ok_chat_reply(const std::string& content) {
  nlohmann::json j{{"choices",
                    nlohmann::json::array(
                        {nlohmann::json{{"message", {{"role", "assistant"}, {"content", content}}},
                                        {"finish_reason", "stop"}}})}};
  return {200, j.dump(), ""};
}

}  // namespace tbtest
