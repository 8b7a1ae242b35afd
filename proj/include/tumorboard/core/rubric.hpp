#pragma once

// Rubric model: JSON (de)serialization in the judge's attribute shape and the
// highest-granularity expansion every scoring path runs on.

#include <json.hpp>

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tumorboard/core/types.hpp"

namespace tumorboard {

struct RubricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline nlohmann::json attribute_to_json(const Attribute& attr) {
  nlohmann::json j;
  j["attribute_id"] = attr.attribute_id;
  j["attribute_type"] = attr.attribute_type;
  j["value"] = attr.value;
  j["importance"] = attr.importance;
  if (attr.subattributes.empty()) {
    j["subattributes"] = nullptr;
  } else {
    nlohmann::json subs = nlohmann::json::array();
    for (const auto& sub : attr.subattributes) subs.push_back(attribute_to_json(sub));
    j["subattributes"] = subs;
  }
  return j;
}

inline Attribute attribute_from_json(const nlohmann::json& j, int depth = 0) {
  if (depth > 1) throw RubricError("subattributes nest at most one level");
  Attribute a;
  a.attribute_id = j.at("attribute_id").get<std::string>();
  a.attribute_type = j.at("attribute_type").get<std::string>();
  a.value = j.at("value").get<std::string>();
  a.importance = j.value("importance", std::string{});
  if (j.contains("subattributes") && !j["subattributes"].is_null()) {
    const auto& subs = j["subattributes"];
    if (!subs.is_array() || subs.empty())
      throw RubricError("subattributes must be null or a nonempty array");
    for (const auto& sub : subs) a.subattributes.push_back(attribute_from_json(sub, depth + 1));
  }
  return a;
}

inline nlohmann::json rubric_to_json(const Rubric& r) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["patient_id"] = r.patient_id;
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : r.attributes) attrs.push_back(attribute_to_json(a));
  j["attributes"] = attrs;
  return j;
}

inline Rubric rubric_from_json(const nlohmann::json& j) {
  Rubric r;
  r.patient_id = j.at("patient_id").get<std::string>();
  for (const auto& a : j.at("attributes")) r.attributes.push_back(attribute_from_json(a));
  if (r.attributes.empty()) throw RubricError("rubric has no attributes");
  std::set<std::string> ids;
  auto check_unique = [&ids](const Attribute& a, auto&& self) -> void {
    if (!ids.insert(a.attribute_id).second)
      throw RubricError("duplicate attribute_id: " + a.attribute_id);
    for (const auto& s : a.subattributes) self(s, self);
  };
  for (const auto& a : r.attributes) check_unique(a, check_unique);
  return r;
}

// Descriptive-range checks are soft: real rubrics cluster inside these ranges
// but values outside them are still valid input.
inline std::vector<std::string> rubric_warnings(const Rubric& r) {
  std::vector<std::string> warnings;
  std::size_t n_attr = r.attributes.size();
  std::size_t n_sub = 0;
  for (const auto& a : r.attributes) n_sub += a.subattributes.size();
  if (n_attr < 2 || n_attr > 12)
    warnings.push_back("attribute count " + std::to_string(n_attr) + " outside typical range 2-12");
  if (n_sub > 16)
    warnings.push_back("subattribute count " + std::to_string(n_sub) + " outside typical range 0-16");
  return warnings;
}

// Expansion used for all scoring: a leaf attribute yields itself, an attribute
// with subattributes yields only its subattributes. Output follows rubric order.
inline std::vector<RubricItem> items_at_highest_granularity(const Rubric& rubric) {
  std::vector<RubricItem> items;
  for (const auto& attr : rubric.attributes) {
    if (attr.subattributes.empty()) {
      items.push_back(RubricItem{attr.attribute_id, attr.attribute_type, attr.value,
                                 attr.importance, std::nullopt});
    } else {
      for (const auto& sub : attr.subattributes) {
        items.push_back(RubricItem{sub.attribute_id, sub.attribute_type, sub.value,
                                   sub.importance, attr.attribute_id});
      }
    }
  }
  return items;
}

// Every id the judge is expected to return a record for: parents and children.
inline std::vector<std::string> all_attribute_ids(const Rubric& rubric) {
  std::vector<std::string> ids;
  for (const auto& attr : rubric.attributes) {
    ids.push_back(attr.attribute_id);
    for (const auto& sub : attr.subattributes) ids.push_back(sub.attribute_id);
  }
  return ids;
}

}  // namespace tumorboard
