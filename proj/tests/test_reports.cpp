#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <string>

#include "tumorboard/chart/synthetic.hpp"
#include "tumorboard/reports/agreement_report.hpp"
#include "tumorboard/reports/comparison.hpp"
#include "tumorboard/util/rng.hpp"

using namespace tumorboard;

namespace {

FactScore make_score(const std::string& case_id, GenerationMethod method, double fully,
                     double partial, int n_items = 10) {
  FactScore s;
  s.case_id = case_id;
  s.method = method;
  s.n_items = n_items;
  s.fully_present = fully;
  s.fully_or_partial = partial;
  return s;
}

}  // namespace

TEST_CASE("comparison: a dominating method earns a significance mark") {
  std::vector<FactScore> scores;
  rng::Prng prng(66);
  for (int i = 0; i < 20; ++i) {
    std::string case_id = "case-" + std::to_string(i);
    double base = 0.4 + 0.02 * static_cast<double>(prng.below(10));
    scores.push_back(make_score(case_id, GenerationMethod::SecureGPT, base, base + 0.05));
    // strictly dominates the baseline on every case
    scores.push_back(make_score(case_id, GenerationMethod::SingleStep, base + 0.2, base + 0.25));
    // identical to the baseline on every case
    scores.push_back(make_score(case_id, GenerationMethod::SingleNote, base, base + 0.05));
  }
  auto report = comparison_report(scores, {}, GenerationMethod::SecureGPT);

  CHECK(report.friedman["fully_present"].p_value < 0.01);

  const auto& rows = report.fact_comparisons["fully_present"];
  REQUIRE(rows.size() == 2);
  std::map<std::string, MethodComparisonRow> by_method;
  for (const auto& r : rows) by_method[to_string(r.method)] = r;

  const auto& dominant = by_method["SingleStep"];
  CHECK(dominant.n_pairs == 20);
  REQUIRE(dominant.p_adj.has_value());
  CHECK(*dominant.p_adj < 0.05);
  CHECK(dominant.significant);

  const auto& tied = by_method["SingleNote"];
  REQUIRE(tied.p_raw.has_value());
  CHECK(*tied.p_raw == 1.0);
  CHECK_FALSE(tied.significant);
  CHECK(tied.note == "all differences zero");
}

TEST_CASE("comparison: all-equal methods produce no marks and Friedman p = 1") {
  std::vector<FactScore> scores;
  for (int i = 0; i < 12; ++i) {
    std::string case_id = "case-" + std::to_string(i);
    double v = 0.6;
    for (auto m : {GenerationMethod::SecureGPT, GenerationMethod::SingleStep,
                   GenerationMethod::MultiStep})
      scores.push_back(make_score(case_id, m, v, v));
  }
  auto report = comparison_report(scores, {}, GenerationMethod::SecureGPT);
  CHECK(report.friedman["fully_present"].statistic == 0.0);
  CHECK(report.friedman["fully_present"].p_value == 1.0);
  for (const auto& [definition, rows] : report.fact_comparisons)
    for (const auto& r : rows) CHECK_FALSE(r.significant);
}

TEST_CASE("comparison: significance marks always correspond to adjusted p below alpha") {
  rng::Prng prng(15);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FactScore> scores;
    for (int i = 0; i < 10; ++i) {
      std::string case_id = "case-" + std::to_string(i);
      for (auto m : {GenerationMethod::SecureGPT, GenerationMethod::SingleNote,
                     GenerationMethod::SingleStep, GenerationMethod::MultiStep}) {
        double fully = 0.1 * static_cast<double>(prng.below(11));
        scores.push_back(make_score(case_id, m, fully, std::min(1.0, fully + 0.1)));
      }
    }
    auto report = comparison_report(scores, {}, GenerationMethod::SecureGPT);
    for (const auto& [definition, rows] : report.fact_comparisons) {
      for (const auto& r : rows) {
        if (r.significant) {
          REQUIRE(r.p_adj.has_value());
          CHECK(*r.p_adj < 0.05);
        }
        if (r.p_adj && r.p_raw) CHECK(*r.p_adj >= *r.p_raw - 1e-12);
      }
    }
  }
}

TEST_CASE("comparison: incomplete cases excluded from Friedman and logged") {
  std::vector<FactScore> scores;
  for (int i = 0; i < 6; ++i) {
    std::string case_id = "case-" + std::to_string(i);
    scores.push_back(make_score(case_id, GenerationMethod::SecureGPT, 0.5, 0.6));
    if (i != 3)  // case-3 is missing the automated method
      scores.push_back(make_score(case_id, GenerationMethod::SingleStep, 0.7, 0.8));
  }
  auto report = comparison_report(scores, {}, GenerationMethod::SecureGPT);
  CHECK(report.friedman["fully_present"].n_effective == 5);
  REQUIRE(report.exclusions.size() == 1);
  CHECK(report.exclusions[0].find("case-3") != std::string::npos);
  // The pairwise Wilcoxon also runs on the 5 complete pairs.
  CHECK(report.fact_comparisons["fully_present"][0].n_pairs == 5);
}

TEST_CASE("comparison: missing baseline is an error") {
  std::vector<FactScore> scores{make_score("c", GenerationMethod::SingleStep, 0.5, 0.5)};
  CHECK_THROWS_AS(comparison_report(scores, {}, GenerationMethod::SecureGPT), NoCompleteCases);
}

TEST_CASE("comparison: by-type matrix matches a recount oracle over rubrics") {
  // Judge every synthetic rubric item as Yes and recount from the rubric files.
  std::vector<FactScore> scores;
  std::map<std::string, int> oracle_counts;  // attribute_type -> item count
  for (std::uint64_t seed : {101, 102, 103}) {
    SyntheticProfile profile;
    profile.therapy_events = {{dates::parse_date("2025-01-10"), "medical", "chemo"}};
    profile.staging_history = {{dates::parse_date("2025-02-01"), "Stage II"}};
    Rubric rubric = synthetic_rubric(seed, profile);

    std::vector<EntailmentRecord> records;
    for (const auto& id : all_attribute_ids(rubric))
      records.push_back(EntailmentRecord{id, Entailment::Yes, {}});
    FactScore score = score_summary(rubric, records);
    score.case_id = "case-" + std::to_string(seed);
    score.method = GenerationMethod::SingleStep;
    scores.push_back(score);
    scores.push_back(make_score(score.case_id, GenerationMethod::SecureGPT, 0.5, 0.5, 4));

    for (const auto& item : items_at_highest_granularity(rubric))
      oracle_counts[item.attribute_type] += 1;
  }
  auto report = comparison_report(scores, {}, GenerationMethod::SecureGPT);
  const auto& by_type = report.by_type.at("SingleStep");
  int total = 0;
  for (const auto& [type, expected] : oracle_counts) {
    REQUIRE(by_type.count(type));
    CHECK(by_type.at(type).n_items == expected);
    CHECK(by_type.at(type).n_fully == expected);  // everything judged Yes
    total += by_type.at(type).n_items;
  }
  int n_items_total = 0;
  for (const auto& s : scores)
    if (s.method == GenerationMethod::SingleStep) n_items_total += s.n_items;
  CHECK(total == n_items_total);
}

TEST_CASE("comparison: subjective domains get per-domain families") {
  std::vector<FactScore> scores;
  std::vector<RatingRecord> ratings;
  for (int i = 0; i < 10; ++i) {
    std::string case_id = "case-" + std::to_string(i);
    scores.push_back(make_score(case_id, GenerationMethod::SecureGPT, 0.5, 0.6));
    scores.push_back(make_score(case_id, GenerationMethod::SingleStep, 0.7, 0.8));
    for (auto method : {GenerationMethod::SecureGPT, GenerationMethod::SingleStep}) {
      for (auto domain : kAllDomains) {
        int base = method == GenerationMethod::SingleStep ? 4 : 3;
        RatingRecord r1{case_id, method, "rater-a", domain, base, dates::parse_date("2026-01-05")};
        RatingRecord r2{case_id, method, "rater-b", domain, base + 1,
                        dates::parse_date("2026-01-05")};
        ratings.push_back(r1);
        ratings.push_back(r2);
      }
    }
  }
  auto report = comparison_report(scores, ratings, GenerationMethod::SecureGPT);
  CHECK(report.subjective_comparisons.size() == 4);
  CHECK(report.likert.size() == 8);  // 4 domains x 2 methods
  for (const auto& row : report.likert) CHECK(row.n == 10);

  // Families: 2 fact-score definitions + 4 subjective domains.
  CHECK(report.families.size() == 6);
  std::set<std::string> names;
  for (const auto& f : report.families) names.insert(f["name"].get<std::string>());
  CHECK(names.count("fact_score:fully_present") == 1);
  CHECK(names.count("subjective:Accuracy") == 1);

  // CSV serialization carries the mark only for significant rows.
  auto table = csv::parse_string(subjective_comparisons_to_csv(report));
  int sig = table.column("significant");
  int padj = table.column("p_adj");
  for (const auto& row : table.rows) {
    if (row[sig] == "*") CHECK(std::stod(row[padj]) < 0.05);
  }
}

TEST_CASE("agreement report: identical raters give coefficient 1 everywhere") {
  std::vector<LabelRow> rows;
  rng::Prng prng(5);
  const char* labels[] = {"Yes", "Partial", "No"};
  for (int c = 0; c < 6; ++c) {
    for (int item = 0; item < 5; ++item) {
      std::string label = labels[prng.below(3)];
      for (const char* rater : {"physician-1", "physician-2", "llm"}) {
        rows.push_back(LabelRow{"case-" + std::to_string(c), GenerationMethod::SingleStep,
                                std::to_string(item), rater, label});
      }
    }
  }
  AgreementReportConfig config;
  config.machine_rater_id = "llm";
  config.n_reps = 300;
  config.seed = 9;
  auto report = agreement_report(rows, config);

  // Strata: Overall + SingleStep; 3 rater pairs x 3 coefficients each.
  std::set<std::string> strata;
  for (const auto& r : report.pairwise) strata.insert(r.stratum);
  CHECK(strata == std::set<std::string>{"Overall", "SingleStep"});
  CHECK(report.pairwise.size() == 2 * 3 * 3);
  for (const auto& r : report.pairwise) {
    REQUIRE(r.estimate.has_value());
    CHECK(*r.estimate == Catch::Approx(1.0).margin(1e-12));
    CHECK(r.n_items == 30);
  }
  // Fleiss human-only and with-machine, per stratum.
  CHECK(report.fleiss.size() == 4);
  for (const auto& r : report.fleiss) {
    REQUIRE(r.estimate.has_value());
    CHECK(*r.estimate == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("agreement report: seeded disagreement matches direct-formula oracles") {
  std::vector<LabelRow> rows;
  rng::Prng prng(31);
  const char* labels[] = {"Yes", "Partial", "No"};
  std::vector<stats::LabelPair> oracle_pairs;  // physician-1 vs physician-2
  for (int c = 0; c < 10; ++c) {
    for (int item = 0; item < 8; ++item) {
      std::string base = labels[prng.below(3)];
      std::string second = prng.below(10) == 0 ? labels[prng.below(3)] : base;  // ~10% noise
      rows.push_back(LabelRow{"case-" + std::to_string(c), GenerationMethod::MultiStep,
                              std::to_string(item), "physician-1", base});
      rows.push_back(LabelRow{"case-" + std::to_string(c), GenerationMethod::MultiStep,
                              std::to_string(item), "physician-2", second});
      oracle_pairs.push_back({base, second});
    }
  }
  AgreementReportConfig config;
  config.n_reps = 400;
  config.seed = 77;
  auto report = agreement_report(rows, config);

  // Direct-formula oracle for kappa over the same pairs.
  std::map<std::string, double> m1, m2;
  double po = 0;
  for (const auto& [a, b] : oracle_pairs) {
    m1[a] += 1;
    m2[b] += 1;
    if (a == b) ++po;
  }
  double n = static_cast<double>(oracle_pairs.size());
  po /= n;
  double pe = 0;
  for (const auto& [label, count] : m1) pe += (count / n) * (m2[label] / n);
  double oracle_kappa = (po - pe) / (1 - pe);

  for (const auto& r : report.pairwise) {
    if (r.stratum != "Overall" || r.coefficient != "cohen_kappa") continue;
    REQUIRE(r.estimate.has_value());
    CHECK(*r.estimate == Catch::Approx(oracle_kappa).margin(1e-12));
    REQUIRE(r.ci_low.has_value());
    CHECK(*r.ci_low <= *r.estimate);
    CHECK(*r.ci_high >= *r.estimate);
  }
  for (const auto& r : report.pairwise) {
    if (r.coefficient != "exact") continue;
    if (r.stratum == "Overall") CHECK(*r.estimate == Catch::Approx(po).margin(1e-12));
  }
}

TEST_CASE("agreement report: single rater is insufficient") {
  std::vector<LabelRow> rows{{"c", GenerationMethod::SingleStep, "1", "only-rater", "Yes"}};
  CHECK_THROWS_AS(agreement_report(rows), InsufficientOverlap);

  // Two raters who never label the same item overlap nowhere.
  std::vector<LabelRow> disjoint{
      {"c", GenerationMethod::SingleStep, "1", "rater-a", "Yes"},
      {"c", GenerationMethod::SingleStep, "2", "rater-b", "Yes"},
  };
  CHECK_THROWS_AS(agreement_report(disjoint), InsufficientOverlap);
}

TEST_CASE("labels csv parsing") {
  std::string text =
      "case_id,method,attribute_id,rater_id,label\n"
      "case-1,SingleStep,4a,physician-1,Yes\n"
      "case-1,SingleStep,4a,llm,Partial\n";
  auto rows = labels_from_csv(csv::parse_string(text));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == GenerationMethod::SingleStep);
  CHECK(rows[1].rater_id == "llm");
  CHECK(rows[1].label == "Partial");
}
