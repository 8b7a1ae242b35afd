// Command-line entry points: chart ingestion, summary generation, judge
// scoring, comparison and agreement reports, and weekly monitoring.
// Exit codes: 0 success, 1 partial failure, 2 configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "tumorboard/harness/commands.hpp"
#include "tumorboard/harness/run_config.hpp"

using namespace tumorboard;

namespace {

struct GlobalFlags {
  std::string config_path;
  std::string mode;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

RunConfig load_config(const GlobalFlags& flags, bool required = true) {
  RunConfig config;
  if (!flags.config_path.empty()) {
    config = RunConfig::load(flags.config_path);
  } else if (required) {
    throw ConfigError("--config <path> is required");
  }
  if (!flags.mode.empty()) config.mode = llm::mode_from_string(flags.mode);
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.seed) config.seed = flags.seed;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tumor-board summarization and evaluation harness"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "Run config JSON file")->envname("TB_CONFIG");
  app.add_option("--mode", flags.mode, "Gateway mode: live, record or replay")
      ->check(CLI::IsMember({"live", "record", "replay"}));
  app.add_option("--out", flags.out_dir, "Output directory (overrides config)");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed (overrides config)");

  auto* ingest = app.add_subcommand("ingest-charts", "Ingest chart JSON files or FHIR bundles");
  std::vector<std::string> ingest_files;
  ingest->add_option("files", ingest_files, "Chart or bundle JSON files")->required();

  auto* ingest_summaries =
      app.add_subcommand("ingest-summaries", "Ingest baseline summary JSON files");
  std::vector<std::string> summary_files;
  ingest_summaries->add_option("files", summary_files, "Summary JSON files")->required();

  auto* generate = app.add_subcommand("generate", "Run the generation strategies per case");
  auto* judge = app.add_subcommand("judge", "Score persisted summaries against rubrics");
  auto* compare = app.add_subcommand("compare", "Build method-vs-baseline comparison reports");

  auto* agreement = app.add_subcommand("agreement", "Build rater-agreement tables");
  std::string labels_csv;
  agreement->add_option("--labels", labels_csv, "Labels CSV (case_id,method,attribute_id,rater_id,label)")
      ->required();

  auto* monitor = app.add_subcommand("monitor", "Weekly post-deployment rating monitor");
  std::string ratings_csv;
  monitor->add_option("--ratings", ratings_csv, "Ratings CSV (overrides config.ratings_csv)");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) flags.seed = seed_value;

  try {
    RunConfig config = load_config(flags);
    if (ingest->parsed()) return cmd_ingest_charts(config, ingest_files);
    if (ingest_summaries->parsed()) return cmd_ingest_summaries(config, summary_files);
    if (generate->parsed()) return cmd_generate(config);
    if (judge->parsed()) return cmd_judge(config);
    if (compare->parsed()) return cmd_compare(config);
    if (agreement->parsed()) return cmd_agreement(config, labels_csv);
    if (monitor->parsed()) return cmd_monitor(config, ratings_csv);
    std::fprintf(stderr, "no subcommand\n");
    return kExitConfigError;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitPartialFailure;
  }
}
