#pragma once

// Umbrella header.

#include "tumorboard/chart/fhir.hpp"
#include "tumorboard/chart/store.hpp"
#include "tumorboard/chart/synthetic.hpp"
#include "tumorboard/core/char_limit.hpp"
#include "tumorboard/core/chart_json.hpp"
#include "tumorboard/core/rubric.hpp"
#include "tumorboard/core/sections.hpp"
#include "tumorboard/core/types.hpp"
#include "tumorboard/harness/commands.hpp"
#include "tumorboard/harness/run_config.hpp"
#include "tumorboard/judge/judge.hpp"
#include "tumorboard/llm/gateway.hpp"
#include "tumorboard/orchestrate/artifact_store.hpp"
#include "tumorboard/orchestrate/citation.hpp"
#include "tumorboard/orchestrate/prompts.hpp"
#include "tumorboard/orchestrate/strategies.hpp"
#include "tumorboard/orchestrate/workspace.hpp"
#include "tumorboard/ratings/ratings.hpp"
#include "tumorboard/reports/agreement_report.hpp"
#include "tumorboard/reports/comparison.hpp"
#include "tumorboard/stats/adjust.hpp"
#include "tumorboard/stats/agreement.hpp"
#include "tumorboard/stats/bootstrap.hpp"
#include "tumorboard/stats/correlation.hpp"
#include "tumorboard/stats/rank_tests.hpp"
