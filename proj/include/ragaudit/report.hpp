#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragaudit/dataset.hpp"
#include "ragaudit/judge.hpp"
#include "ragaudit/metrics.hpp"
#include "ragaudit/verify.hpp"

namespace ragaudit {

// Exit statuses of the batch runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDatasetUnreadable = 3;
inline constexpr int kExitNoSampleSucceeded = 4;

struct RunConfig {
    std::string dataset_path;
    std::string dataset_format = "native";
    std::string judge_backend = "scripted";  // "scripted" or "remote"
    std::string script_dir;                  // scripted backend
    std::string model = "gpt-4o-mini";       // remote backend
    std::string api_base = "https://api.openai.com/v1";
    std::string api_key_env = "RAGAUDIT_API_KEY";  // key comes from the environment, never a flag
    std::size_t window = 25;
    std::size_t overlap = 10;
    std::string mode = "sentence";  // "sentence" or "holistic"
    bool global_verification = true;
    double temperature = 0.0;
    int seed = 42;
    int concurrency = 4;
    int max_retries = 3;
    std::string results_path = "results.jsonl";
    std::string summary_path = "summary.json";
    std::string report_path;       // optional HTML report
    std::string price_table_path;  // optional {"prompt_usd_per_1m":..., "completion_usd_per_1m":...}
    std::string abbrev_path;       // optional abbreviation list for the segmenter
};

// Static configuration problems, one message each; empty means runnable.
std::vector<std::string> validate(const RunConfig& config);

struct EvalSummary {
    PRF answer;
    PRF span;
    PRF grounding;
    std::uint64_t answer_gold_count = 0;  // samples with a gold hallucination bit
    std::uint64_t span_sample_count = 0;  // samples entering the span pool
    std::uint64_t grounding_case_count = 0;
};

// Shared by the batch runner and the standalone evaluator so both produce
// identical numbers for identical inputs.
EvalSummary compute_metrics(const std::vector<AuditResult>& results, const std::vector<Sample>& samples);

// Audits every loaded sample, writes the per-sample JSONL and the summary
// JSON (and the optional HTML report), and returns the process exit status.
int run_audit(const RunConfig& config);

// Same, but with a caller-supplied judge instead of one built from the
// config's backend fields.
int run_audit(const RunConfig& config, Judge& judge);

// Recomputes the metric summary from a results file plus its dataset. Every
// result id must have exactly one matching sample and vice versa; otherwise
// throws std::runtime_error naming the offending ids.
nlohmann::ordered_json evaluate_only(const std::string& results_path, const std::string& dataset_path,
                                     const std::string& format_tag);

// Self-contained HTML: verdict-colored answer text, per-claim trace tables,
// grounded evidence quotes.
std::string render_report_html(const std::vector<AuditResult>& results,
                               const std::vector<Sample>& samples);

}  // namespace ragaudit
