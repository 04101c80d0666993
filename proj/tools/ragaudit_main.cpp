// Batch CLI for auditing RAG outputs against their retrieved context.
//
//   ragaudit run  --dataset data.jsonl --scripts scripts/ --results out.jsonl --summary summary.json
//   ragaudit eval --results out.jsonl --dataset data.jsonl
//
// The remote judge reads its API key from an environment variable (default
// RAGAUDIT_API_KEY); there is deliberately no --api-key flag, since flags
// leak into shell history and process listings.

#include <cstdio>
#include <exception>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "ragaudit/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"context-faithfulness audit for retrieval-augmented generation outputs"};
    app.require_subcommand(1);

    ragaudit::RunConfig config;
    CLI::App* run = app.add_subcommand("run", "audit every sample in a JSONL dataset");
    run->add_option("--dataset", config.dataset_path, "input JSONL dataset")->required();
    run->add_option("--format", config.dataset_format,
                    "dataset format: native, ragtruth, ragtruth-plus, ragtruth-enhance")
        ->capture_default_str();
    run->add_option("--judge", config.judge_backend, "judge backend: scripted or remote")
        ->capture_default_str();
    run->add_option("--scripts", config.script_dir, "directory of recorded judge responses (scripted)");
    run->add_option("--model", config.model, "model name (remote)")->capture_default_str();
    run->add_option("--api-base", config.api_base, "chat-completions base URL (remote)")
        ->capture_default_str();
    run->add_option("--api-key-env", config.api_key_env,
                    "environment variable holding the API key (remote)")
        ->capture_default_str();
    run->add_option("--window", config.window, "sentences per context chunk")->capture_default_str();
    run->add_option("--overlap", config.overlap, "sentences shared between neighbouring chunks")
        ->capture_default_str();
    run->add_option("--mode", config.mode, "claim decomposition: sentence or holistic")
        ->capture_default_str();
    run->add_flag("!--no-global", config.global_verification,
                  "skip the full-context verification stage (local verdicts become final)");
    run->add_option("--temperature", config.temperature, "judge sampling temperature")
        ->capture_default_str();
    run->add_option("--seed", config.seed, "judge sampling seed")->capture_default_str();
    run->add_option("--concurrency", config.concurrency, "maximum in-flight judge requests")
        ->capture_default_str();
    run->add_option("--max-retries", config.max_retries, "attempts per judge request (remote)")
        ->capture_default_str();
    run->add_option("--results", config.results_path, "per-sample JSONL output")->capture_default_str();
    run->add_option("--summary", config.summary_path, "run summary JSON output")->capture_default_str();
    run->add_option("--report", config.report_path, "optional HTML report output");
    run->add_option("--prices", config.price_table_path,
                    "optional price table JSON for cost accounting");
    run->add_option("--abbrev", config.abbrev_path,
                    "optional abbreviation list for the sentence segmenter (one per line)");

    std::string eval_results, eval_dataset, eval_format = "native", eval_out;
    CLI::App* eval = app.add_subcommand("eval", "recompute metrics from a results file");
    eval->add_option("--results", eval_results, "results JSONL produced by run")->required();
    eval->add_option("--dataset", eval_dataset, "dataset the results were produced from")->required();
    eval->add_option("--format", eval_format, "dataset format")->capture_default_str();
    eval->add_option("--out", eval_out, "write the metric summary here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return ragaudit::run_audit(config);

    try {
        const nlohmann::ordered_json doc = ragaudit::evaluate_only(eval_results, eval_dataset, eval_format);
        if (eval_out.empty()) {
            std::printf("%s\n", doc.dump(2).c_str());
        } else {
            std::ofstream out(eval_out, std::ios::binary);
            if (!out) {
                std::fprintf(stderr, "cannot write %s\n", eval_out.c_str());
                return 1;
            }
            out << doc.dump(2) << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "eval error: %s\n", e.what());
        return 1;
    }
}
