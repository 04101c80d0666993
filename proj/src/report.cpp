#include "ragaudit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "ragaudit/joins.hpp"
#include "ragaudit/localize.hpp"
#include "ragaudit/parallel.hpp"
#include "ragaudit/prompts.hpp"
#include "ragaudit/segment.hpp"
#include "ragaudit/unicode.hpp"

namespace ragaudit {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> validate(const RunConfig& config) {
    std::vector<std::string> problems;
    if (config.dataset_path.empty()) problems.push_back("dataset path is required");
    if (!is_known_format(config.dataset_format))
        problems.push_back("unknown dataset format '" + config.dataset_format +
                           "' (expected native, ragtruth, ragtruth-plus, or ragtruth-enhance)");
    if (config.judge_backend != "scripted" && config.judge_backend != "remote")
        problems.push_back("unknown judge backend '" + config.judge_backend +
                           "' (expected scripted or remote)");
    if (config.judge_backend == "scripted" && config.script_dir.empty())
        problems.push_back("scripted judge requires a script directory");
    if (config.window < 1)
        problems.push_back("window must be at least 1 sentence");
    else if (config.overlap >= config.window)
        problems.push_back("overlap must be smaller than the window (got window=" +
                           std::to_string(config.window) + " overlap=" + std::to_string(config.overlap) + ")");
    if (!parse_decompose_mode(config.mode))
        problems.push_back("unknown mode '" + config.mode + "' (expected sentence or holistic)");
    if (config.concurrency < 1) problems.push_back("concurrency must be at least 1");
    if (config.max_retries < 1) problems.push_back("max retries must be at least 1");
    if (config.results_path.empty()) problems.push_back("results path is required");
    if (config.summary_path.empty()) problems.push_back("summary path is required");
    return problems;
}

EvalSummary compute_metrics(const std::vector<AuditResult>& results, const std::vector<Sample>& samples) {
    std::map<std::string, const Sample*> by_id;
    for (const Sample& s : samples) by_id.emplace(s.id, &s);

    std::vector<bool> answer_pred, answer_gold;
    std::vector<SpanEvalInput> span_pool, grounding_pool;
    EvalSummary summary;

    for (const AuditResult& result : results) {
        auto it = by_id.find(result.sample_id);
        if (it == by_id.end()) continue;
        const Sample& sample = *it->second;

        if (sample.gold_hallucinated) {
            answer_pred.push_back(result.answer.hallucinated);
            answer_gold.push_back(*sample.gold_hallucinated);
            ++summary.answer_gold_count;
        }

        if (sample.gold_answer_spans && result.answer_spans) {
            SpanEvalInput input;
            input.text_length = result.answer_length;
            for (const GoldSpan& g : *sample.gold_answer_spans) input.gold_spans.push_back(g.span);
            input.pred_spans = result.answer_spans->hallucinated;
            span_pool.push_back(std::move(input));
            ++summary.span_sample_count;
        }

        // Grounding is scored on correctly-predicted conflict cases: the
        // audit says CONTRADICTED and the gold annotation supplies refuting
        // evidence, at least one piece of which anchors in the context.
        if (result.answer.label == Label::Contradicted && sample.gold_refuting_evidence &&
            !sample.gold_refuting_evidence->empty()) {
            // Gold strings are grounded with default segmenter options in
            // every code path, so the standalone evaluator reproduces the
            // batch runner exactly regardless of pipeline configuration.
            const Utf8Map context(sample.context);
            const std::vector<Sentence> sentences = segment_sentences(sample.context);
            SpanEvalInput input;
            input.text_length = context.size();
            for (const std::string& text : *sample.gold_refuting_evidence) {
                if (auto span = ground_evidence(text, context, sentences))
                    input.gold_spans.push_back(span->span);
            }
            if (input.gold_spans.empty()) continue;  // nothing alignable; case is unscorable
            for (const ClaimVerdict& v : result.trace) {
                if (v.final_label != Label::Contradicted) continue;
                for (const EvidenceSpan& e : v.evidence) input.pred_spans.push_back(e.span);
            }
            grounding_pool.push_back(std::move(input));
            ++summary.grounding_case_count;
        }
    }

    summary.answer = answer_prf(answer_pred, answer_gold);
    summary.span = span_micro_prf(span_pool);
    summary.grounding = evidence_grounding_prf(grounding_pool);
    return summary;
}

namespace {

ordered_json prf_to_json(const PRF& prf) {
    ordered_json doc;
    doc["precision"] = prf.precision;
    doc["recall"] = prf.recall;
    doc["f1"] = prf.f1;
    doc["tp"] = prf.tp;
    doc["fp"] = prf.fp;
    doc["fn"] = prf.fn;
    return doc;
}

ordered_json metrics_to_json(const EvalSummary& summary) {
    ordered_json metrics;
    metrics["answer"] = prf_to_json(summary.answer);
    metrics["answer"]["gold_count"] = summary.answer_gold_count;
    metrics["answer_spans"] = prf_to_json(summary.span);
    metrics["answer_spans"]["sample_count"] = summary.span_sample_count;
    metrics["evidence_grounding"] = prf_to_json(summary.grounding);
    metrics["evidence_grounding"]["case_count"] = summary.grounding_case_count;
    return metrics;
}

std::optional<PriceTable> load_price_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read price table: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("prompt_usd_per_1m") ||
        !doc.contains("completion_usd_per_1m") || !doc["prompt_usd_per_1m"].is_number() ||
        !doc["completion_usd_per_1m"].is_number())
        throw std::runtime_error("price table must be {\"prompt_usd_per_1m\": n, \"completion_usd_per_1m\": n}");
    PriceTable prices;
    prices.prompt_usd_per_1m = doc["prompt_usd_per_1m"].get<double>();
    prices.completion_usd_per_1m = doc["completion_usd_per_1m"].get<double>();
    return prices;
}

// The config echo covers exactly the knobs that can change outputs; the
// concurrency bound is deliberately absent (it only changes scheduling), so
// runs at different bounds stay byte-identical.
ordered_json config_echo(const RunConfig& config, const std::optional<PriceTable>& prices) {
    ordered_json echo;
    echo["dataset"] = config.dataset_path;
    echo["format"] = config.dataset_format;
    ordered_json judge;
    judge["backend"] = config.judge_backend;
    judge["model"] = config.judge_backend == "remote" ? ordered_json(config.model) : ordered_json(nullptr);
    judge["scripts"] =
        config.judge_backend == "scripted" ? ordered_json(config.script_dir) : ordered_json(nullptr);
    echo["judge"] = std::move(judge);
    echo["window"] = config.window;
    echo["overlap"] = config.overlap;
    echo["mode"] = config.mode;
    echo["global_verification"] = config.global_verification;
    echo["temperature"] = config.temperature;
    echo["seed"] = config.seed;
    echo["prompt_template_version"] = kPromptTemplateVersion;
    echo["segmenter_version"] = kSegmenterVersion;
    echo["abbreviations"] = config.abbrev_path.empty() ? ordered_json(nullptr) : ordered_json(config.abbrev_path);
    if (prices) {
        echo["price_table"] = ordered_json{{"prompt_usd_per_1m", prices->prompt_usd_per_1m},
                                           {"completion_usd_per_1m", prices->completion_usd_per_1m}};
    } else {
        echo["price_table"] = nullptr;
    }
    return echo;
}

struct FlagTotals {
    std::uint64_t degraded = 0;
    std::uint64_t repaired = 0;
    std::uint64_t ungrounded = 0;
    std::uint64_t empty_claim_sets = 0;
    std::uint64_t rr_violations = 0;
};

FlagTotals tally_flags(const std::vector<AuditResult>& results) {
    FlagTotals totals;
    for (const AuditResult& r : results) {
        if (r.empty_claim_set) ++totals.empty_claim_sets;
        totals.rr_violations += r.rr_violations.size();
        for (const ClaimVerdict& v : r.trace) {
            if (v.flags.degraded) ++totals.degraded;
            if (v.flags.repaired) ++totals.repaired;
            if (v.flags.ungrounded) ++totals.ungrounded;
        }
    }
    return totals;
}

std::string escape_html(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

const char* label_css(Label label) {
    switch (label) {
        case Label::Entailed: return "ent";
        case Label::Contradicted: return "con";
        case Label::Baseless: return "nic";
    }
    return "nic";
}

// Paints the answer per code point by verdict class, severity
// CONTRADICTED > BASELESS > ENTAILED, then emits contiguous runs.
std::string render_answer_html(const std::string& answer, const std::optional<AnswerSpanSet>& spans) {
    const Utf8Map map(answer);
    if (!spans) return "<p class=\"answer\">" + escape_html(answer) + "</p>";
    std::vector<int> klass(map.size(), 0);
    auto paint = [&](const std::vector<CharSpan>& list, int value) {
        for (const CharSpan& s : list)
            for (std::size_t i = s.start; i < s.end && i < klass.size(); ++i) klass[i] = value;
    };
    paint(spans->entailed, 1);
    paint(spans->baseless, 2);
    paint(spans->contradicted, 3);

    static const char* kClass[] = {"", "ent", "nic", "con"};
    std::string html = "<p class=\"answer\">";
    std::size_t i = 0;
    while (i < map.size()) {
        std::size_t j = i;
        while (j < map.size() && klass[j] == klass[i]) ++j;
        const std::string piece = escape_html(map.substr(i, j));
        if (klass[i] == 0) html += piece;
        else html += "<span class=\"" + std::string(kClass[klass[i]]) + "\">" + piece + "</span>";
        i = j;
    }
    html += "</p>";
    return html;
}

constexpr const char* kReportCss = R"(body{font-family:sans-serif;margin:2em;max-width:70em}
h2{border-bottom:1px solid #ccc;padding-bottom:.2em}
.answer{line-height:1.6}
.ent{background:#e2f3e2}.nic{background:#fcf3d4}.con{background:#fbdfdf}
.badge{display:inline-block;padding:.1em .5em;border-radius:.3em;font-size:.85em}
table{border-collapse:collapse;margin:.6em 0}
td,th{border:1px solid #ddd;padding:.3em .5em;text-align:left;vertical-align:top}
.evidence{margin:.2em 0 .2em 1em;color:#444}
.flags{color:#a33;font-size:.85em}
)";

}  // namespace

std::string render_report_html(const std::vector<AuditResult>& results,
                               const std::vector<Sample>& samples) {
    std::map<std::string, const Sample*> by_id;
    for (const Sample& s : samples) by_id.emplace(s.id, &s);

    std::string html = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
                       "<title>context faithfulness audit</title><style>" +
                       std::string(kReportCss) + "</style></head><body>\n";
    html += "<h1>Context faithfulness audit</h1>\n";
    for (const AuditResult& result : results) {
        auto it = by_id.find(result.sample_id);
        html += "<h2>" + escape_html(result.sample_id) + " <span class=\"badge " +
                label_css(result.answer.label) + "\">" + to_string(result.answer.label) + "</span></h2>\n";
        if (it != by_id.end()) html += render_answer_html(it->second->answer, result.answer_spans);

        if (!result.trace.empty()) {
            std::map<std::size_t, const Claim*> claims;
            for (const Claim& c : result.claims) claims.emplace(c.id, &c);
            html += "<table><tr><th>#</th><th>claim</th><th>chunk assessments</th><th>local</th>"
                    "<th>final</th><th>evidence</th></tr>\n";
            for (const ClaimVerdict& v : result.trace) {
                html += "<tr><td>" + std::to_string(v.claim_id) + "</td><td>";
                auto cit = claims.find(v.claim_id);
                if (cit != claims.end()) html += escape_html(cit->second->text);
                html += "</td><td>";
                for (std::size_t k = 0; k < v.chunk_assessments.size(); ++k) {
                    if (k) html += " ";
                    html += std::to_string(v.chunk_assessments[k].first) + ":<span class=\"" +
                            label_css(v.chunk_assessments[k].second) + "\">" +
                            to_string(v.chunk_assessments[k].second) + "</span>";
                }
                html += "</td><td><span class=\"" + std::string(label_css(v.local_label)) + "\">" +
                        to_string(v.local_label) + "</span>";
                if (v.focus_chunk) html += " (focus " + std::to_string(*v.focus_chunk) + ")";
                html += "</td><td><span class=\"" + std::string(label_css(v.final_label)) + "\">" +
                        to_string(v.final_label) + "</span>";
                if (v.flags.any()) {
                    html += "<div class=\"flags\">";
                    if (v.flags.degraded) html += "degraded ";
                    if (v.flags.repaired) html += "repaired ";
                    if (v.flags.ungrounded) html += "ungrounded ";
                    html += "</div>";
                }
                html += "</td><td>";
                for (const EvidenceSpan& e : v.evidence) {
                    html += "<div class=\"evidence\">&ldquo;" + escape_html(e.text) + "&rdquo; <small>(sentence";
                    if (e.sentence_indices.size() > 1) html += "s";
                    for (std::size_t s = 0; s < e.sentence_indices.size(); ++s)
                        html += (s ? ", " : " ") + std::to_string(e.sentence_indices[s]);
                    html += ", tier " + std::to_string(e.tier) + ")</small></div>";
                }
                html += "</td></tr>\n";
            }
            html += "</table>\n";
        }
        if (!result.rr_violations.empty()) {
            html += "<p class=\"flags\">consistency violations: " +
                    std::to_string(result.rr_violations.size()) + "</p>\n";
        }
    }
    html += "</body></html>\n";
    return html;
}

int run_audit(const RunConfig& config) {
    const std::vector<std::string> problems = validate(config);
    if (!problems.empty()) {
        for (const std::string& p : problems) std::fprintf(stderr, "config error: %s\n", p.c_str());
        return kExitConfigError;
    }

    std::unique_ptr<Judge> judge;
    try {
        if (config.judge_backend == "scripted") {
            judge = std::make_unique<ScriptedJudge>(ScriptedJudge::from_directory(config.script_dir));
        } else {
            const char* key = std::getenv(config.api_key_env.c_str());
            if (!key || !*key) {
                std::fprintf(stderr,
                             "config error: remote judge requires the API key in environment variable %s\n",
                             config.api_key_env.c_str());
                return kExitConfigError;
            }
            RemoteJudgeConfig remote;
            remote.base_url = config.api_base;
            remote.model = config.model;
            remote.api_key = key;
            remote.max_retries = config.max_retries;
            remote.concurrency = config.concurrency;
            judge = std::make_unique<RemoteJudge>(std::move(remote));
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    }
    return run_audit(config, *judge);
}

int run_audit(const RunConfig& config, Judge& judge) {
    const std::vector<std::string> problems = validate(config);
    if (!problems.empty()) {
        for (const std::string& p : problems) std::fprintf(stderr, "config error: %s\n", p.c_str());
        return kExitConfigError;
    }

    std::optional<PriceTable> prices;
    SegmenterOptions segmenter = SegmenterOptions::defaults();
    try {
        if (!config.price_table_path.empty()) prices = load_price_table(config.price_table_path);
        if (!config.abbrev_path.empty()) segmenter.abbreviations = load_abbreviations(config.abbrev_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    }

    LoadReport data;
    try {
        data = load_dataset(config.dataset_path, config.dataset_format);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "dataset error: %s\n", e.what());
        return kExitDatasetUnreadable;
    }

    PipelineOptions options;
    options.window = config.window;
    options.overlap = config.overlap;
    options.mode = *parse_decompose_mode(config.mode);
    options.global_verification = config.global_verification;
    options.decoding.temperature = config.temperature;
    options.decoding.seed = config.seed;
    options.segmenter = segmenter;
    // one concurrency budget: fan out across samples when there are many,
    // inside the sample when there is effectively one
    options.concurrency = data.samples.size() > 1 ? 1 : config.concurrency;

    const std::size_t n = data.samples.size();
    std::vector<std::optional<AuditResult>> slots(n);
    std::vector<std::optional<std::string>> failures(n);
    try {
        parallel_for(n, config.concurrency, [&](std::size_t i) {
            const Sample& sample = data.samples[i];
            try {
                slots[i] = run_pipeline(sample.context, sample.question, sample.answer, options, judge,
                                        sample.id);
            } catch (const ScriptMissError&) {
                throw;  // a gap in the script is a broken run, not a bad sample
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        });
    } catch (const ScriptMissError& e) {
        std::fprintf(stderr, "scripted judge error: %s\n", e.what());
        return 1;
    }

    std::vector<AuditResult> results;
    ordered_json failed_samples = ordered_json::array();
    std::size_t failed_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i]) {
            results.push_back(std::move(*slots[i]));
        } else {
            ++failed_count;
            failed_samples.push_back(ordered_json{{"id", data.samples[i].id},
                                                  {"error", failures[i].value_or("unknown failure")}});
        }
    }
    if (results.empty()) {
        std::fprintf(stderr, "no sample could be audited (%zu failed)\n", failed_count);
        return kExitNoSampleSucceeded;
    }

    try {
        write_results(results, config.results_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cannot write results: %s\n", e.what());
        return kExitConfigError;
    }

    const EvalSummary metrics = compute_metrics(results, data.samples);
    const FlagTotals flags = tally_flags(results);
    CostLedger usage;
    for (const AuditResult& r : results) usage += r.usage;

    ordered_json summary;
    summary["schema"] = "summary-v1";
    summary["config"] = config_echo(config, prices);
    summary["config_hash"] = [&] {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(summary["config"].dump())));
        return std::string(buf);
    }();
    summary["dataset"] = ordered_json{{"loaded", data.samples.size()},
                                      {"rejected_lines", data.errors.size()}};
    summary["samples"] = ordered_json{{"audited", results.size()}, {"failed", failed_count}};
    summary["failed_samples"] = std::move(failed_samples);
    summary["metrics"] = metrics_to_json(metrics);
    summary["flags"] = ordered_json{{"degraded", flags.degraded},
                                    {"repaired", flags.repaired},
                                    {"ungrounded", flags.ungrounded},
                                    {"empty_claim_sets", flags.empty_claim_sets},
                                    {"rr_violations", flags.rr_violations}};
    ordered_json usage_doc;
    usage_doc["prompt_tokens"] = usage.prompt_tokens;
    usage_doc["completion_tokens"] = usage.completion_tokens;
    usage_doc["requests"] = ordered_json{{"decompose", usage.decompose_requests},
                                         {"local", usage.local_requests},
                                         {"global", usage.global_requests},
                                         {"total", usage.total_requests()}};
    usage_doc["cost_usd"] = prices ? ordered_json(usage.cost_usd(*prices)) : ordered_json(nullptr);
    summary["usage"] = std::move(usage_doc);

    try {
        std::ofstream out(config.summary_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write summary file: " + config.summary_path);
        out << summary.dump(2) << '\n';
        if (!config.report_path.empty()) {
            std::ofstream report(config.report_path, std::ios::binary);
            if (!report) throw std::runtime_error("cannot write report file: " + config.report_path);
            report << render_report_html(results, data.samples);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cannot write outputs: %s\n", e.what());
        return kExitConfigError;
    }

    std::printf("audited %zu sample(s), %zu failed; answer f1 %.4f; results: %s\n", results.size(),
                failed_count, metrics.answer.f1, config.results_path.c_str());
    return kExitOk;
}

nlohmann::ordered_json evaluate_only(const std::string& results_path, const std::string& dataset_path,
                                     const std::string& format_tag) {
    const std::vector<AuditResult> results = read_results(results_path);
    const LoadReport data = load_dataset(dataset_path, format_tag);

    std::vector<std::string> result_ids, sample_ids;
    for (const AuditResult& r : results) result_ids.push_back(r.sample_id);
    for (const Sample& s : data.samples) sample_ids.push_back(s.id);
    std::sort(result_ids.begin(), result_ids.end());
    std::sort(sample_ids.begin(), sample_ids.end());
    if (result_ids != sample_ids) {
        std::string detail;
        std::vector<std::string> missing, extra;
        std::set_difference(sample_ids.begin(), sample_ids.end(), result_ids.begin(), result_ids.end(),
                            std::back_inserter(missing));
        std::set_difference(result_ids.begin(), result_ids.end(), sample_ids.begin(), sample_ids.end(),
                            std::back_inserter(extra));
        for (std::size_t i = 0; i < missing.size() && i < 5; ++i) detail += " -" + missing[i];
        for (std::size_t i = 0; i < extra.size() && i < 5; ++i) detail += " +" + extra[i];
        throw std::runtime_error("results/dataset id mismatch (" + std::to_string(missing.size()) +
                                 " missing, " + std::to_string(extra.size()) + " extra):" + detail);
    }

    const EvalSummary metrics = compute_metrics(results, data.samples);
    ordered_json doc;
    doc["schema"] = "eval-v1";
    doc["results"] = results_path;
    doc["dataset"] = dataset_path;
    doc["format"] = format_tag;
    doc["samples"] = results.size();
    doc["metrics"] = metrics_to_json(metrics);
    return doc;
}

}  // namespace ragaudit
