#include "ragaudit/dataset.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ragaudit/joins.hpp"
#include "ragaudit/unicode.hpp"

namespace ragaudit {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(TaskType task) {
    switch (task) {
        case TaskType::QA: return "QA";
        case TaskType::Summary: return "Summary";
        case TaskType::Data2Text: return "Data2Text";
    }
    return "QA";
}

std::optional<TaskType> parse_task_type(std::string_view token) {
    std::string lower(token);
    for (char& c : lower)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (lower == "qa" || lower == "question answering") return TaskType::QA;
    if (lower == "summary" || lower == "summarization") return TaskType::Summary;
    if (lower == "data2text" || lower == "data2txt" || lower == "data-to-text") return TaskType::Data2Text;
    return std::nullopt;
}

bool is_known_format(std::string_view format_tag) {
    return format_tag == "native" || format_tag == "ragtruth" || format_tag == "ragtruth-plus" ||
           format_tag == "ragtruth-enhance";
}

namespace {

std::string require_string(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_string())
        throw std::runtime_error(std::string("missing or non-string '") + key + "'");
    return doc[key].get<std::string>();
}

std::string id_to_string(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<std::int64_t>());
    if (value.is_number_unsigned()) return std::to_string(value.get<std::uint64_t>());
    throw std::runtime_error("sample id is neither a string nor an integer");
}

std::vector<GoldSpan> parse_gold_spans(const json& arr, const char* start_key, const char* end_key,
                                       const char* tag_key, std::size_t answer_cp_length) {
    if (!arr.is_array()) throw std::runtime_error("gold span list is not an array");
    std::vector<GoldSpan> spans;
    for (const json& item : arr) {
        if (!item.is_object() || !item.contains(start_key) || !item.contains(end_key) ||
            !item[start_key].is_number_integer() || !item[end_key].is_number_integer())
            throw std::runtime_error("gold span entry lacks integer offsets");
        const auto start = item[start_key].get<std::int64_t>();
        const auto end = item[end_key].get<std::int64_t>();
        if (start < 0 || end < start || static_cast<std::size_t>(end) > answer_cp_length)
            throw std::runtime_error("gold span [" + std::to_string(start) + ", " + std::to_string(end) +
                                     ") falls outside the answer (length " +
                                     std::to_string(answer_cp_length) + ")");
        GoldSpan span;
        span.span = {static_cast<std::size_t>(start), static_cast<std::size_t>(end)};
        if (item.contains(tag_key) && item[tag_key].is_string()) span.tag = item[tag_key].get<std::string>();
        spans.push_back(std::move(span));
    }
    return spans;
}

std::vector<std::string> parse_string_list(const json& arr, const char* what) {
    if (!arr.is_array()) throw std::runtime_error(std::string(what) + " is not an array");
    std::vector<std::string> out;
    for (const json& item : arr) {
        if (!item.is_string()) throw std::runtime_error(std::string(what) + " contains a non-string");
        out.push_back(item.get<std::string>());
    }
    return out;
}

Sample parse_native(const json& doc) {
    Sample sample;
    sample.id = id_to_string(doc.contains("id") ? doc["id"] : json());
    if (doc.contains("task_type")) {
        const auto task = parse_task_type(require_string(doc, "task_type"));
        if (!task) throw std::runtime_error("unknown task_type '" + doc["task_type"].get<std::string>() + "'");
        sample.task_type = *task;
    }
    sample.context = require_string(doc, "context");
    if (doc.contains("question") && !doc["question"].is_null())
        sample.question = require_string(doc, "question");
    sample.answer = require_string(doc, "answer");
    if (doc.contains("gold_hallucinated") && !doc["gold_hallucinated"].is_null()) {
        if (!doc["gold_hallucinated"].is_boolean())
            throw std::runtime_error("'gold_hallucinated' is not a boolean");
        sample.gold_hallucinated = doc["gold_hallucinated"].get<bool>();
    }
    if (doc.contains("gold_answer_spans") && !doc["gold_answer_spans"].is_null())
        sample.gold_answer_spans =
            parse_gold_spans(doc["gold_answer_spans"], "start", "end", "tag", cp_length(sample.answer));
    if (doc.contains("gold_refuting_evidence") && !doc["gold_refuting_evidence"].is_null())
        sample.gold_refuting_evidence =
            parse_string_list(doc["gold_refuting_evidence"], "'gold_refuting_evidence'");
    return sample;
}

// The public corpus family. One adapter covers the base corpus, the "++"
// relabeling, and the refuting-evidence-enhanced variant; they share record
// structure and differ in which optional fields are populated.
Sample parse_ragtruth(const json& doc) {
    Sample sample;
    for (const char* key : {"id", "response_id", "source_id"}) {
        if (doc.contains(key)) {
            sample.id = id_to_string(doc[key]);
            break;
        }
    }
    if (sample.id.empty()) throw std::runtime_error("record carries no id/response_id/source_id");

    const json* source_info = nullptr;
    if (doc.contains("source_info") && doc["source_info"].is_object()) source_info = &doc["source_info"];

    std::optional<std::string> task_token;
    if (doc.contains("task_type") && doc["task_type"].is_string())
        task_token = doc["task_type"].get<std::string>();
    else if (source_info && source_info->contains("task_type") && (*source_info)["task_type"].is_string())
        task_token = (*source_info)["task_type"].get<std::string>();
    if (task_token) {
        const auto task = parse_task_type(*task_token);
        if (!task) throw std::runtime_error("unknown task_type '" + *task_token + "'");
        sample.task_type = *task;
    }

    auto context_from = [](const json& value) -> std::string {
        if (value.is_string()) return value.get<std::string>();
        if (value.is_array()) {
            std::string joined;
            for (const json& part : value) {
                if (!part.is_string()) return value.dump(2);
                if (!joined.empty()) joined += "\n";
                joined += part.get<std::string>();
            }
            return joined;
        }
        return value.dump(2);  // data-to-text records keep structured sources
    };
    if (doc.contains("context") && doc["context"].is_string()) {
        sample.context = doc["context"].get<std::string>();
    } else if (source_info) {
        if (source_info->contains("passages")) sample.context = context_from((*source_info)["passages"]);
        else if (source_info->contains("source")) sample.context = context_from((*source_info)["source"]);
        else sample.context = source_info->dump(2);
    } else if (doc.contains("source")) {
        sample.context = context_from(doc["source"]);
    } else {
        throw std::runtime_error("record carries no context/source_info/source");
    }

    if (source_info && source_info->contains("question") && (*source_info)["question"].is_string())
        sample.question = (*source_info)["question"].get<std::string>();
    else if (doc.contains("question") && doc["question"].is_string())
        sample.question = doc["question"].get<std::string>();

    if (doc.contains("response") && doc["response"].is_string())
        sample.answer = doc["response"].get<std::string>();
    else if (doc.contains("answer") && doc["answer"].is_string())
        sample.answer = doc["answer"].get<std::string>();
    else
        throw std::runtime_error("record carries no response/answer");

    if (doc.contains("labels") && !doc["labels"].is_null()) {
        sample.gold_answer_spans =
            parse_gold_spans(doc["labels"], "start", "end", "label_type", cp_length(sample.answer));
    }
    if (doc.contains("hallucination") && doc["hallucination"].is_boolean())
        sample.gold_hallucinated = doc["hallucination"].get<bool>();
    else if (sample.gold_answer_spans)
        sample.gold_hallucinated = !sample.gold_answer_spans->empty();

    for (const char* key : {"refuting_evidence", "evidence"}) {
        if (doc.contains(key) && doc[key].is_array()) {
            sample.gold_refuting_evidence = parse_string_list(doc[key], key);
            break;
        }
    }
    return sample;
}

// --- results serialization ------------------------------------------------

ordered_json span_to_json(const CharSpan& span) {
    return ordered_json{{"start", span.start}, {"end", span.end}};
}

CharSpan span_from_json(const json& doc) {
    return CharSpan{doc.at("start").get<std::size_t>(), doc.at("end").get<std::size_t>()};
}

ordered_json span_list_to_json(const std::vector<CharSpan>& spans) {
    ordered_json arr = ordered_json::array();
    for (const CharSpan& s : spans) arr.push_back(ordered_json::array({s.start, s.end}));
    return arr;
}

std::vector<CharSpan> span_list_from_json(const json& arr) {
    std::vector<CharSpan> spans;
    for (const json& item : arr)
        spans.push_back(CharSpan{item.at(0).get<std::size_t>(), item.at(1).get<std::size_t>()});
    return spans;
}

std::optional<RrClause> parse_rr_clause(std::string_view token) {
    if (token == "baseless_with_evidence") return RrClause::BaselessWithEvidence;
    if (token == "missing_evidence") return RrClause::MissingEvidence;
    if (token == "evidence_mismatch") return RrClause::EvidenceMismatch;
    return std::nullopt;
}

constexpr const char* kResultsSchema = "results-v1";

}  // namespace

LoadReport load_dataset(const std::string& path, const std::string& format_tag) {
    if (!is_known_format(format_tag))
        throw DatasetError("unknown dataset format '" + format_tag +
                           "' (expected native, ragtruth, ragtruth-plus, or ragtruth-enhance)");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot read dataset file: " + path);

    LoadReport report;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = true;
        for (char c : line) {
            if (c != ' ' && c != '\t') {
                blank = false;
                break;
            }
        }
        if (blank) continue;
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            report.errors.push_back({line_number, "line is not a JSON object"});
            continue;
        }
        try {
            report.samples.push_back(format_tag == "native" ? parse_native(doc) : parse_ragtruth(doc));
        } catch (const std::exception& e) {
            report.errors.push_back({line_number, e.what()});
        }
    }
    if (report.samples.empty())
        throw DatasetError("no valid records in " + path + " (" + std::to_string(report.errors.size()) +
                           " line(s) rejected)");
    return report;
}

std::string render_result_line(const AuditResult& result) {
    ordered_json doc;
    doc["schema"] = kResultsSchema;
    doc["id"] = result.sample_id;
    doc["mode"] = to_string(result.mode);
    doc["answer_label"] = to_string(result.answer.label);
    doc["hallucinated"] = result.answer.hallucinated;
    doc["context_length"] = result.context_length;
    doc["answer_length"] = result.answer_length;
    doc["chunk_count"] = result.chunk_count;
    doc["empty_claim_set"] = result.empty_claim_set;

    ordered_json claims = ordered_json::array();
    for (const Claim& c : result.claims) {
        ordered_json item;
        item["id"] = c.id;
        item["text"] = c.text;
        item["sentence_index"] =
            c.source_sentence_index ? ordered_json(*c.source_sentence_index) : ordered_json(nullptr);
        item["span"] = c.source_span ? span_to_json(*c.source_span) : ordered_json(nullptr);
        claims.push_back(std::move(item));
    }
    doc["claims"] = std::move(claims);

    ordered_json verdicts = ordered_json::array();
    for (const ClaimVerdict& v : result.trace) {
        ordered_json item;
        item["claim_id"] = v.claim_id;
        item["local_label"] = to_string(v.local_label);
        ordered_json assessments = ordered_json::array();
        for (const auto& [chunk, label] : v.chunk_assessments)
            assessments.push_back(ordered_json::array({chunk, to_string(label)}));
        item["chunk_assessments"] = std::move(assessments);
        item["focus_chunk"] = v.focus_chunk ? ordered_json(*v.focus_chunk) : ordered_json(nullptr);
        item["final_label"] = to_string(v.final_label);
        ordered_json evidence = ordered_json::array();
        for (const EvidenceSpan& e : v.evidence) {
            ordered_json span;
            span["sentence_indices"] = e.sentence_indices;
            span["start"] = e.span.start;
            span["end"] = e.span.end;
            span["text"] = e.text;
            span["tier"] = e.tier;
            span["score"] = e.score;
            span["occurrences"] = e.occurrences;
            evidence.push_back(std::move(span));
        }
        item["evidence"] = std::move(evidence);
        item["flags"] = ordered_json{{"degraded", v.flags.degraded},
                                     {"repaired", v.flags.repaired},
                                     {"ungrounded", v.flags.ungrounded}};
        verdicts.push_back(std::move(item));
    }
    doc["verdicts"] = std::move(verdicts);

    if (result.answer_spans) {
        const AnswerSpanSet& spans = *result.answer_spans;
        doc["answer_spans"] = ordered_json{{"contradicted", span_list_to_json(spans.contradicted)},
                                           {"baseless", span_list_to_json(spans.baseless)},
                                           {"entailed", span_list_to_json(spans.entailed)},
                                           {"hallucinated", span_list_to_json(spans.hallucinated)}};
    } else {
        doc["answer_spans"] = nullptr;
    }

    ordered_json violations = ordered_json::array();
    for (const RrViolation& v : result.rr_violations) {
        violations.push_back(ordered_json{
            {"claim_id", v.claim_id}, {"clause", to_string(v.clause)}, {"detail", v.detail}});
    }
    doc["rr_violations"] = std::move(violations);

    ordered_json errors = ordered_json::array();
    for (const AuditError& e : result.errors) {
        ordered_json item;
        item["stage"] = e.stage;
        item["sentence_index"] =
            e.sentence_index ? ordered_json(*e.sentence_index) : ordered_json(nullptr);
        item["detail"] = e.detail;
        errors.push_back(std::move(item));
    }
    doc["errors"] = std::move(errors);

    doc["usage"] = ordered_json{{"prompt_tokens", result.usage.prompt_tokens},
                                {"completion_tokens", result.usage.completion_tokens},
                                {"requests", ordered_json{{"decompose", result.usage.decompose_requests},
                                                          {"local", result.usage.local_requests},
                                                          {"global", result.usage.global_requests}}}};
    return doc.dump();
}

void write_results(const std::vector<AuditResult>& results, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write results file: " + path);
    for (const AuditResult& result : results) out << render_result_line(result) << '\n';
}

std::vector<AuditResult> read_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read results file: " + path);
    std::vector<AuditResult> results;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
            if (doc.at("schema").get<std::string>() != kResultsSchema)
                throw std::runtime_error("unsupported results schema");

            AuditResult r;
            r.sample_id = doc.at("id").get<std::string>();
            const auto mode = parse_decompose_mode(doc.at("mode").get<std::string>());
            if (!mode) throw std::runtime_error("unknown mode");
            r.mode = *mode;
            const auto answer_label = parse_label(doc.at("answer_label").get<std::string>());
            if (!answer_label) throw std::runtime_error("unknown answer label");
            r.answer.label = *answer_label;
            r.answer.hallucinated = doc.at("hallucinated").get<bool>();
            r.context_length = doc.at("context_length").get<std::size_t>();
            r.answer_length = doc.at("answer_length").get<std::size_t>();
            r.chunk_count = doc.at("chunk_count").get<std::size_t>();
            r.empty_claim_set = doc.at("empty_claim_set").get<bool>();

            for (const json& item : doc.at("claims")) {
                Claim c;
                c.id = item.at("id").get<std::size_t>();
                c.text = item.at("text").get<std::string>();
                if (!item.at("sentence_index").is_null())
                    c.source_sentence_index = item.at("sentence_index").get<std::size_t>();
                if (!item.at("span").is_null()) c.source_span = span_from_json(item.at("span"));
                r.claims.push_back(std::move(c));
            }

            for (const json& item : doc.at("verdicts")) {
                ClaimVerdict v;
                v.claim_id = item.at("claim_id").get<std::size_t>();
                const auto local = parse_label(item.at("local_label").get<std::string>());
                const auto final_label = parse_label(item.at("final_label").get<std::string>());
                if (!local || !final_label) throw std::runtime_error("unknown verdict label");
                v.local_label = *local;
                v.final_label = *final_label;
                for (const json& pair : item.at("chunk_assessments")) {
                    const auto label = parse_label(pair.at(1).get<std::string>());
                    if (!label) throw std::runtime_error("unknown assessment label");
                    v.chunk_assessments.emplace_back(pair.at(0).get<std::size_t>(), *label);
                }
                if (!item.at("focus_chunk").is_null())
                    v.focus_chunk = item.at("focus_chunk").get<std::size_t>();
                for (const json& e : item.at("evidence")) {
                    EvidenceSpan span;
                    span.sentence_indices = e.at("sentence_indices").get<std::vector<std::size_t>>();
                    span.span = {e.at("start").get<std::size_t>(), e.at("end").get<std::size_t>()};
                    span.text = e.at("text").get<std::string>();
                    span.tier = e.at("tier").get<int>();
                    span.score = e.at("score").get<double>();
                    span.occurrences = e.at("occurrences").get<std::size_t>();
                    v.evidence.push_back(std::move(span));
                }
                const json& flags = item.at("flags");
                v.flags.degraded = flags.at("degraded").get<bool>();
                v.flags.repaired = flags.at("repaired").get<bool>();
                v.flags.ungrounded = flags.at("ungrounded").get<bool>();
                r.trace.push_back(std::move(v));
            }

            if (!doc.at("answer_spans").is_null()) {
                const json& spans = doc.at("answer_spans");
                AnswerSpanSet set;
                set.contradicted = span_list_from_json(spans.at("contradicted"));
                set.baseless = span_list_from_json(spans.at("baseless"));
                set.entailed = span_list_from_json(spans.at("entailed"));
                set.hallucinated = span_list_from_json(spans.at("hallucinated"));
                r.answer_spans = std::move(set);
            }

            for (const json& item : doc.at("rr_violations")) {
                RrViolation v;
                v.claim_id = item.at("claim_id").get<std::size_t>();
                const auto clause = parse_rr_clause(item.at("clause").get<std::string>());
                if (!clause) throw std::runtime_error("unknown rr clause");
                v.clause = *clause;
                v.detail = item.at("detail").get<std::string>();
                r.rr_violations.push_back(std::move(v));
            }

            for (const json& item : doc.at("errors")) {
                AuditError e;
                e.stage = item.at("stage").get<std::string>();
                if (!item.at("sentence_index").is_null())
                    e.sentence_index = item.at("sentence_index").get<std::size_t>();
                e.detail = item.at("detail").get<std::string>();
                r.errors.push_back(std::move(e));
            }

            const json& usage = doc.at("usage");
            r.usage.prompt_tokens = usage.at("prompt_tokens").get<std::uint64_t>();
            r.usage.completion_tokens = usage.at("completion_tokens").get<std::uint64_t>();
            const json& requests = usage.at("requests");
            r.usage.decompose_requests = requests.at("decompose").get<std::uint64_t>();
            r.usage.local_requests = requests.at("local").get<std::uint64_t>();
            r.usage.global_requests = requests.at("global").get<std::uint64_t>();
            results.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw std::runtime_error("results file " + path + " line " + std::to_string(line_number) +
                                     ": " + e.what());
        }
    }
    return results;
}

}  // namespace ragaudit
