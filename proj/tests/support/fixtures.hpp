#pragma once

// Hand-authored verification fixture shared by the unit and acceptance
// suites: a four-sentence context, a four-sentence answer decomposing into
// five claims, and a fully scripted judge whose trace is known by hand,
// including one claim the full-context pass revises from BASELESS to
// ENTAILED (its evidence lives in two distant sentences) and one claim that
// stays BASELESS everywhere.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragaudit/dataset.hpp"
#include "ragaudit/judge.hpp"
#include "ragaudit/types.hpp"

namespace fixtures {

using ragaudit::CharSpan;
using ragaudit::JudgeRequest;
using ragaudit::JudgeRole;
using ragaudit::Label;
using ragaudit::ScriptedJudge;
using ragaudit::TokenUsage;

inline const std::vector<std::string>& context_sentences() {
    static const std::vector<std::string> sentences = {
        "Our free trial is available only to new users who register an account.",
        "Each new user must complete identity verification before the trial starts.",
        "The trial period lasts 14 days from activation.",
        "A one-time extension of seven additional days may be requested before the trial expires.",
    };
    return sentences;
}

inline const std::vector<std::string>& answer_sentences() {
    static const std::vector<std::string> sentences = {
        "The policy applies to all users, and verification is not required.",
        "The free trial lasts 14 days.",
        "Verified new users can receive a one-time 7-day extension of the free trial.",
        "The trial includes priority email support.",
    };
    return sentences;
}

inline std::string join_sp(const std::vector<std::string>& parts) {
    std::string out;
    for (const std::string& p : parts) {
        if (!out.empty()) out += " ";
        out += p;
    }
    return out;
}

inline const std::string& context() {
    static const std::string text = join_sp(context_sentences());
    return text;
}

inline const std::string& answer() {
    static const std::string text = join_sp(answer_sentences());
    return text;
}

inline const std::string& question() {
    static const std::string text = "Who can use the free trial, and what does it include?";
    return text;
}

inline const std::vector<std::string>& claims() {
    static const std::vector<std::string> texts = {
        "The policy applies to all users.",
        "Verification is not required for the free trial.",
        "The free trial lasts 14 days.",
        "Verified new users can receive a one-time 7-day extension of the free trial.",
        "The trial includes priority email support.",
    };
    return texts;
}

// Spans verified by hand; sentences are single-space separated ASCII, so
// code points equal bytes here.
inline const std::vector<CharSpan>& context_spans() {
    static const std::vector<CharSpan> spans = {{0, 70}, {71, 145}, {146, 193}, {194, 282}};
    return spans;
}
inline constexpr std::size_t kContextLength = 282;

inline const std::vector<CharSpan>& answer_spans() {
    static const std::vector<CharSpan> spans = {{0, 66}, {67, 96}, {97, 173}, {174, 216}};
    return spans;
}
inline constexpr std::size_t kAnswerLength = 216;

// W=2, O=1 over four sentences: {s0,s1}, {s1,s2}, {s2,s3}.
inline std::string chunk_text(std::size_t first, std::size_t last) {
    std::vector<std::string> parts(context_sentences().begin() + static_cast<std::ptrdiff_t>(first),
                                   context_sentences().begin() + static_cast<std::ptrdiff_t>(last) + 1);
    return join_sp(parts);
}

inline constexpr TokenUsage kDecomposeUsage{120, 40};
inline constexpr TokenUsage kLocalUsage{80, 12};
inline constexpr TokenUsage kGlobalUsage{200, 30};

// Per-claim, per-chunk local assessments.
inline const std::vector<std::vector<Label>>& local_matrix() {
    using enum Label;
    static const std::vector<std::vector<Label>> matrix = {
        {Contradicted, Contradicted, Baseless},
        {Contradicted, Contradicted, Baseless},
        {Baseless, Entailed, Entailed},
        {Baseless, Baseless, Baseless},
        {Baseless, Baseless, Baseless},
    };
    return matrix;
}

inline const std::vector<Label>& expected_local() {
    using enum Label;
    static const std::vector<Label> labels = {Contradicted, Contradicted, Entailed, Baseless, Baseless};
    return labels;
}

inline const std::vector<Label>& expected_final() {
    using enum Label;
    static const std::vector<Label> labels = {Contradicted, Contradicted, Entailed, Entailed, Baseless};
    return labels;
}

// --- scripted judge --------------------------------------------------------

inline std::string decompose_doc(const std::vector<std::string>& claim_texts, TokenUsage usage) {
    nlohmann::ordered_json doc;
    doc["claims"] = claim_texts;
    doc["usage"] = {{"prompt_tokens", usage.prompt_tokens}, {"completion_tokens", usage.completion_tokens}};
    return doc.dump();
}

inline std::string verdict_doc(Label label, const std::vector<std::string>& evidence, TokenUsage usage) {
    nlohmann::ordered_json doc;
    doc["label"] = ragaudit::to_string(label);
    doc["evidence"] = evidence;
    doc["usage"] = {{"prompt_tokens", usage.prompt_tokens}, {"completion_tokens", usage.completion_tokens}};
    return doc.dump();
}

inline JudgeRequest decompose_request(const std::string& sentence) {
    JudgeRequest request;
    request.role = JudgeRole::Decompose;
    request.passage = sentence;
    return request;
}

inline JudgeRequest local_request(const std::string& claim, const std::string& chunk) {
    JudgeRequest request;
    request.role = JudgeRole::Local;
    request.claim = claim;
    request.passage = chunk;
    return request;
}

inline JudgeRequest global_request(const std::string& claim, Label local_label,
                                   const std::string& focus_chunk = {}) {
    JudgeRequest request;
    request.role = JudgeRole::Global;
    request.claim = claim;
    request.passage = context();
    request.local_label = local_label;
    if (!focus_chunk.empty()) request.focus = focus_chunk;
    return request;
}

// Scripts the judge for the whole golden trace. The same script set serves
// the global-verification-off mode, which simply never issues the GLOBAL
// requests.
inline void populate_golden_scripts(ScriptedJudge& judge) {
    const auto& s = context_sentences();
    const auto& a = answer_sentences();
    const auto& c = claims();

    judge.add_script(decompose_request(a[0]), decompose_doc({c[0], c[1]}, kDecomposeUsage));
    judge.add_script(decompose_request(a[1]), decompose_doc({c[2]}, kDecomposeUsage));
    judge.add_script(decompose_request(a[2]), decompose_doc({c[3]}, kDecomposeUsage));
    judge.add_script(decompose_request(a[3]), decompose_doc({c[4]}, kDecomposeUsage));

    const std::string chunk0 = chunk_text(0, 1);
    const std::string chunk1 = chunk_text(1, 2);
    const std::string chunk2 = chunk_text(2, 3);
    using enum Label;

    auto local = [&](std::size_t claim_index, const std::string& chunk, Label label,
                     std::vector<std::string> evidence) {
        judge.add_script(local_request(c[claim_index], chunk),
                         verdict_doc(label, std::move(evidence), kLocalUsage));
    };
    local(0, chunk0, Contradicted, {s[0]});
    local(0, chunk1, Contradicted, {s[1]});
    local(0, chunk2, Baseless, {});
    local(1, chunk0, Contradicted, {s[1]});
    local(1, chunk1, Contradicted, {s[1]});
    local(1, chunk2, Baseless, {});
    local(2, chunk0, Baseless, {});
    local(2, chunk1, Entailed, {s[2]});
    local(2, chunk2, Entailed, {s[2]});
    local(3, chunk0, Baseless, {});
    local(3, chunk1, Baseless, {});
    local(3, chunk2, Baseless, {});
    local(4, chunk0, Baseless, {});
    local(4, chunk1, Baseless, {});
    local(4, chunk2, Baseless, {});

    judge.add_script(global_request(c[0], Contradicted, chunk0), verdict_doc(Contradicted, {s[0]}, kGlobalUsage));
    judge.add_script(global_request(c[1], Contradicted, chunk0), verdict_doc(Contradicted, {s[1]}, kGlobalUsage));
    judge.add_script(global_request(c[2], Entailed, chunk1), verdict_doc(Entailed, {s[2]}, kGlobalUsage));
    // the revision case: no excerpt was decisive, but the full context
    // supports the claim through two distant sentences
    judge.add_script(global_request(c[3], Baseless), verdict_doc(Entailed, {s[1], s[3]}, kGlobalUsage));
    judge.add_script(global_request(c[4], Baseless), verdict_doc(Baseless, {}, kGlobalUsage));
}

inline ScriptedJudge golden_judge() {
    ScriptedJudge judge;
    populate_golden_scripts(judge);
    return judge;
}

// --- dataset fixtures -------------------------------------------------------

inline nlohmann::ordered_json golden_sample_json(const std::string& id) {
    nlohmann::ordered_json doc;
    doc["id"] = id;
    doc["task_type"] = "QA";
    doc["context"] = context();
    doc["question"] = question();
    doc["answer"] = answer();
    doc["gold_hallucinated"] = true;
    doc["gold_answer_spans"] = nlohmann::ordered_json::array(
        {nlohmann::ordered_json{{"start", 0}, {"end", 66}, {"tag", "Evident Conflict"}},
         nlohmann::ordered_json{{"start", 174}, {"end", 216}, {"tag", "Evident Baseless Info"}}});
    doc["gold_refuting_evidence"] =
        nlohmann::ordered_json::array({context_sentences()[0], context_sentences()[1]});
    return doc;
}

// Five-sample batch: three golden copies plus the two degenerate shapes
// (empty answer, empty context). Covers the vacuous-entailment path and the
// no-chunks fast path in one file.
inline void write_batch_dataset(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << golden_sample_json("g0").dump() << "\n";
    out << golden_sample_json("g1").dump() << "\n";
    nlohmann::ordered_json empty_answer;
    empty_answer["id"] = "empty-answer";
    empty_answer["task_type"] = "QA";
    empty_answer["context"] = context();
    empty_answer["question"] = question();
    empty_answer["answer"] = "";
    empty_answer["gold_hallucinated"] = false;
    out << empty_answer.dump() << "\n";
    nlohmann::ordered_json empty_context;
    empty_context["id"] = "empty-context";
    empty_context["task_type"] = "QA";
    empty_context["context"] = "";
    empty_context["question"] = question();
    empty_context["answer"] = answer();
    empty_context["gold_hallucinated"] = true;
    out << empty_context.dump() << "\n";
    out << golden_sample_json("g2").dump() << "\n";
}

inline void write_price_table(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << R"({"prompt_usd_per_1m": 0.15, "completion_usd_per_1m": 0.6})" << "\n";
}

// Unique writable scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    const auto base = std::filesystem::temp_directory_path() / ("ragaudit-" + tag);
    std::filesystem::remove_all(base);
    std::filesystem::create_directories(base);
    return base;
}

}  // namespace fixtures
