#include "ragaudit/decompose.hpp"

#include <set>

#include "ragaudit/parallel.hpp"

namespace ragaudit {

const char* to_string(DecomposeMode mode) {
    return mode == DecomposeMode::SentenceBased ? "sentence" : "holistic";
}

std::optional<DecomposeMode> parse_decompose_mode(std::string_view token) {
    if (token == "sentence") return DecomposeMode::SentenceBased;
    if (token == "holistic") return DecomposeMode::Holistic;
    return std::nullopt;
}

namespace {

// Dedup key: ASCII-lowercased with whitespace runs collapsed to one space.
std::string normalized_claim_key(const std::string& text) {
    std::string key;
    key.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending_space = !key.empty();
            continue;
        }
        if (pending_space) {
            key.push_back(' ');
            pending_space = false;
        }
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        key.push_back(c);
    }
    return key;
}

}  // namespace

DecomposeResult decompose_sentence_based(std::string_view answer, Judge& judge,
                                         const SegmenterOptions& segmenter, const Decoding& decoding,
                                         int concurrency) {
    DecomposeResult result;
    const std::vector<Sentence> sentences = segment_sentences(answer, segmenter);
    if (sentences.empty()) return result;

    struct SentenceOutput {
        std::vector<std::string> claims;
        std::optional<std::string> error;
        TokenUsage usage;
    };
    std::vector<SentenceOutput> outputs(sentences.size());

    parallel_for(sentences.size(), concurrency, [&](std::size_t i) {
        JudgeRequest request;
        request.role = JudgeRole::Decompose;
        request.passage = sentences[i].text;
        request.decoding = decoding;
        try {
            JudgeResponse response = judge.submit(request);
            outputs[i].claims = std::move(response.claims);
            outputs[i].usage = response.usage;
        } catch (const JudgeError& e) {
            outputs[i].error = e.what();
        }
    });

    std::set<std::string> seen;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        result.usage.count_request(JudgeRole::Decompose);
        if (outputs[i].error) {
            result.errors.push_back({"decompose", i, *outputs[i].error});
            continue;
        }
        result.usage.add_usage(outputs[i].usage);
        for (std::string& text : outputs[i].claims) {
            if (!seen.insert(normalized_claim_key(text)).second) continue;
            Claim claim;
            claim.id = result.claims.size();
            claim.text = std::move(text);
            claim.source_sentence_index = i;
            claim.source_span = sentences[i].span;
            result.claims.push_back(std::move(claim));
        }
    }
    return result;
}

DecomposeResult decompose_holistic(std::string_view answer, Judge& judge, const Decoding& decoding) {
    DecomposeResult result;
    bool blank = true;
    for (char c : answer) {
        if (c != ' ' && c != '\t' && c != '\n' && c != '\r' && c != '\f' && c != '\v') {
            blank = false;
            break;
        }
    }
    if (blank) return result;

    JudgeRequest request;
    request.role = JudgeRole::Decompose;
    request.passage = std::string(answer);
    request.decoding = decoding;
    result.usage.count_request(JudgeRole::Decompose);
    try {
        JudgeResponse response = judge.submit(request);
        result.usage.add_usage(response.usage);
        std::set<std::string> seen;
        for (std::string& text : response.claims) {
            if (!seen.insert(normalized_claim_key(text)).second) continue;
            Claim claim;
            claim.id = result.claims.size();
            claim.text = std::move(text);
            result.claims.push_back(std::move(claim));
        }
    } catch (const JudgeError& e) {
        result.errors.push_back({"decompose", std::nullopt, e.what()});
    }
    return result;
}

}  // namespace ragaudit
