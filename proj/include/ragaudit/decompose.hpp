#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragaudit/judge.hpp"
#include "ragaudit/segment.hpp"
#include "ragaudit/types.hpp"

namespace ragaudit {

enum class DecomposeMode : std::uint8_t {
    SentenceBased,  // per answer sentence; claims keep their source span
    Holistic,       // whole answer in one request; no span anchors
};

const char* to_string(DecomposeMode mode);
std::optional<DecomposeMode> parse_decompose_mode(std::string_view token);

// A recoverable per-stage failure recorded on the sample instead of aborting.
struct AuditError {
    std::string stage;
    std::optional<std::size_t> sentence_index;
    std::string detail;
};

struct DecomposeResult {
    std::vector<Claim> claims;       // ids 0..n-1 in answer order, deduplicated
    std::vector<AuditError> errors;  // sentences whose judge call failed
    CostLedger usage;
};

// Splits the answer into sentences and asks the judge to decompose each one,
// fanning out up to `concurrency` requests. Failed sentences contribute no
// claims and one error entry. Duplicate claims (ASCII case- and
// whitespace-insensitive) keep their earliest occurrence.
DecomposeResult decompose_sentence_based(std::string_view answer, Judge& judge,
                                         const SegmenterOptions& segmenter, const Decoding& decoding,
                                         int concurrency);

// One request over the whole answer. Claims carry no source span, so span
// localization is unavailable downstream.
DecomposeResult decompose_holistic(std::string_view answer, Judge& judge, const Decoding& decoding);

}  // namespace ragaudit
