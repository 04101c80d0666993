#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ragaudit/types.hpp"

namespace ragaudit {

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
};

// Fills precision/recall/f1 from the counts with the 0/0 -> 0 convention.
PRF prf_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

// Answer-level detection scores; the positive class is "hallucinated".
// Throws std::invalid_argument on length mismatch.
PRF answer_prf(const std::vector<bool>& predictions, const std::vector<bool>& gold);

struct SpanEvalInput {
    std::vector<CharSpan> gold_spans;
    std::vector<CharSpan> pred_spans;
    std::size_t text_length = 0;  // code points; spans must fit inside
};

// Character-level micro scores pooled over samples. TP counts characters in
// both unions, FP characters predicted but not gold, FN the reverse. The
// interval arithmetic equals per-character set counting exactly. Spans
// outside [0, text_length] throw std::out_of_range.
PRF span_micro_prf(std::span<const SpanEvalInput> samples);

// Same arithmetic applied to context-side offsets (predicted evidence vs
// grounded gold refuting evidence on correctly-predicted conflict cases).
PRF evidence_grounding_prf(std::span<const SpanEvalInput> cases);

}  // namespace ragaudit
