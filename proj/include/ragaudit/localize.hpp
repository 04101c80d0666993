#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "ragaudit/segment.hpp"
#include "ragaudit/types.hpp"
#include "ragaudit/unicode.hpp"

namespace ragaudit {

// Answer-side character spans per verdict class. `hallucinated` is the merged
// union of `contradicted` and `baseless`; per character the classes resolve
// by severity CONTRADICTED > BASELESS > ENTAILED.
struct AnswerSpanSet {
    std::vector<CharSpan> contradicted;
    std::vector<CharSpan> baseless;
    std::vector<CharSpan> entailed;
    std::vector<CharSpan> hallucinated;
};

// Sorts and unions spans; overlapping or touching inputs merge, empty inputs
// drop out. The result is strictly ascending and pairwise disjoint.
std::vector<CharSpan> merge_spans(std::vector<CharSpan> spans);

// Projects claim verdicts back onto the answer via each claim's source
// sentence span. Claims must carry source spans (sentence-based mode);
// otherwise throws std::invalid_argument, since holistic claims have no
// answer anchor.
AnswerSpanSet localize_answer(const std::vector<Claim>& claims,
                              const std::vector<ClaimVerdict>& verdicts);

// Anchors a quoted evidence text in the context. Tier 1: exact substring
// (earliest match; occurrence count recorded). Tier 2: match after collapsing
// whitespace runs and ASCII case, offsets recovered through a normalization
// map. Tier 3: the contiguous window of at most 8 sentences with the best
// token-overlap ratio against the quote, accepted at >= 0.8 (ties: higher
// ratio, then fewer sentences, then earliest). The returned span is the hull
// of the context sentences the match intersects. No tier fires: nullopt.
std::optional<EvidenceSpan> ground_evidence(std::string_view evidence_text, const Utf8Map& context,
                                            const std::vector<Sentence>& sentences);
std::optional<EvidenceSpan> ground_evidence(std::string_view evidence_text, std::string_view context,
                                            const std::vector<Sentence>& sentences);

}  // namespace ragaudit
