#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ragaudit {

// Verdict alphabet. BASELESS means the context contains no usable evidence
// either way; it is distinct from CONTRADICTED and still counts as a
// hallucination at the answer level.
enum class Label : std::uint8_t {
    Entailed,
    Contradicted,
    Baseless,
};

const char* to_string(Label label);

// Strict: accepts exactly "ENTAILED", "CONTRADICTED", "BASELESS".
std::optional<Label> parse_label(std::string_view token);

// Half-open [start, end) range counted in Unicode code points.
struct CharSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    bool empty() const { return start >= end; }
    std::size_t length() const { return end > start ? end - start : 0; }

    friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct Claim {
    std::size_t id = 0;
    std::string text;
    // Populated in sentence-based decomposition only; holistic claims carry
    // no answer-span anchor, which is why span localization refuses them.
    std::optional<std::size_t> source_sentence_index;
    std::optional<CharSpan> source_span;

    friend bool operator==(const Claim&, const Claim&) = default;
};

// A grounded piece of context evidence. `span` is the hull of the context
// sentences the matched text intersects; `text` is the exact context
// substring at that span (so it always re-anchors verbatim).
struct EvidenceSpan {
    std::vector<std::size_t> sentence_indices;
    CharSpan span;
    std::string text;
    int tier = 1;           // 1 exact, 2 whitespace/case-normalized, 3 token-overlap window
    double score = 1.0;     // overlap ratio for tier 3, 1.0 otherwise
    std::size_t occurrences = 1;  // exact-match count in the context (tier 1)

    friend bool operator==(const EvidenceSpan&, const EvidenceSpan&) = default;
};

struct VerdictFlags {
    bool degraded = false;    // a judge call failed, or an ENT/CON verdict lost all evidence
    bool repaired = false;    // judge emitted BASELESS with evidence; evidence was dropped
    bool ungrounded = false;  // at least one evidence text could not be anchored in the context

    bool any() const { return degraded || repaired || ungrounded; }

    friend bool operator==(const VerdictFlags&, const VerdictFlags&) = default;
};

struct ClaimVerdict {
    std::size_t claim_id = 0;
    Label local_label = Label::Baseless;
    // (chunk index, assessment) pairs in chunk order
    std::vector<std::pair<std::size_t, Label>> chunk_assessments;
    std::optional<std::size_t> focus_chunk;
    Label final_label = Label::Baseless;
    std::vector<EvidenceSpan> evidence;
    VerdictFlags flags;
};

struct AnswerVerdict {
    Label label = Label::Entailed;
    bool hallucinated = false;

    friend bool operator==(const AnswerVerdict&, const AnswerVerdict&) = default;
};

enum class RrClause : std::uint8_t {
    BaselessWithEvidence,  // BASELESS verdict carries evidence spans
    MissingEvidence,       // ENTAILED/CONTRADICTED verdict has no evidence span
    EvidenceMismatch,      // evidence text differs from the context substring at its span
};

const char* to_string(RrClause clause);

struct RrViolation {
    std::size_t claim_id = 0;
    RrClause clause = RrClause::MissingEvidence;
    std::string detail;
};

}  // namespace ragaudit
