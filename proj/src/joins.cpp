#include "ragaudit/joins.hpp"

#include <stdexcept>

#include "ragaudit/unicode.hpp"

namespace ragaudit {

const char* to_string(Label label) {
    switch (label) {
        case Label::Entailed: return "ENTAILED";
        case Label::Contradicted: return "CONTRADICTED";
        case Label::Baseless: return "BASELESS";
    }
    return "BASELESS";
}

std::optional<Label> parse_label(std::string_view token) {
    if (token == "ENTAILED") return Label::Entailed;
    if (token == "CONTRADICTED") return Label::Contradicted;
    if (token == "BASELESS") return Label::Baseless;
    return std::nullopt;
}

const char* to_string(RrClause clause) {
    switch (clause) {
        case RrClause::BaselessWithEvidence: return "baseless_with_evidence";
        case RrClause::MissingEvidence: return "missing_evidence";
        case RrClause::EvidenceMismatch: return "evidence_mismatch";
    }
    return "evidence_mismatch";
}

Label or_join(std::span<const Label> labels) {
    if (labels.empty())
        throw std::invalid_argument("or_join: empty assessment set (no chunks were judged)");
    bool saw_entailed = false;
    for (Label l : labels) {
        if (l == Label::Contradicted) return Label::Contradicted;
        if (l == Label::Entailed) saw_entailed = true;
    }
    return saw_entailed ? Label::Entailed : Label::Baseless;
}

Label or_join(std::initializer_list<Label> labels) {
    return or_join(std::span<const Label>(labels.begin(), labels.size()));
}

Label and_join(std::span<const Label> labels) {
    bool saw_baseless = false;
    for (Label l : labels) {
        if (l == Label::Contradicted) return Label::Contradicted;
        if (l == Label::Baseless) saw_baseless = true;
    }
    return saw_baseless ? Label::Baseless : Label::Entailed;
}

Label and_join(std::initializer_list<Label> labels) {
    return and_join(std::span<const Label>(labels.begin(), labels.size()));
}

AnswerVerdict answer_verdict(std::span<const Label> final_labels) {
    AnswerVerdict v;
    v.label = and_join(final_labels);
    v.hallucinated = v.label != Label::Entailed;
    return v;
}

std::vector<RrViolation> rr_check(const std::vector<ClaimVerdict>& trace, std::string_view context) {
    std::vector<RrViolation> violations;
    const Utf8Map map(context);
    for (const ClaimVerdict& v : trace) {
        if (v.final_label == Label::Baseless) {
            if (!v.evidence.empty()) {
                violations.push_back({v.claim_id, RrClause::BaselessWithEvidence,
                                      "BASELESS verdict carries " + std::to_string(v.evidence.size()) +
                                          " evidence span(s)"});
            }
            continue;
        }
        if (v.evidence.empty()) {
            violations.push_back({v.claim_id, RrClause::MissingEvidence,
                                  std::string(to_string(v.final_label)) + " verdict has no evidence span"});
            continue;
        }
        for (const EvidenceSpan& e : v.evidence) {
            if (e.span.start > e.span.end || e.span.end > map.size()) {
                violations.push_back({v.claim_id, RrClause::EvidenceMismatch,
                                      "evidence span [" + std::to_string(e.span.start) + ", " +
                                          std::to_string(e.span.end) + ") exceeds context length " +
                                          std::to_string(map.size())});
                continue;
            }
            if (map.substr(e.span.start, e.span.end) != e.text) {
                violations.push_back({v.claim_id, RrClause::EvidenceMismatch,
                                      "evidence text does not match the context substring at [" +
                                          std::to_string(e.span.start) + ", " + std::to_string(e.span.end) + ")"});
            }
        }
    }
    return violations;
}

}  // namespace ragaudit
