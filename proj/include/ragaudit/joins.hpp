#pragma once

#include <initializer_list>
#include <span>
#include <vector>

#include "ragaudit/types.hpp"

namespace ragaudit {

// Chunk-level merge for one claim. One contradicting chunk dominates, one
// supporting chunk suffices, otherwise no chunk was decisive:
// CONTRADICTED > ENTAILED > BASELESS. Empty input is a pipeline bug and
// throws std::invalid_argument.
Label or_join(std::span<const Label> labels);
Label or_join(std::initializer_list<Label> labels);

// Answer-level merge over final claim labels. Any contradiction poisons the
// answer and any unsupported claim blocks full entailment:
// CONTRADICTED > BASELESS > ENTAILED. An empty claim set is vacuously
// ENTAILED.
Label and_join(std::span<const Label> labels);
Label and_join(std::initializer_list<Label> labels);

// and_join plus the hallucination bit (anything other than ENTAILED).
AnswerVerdict answer_verdict(std::span<const Label> final_labels);

// Consistency check over a finished trace. Returns one violation per broken
// clause: (a) BASELESS verdicts must carry no evidence, (b) ENTAILED and
// CONTRADICTED verdicts need at least one span, (c) every evidence text must
// equal the context substring at its span (code-point offsets).
std::vector<RrViolation> rr_check(const std::vector<ClaimVerdict>& trace, std::string_view context);

}  // namespace ragaudit
