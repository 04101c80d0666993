#include "ragaudit/prompts.hpp"

namespace ragaudit {

namespace {

constexpr const char* kDecomposeSystem =
    R"(You split one sentence of an answer into atomic factual claims.

Rules:
- Each claim states exactly one verifiable proposition.
- Each claim must be understandable on its own: resolve pronouns and other references using the sentence itself, and keep negation, quantities, units, dates and hedges exactly as written.
- Do not add information, do not merge distinct propositions, do not paraphrase beyond what reference resolution requires.
- If the sentence contains no verifiable proposition (e.g. a greeting), return an empty list.

Respond with JSON only, no prose: {"claims": ["...", "..."]})";

constexpr const char* kLocalSystem =
    R"(You verify one claim against one passage. The passage is the only admissible evidence; ignore your own world knowledge.

Label the claim:
- "ENTAILED" if the passage supports the claim.
- "CONTRADICTED" if the passage conflicts with the claim.
- "BASELESS" if the passage does not contain enough evidence to support or refute the claim.

Quote the decisive sentences verbatim from the passage in "evidence". For a BASELESS label the evidence list must be empty.

Respond with JSON only, no prose: {"label": "ENTAILED|CONTRADICTED|BASELESS", "evidence": ["..."]})";

constexpr const char* kGlobalSystem =
    R"(You give the final verdict on one claim against the full context. The context is the only admissible evidence; ignore your own world knowledge.

Label the claim:
- "ENTAILED" if the context supports the claim.
- "CONTRADICTED" if the context conflicts with the claim.
- "BASELESS" if the context does not contain enough evidence to support or refute the claim.

A preliminary pass over isolated excerpts may be wrong in either direction: evidence can be split across distant sentences, and an excerpt that looked decisive can be overridden elsewhere. Read the whole context before deciding, and revise the preliminary result freely.

Quote the decisive sentences verbatim from the full context in "evidence". For a BASELESS label the evidence list must be empty.

Respond with JSON only, no prose: {"label": "ENTAILED|CONTRADICTED|BASELESS", "evidence": ["..."]})";

void append_block(std::string& out, const char* title, const std::string& body) {
    out += title;
    out += ":\n";
    out += body;
    out += "\n\n";
}

}  // namespace

PromptMessages render_prompt(const JudgeRequest& request) {
    validate_request(request);
    PromptMessages messages;
    switch (request.role) {
        case JudgeRole::Decompose: {
            messages.system = kDecomposeSystem;
            std::string user;
            if (request.question) append_block(user, "Question the answer responds to", *request.question);
            append_block(user, "Answer sentence", request.passage);
            messages.user = std::move(user);
            break;
        }
        case JudgeRole::Local: {
            messages.system = kLocalSystem;
            std::string user;
            if (request.question) append_block(user, "Question", *request.question);
            append_block(user, "Passage", request.passage);
            append_block(user, "Claim", *request.claim);
            messages.user = std::move(user);
            break;
        }
        case JudgeRole::Global: {
            messages.system = kGlobalSystem;
            std::string user;
            if (request.question) append_block(user, "Question", *request.question);
            append_block(user, "Context", request.passage);
            if (request.focus) {
                append_block(user, "Preliminary result", std::string(to_string(*request.local_label)));
                append_block(user,
                             "Excerpt the preliminary result was based on (a pointer, not a constraint)",
                             *request.focus);
            } else {
                append_block(user, "Preliminary result",
                             "BASELESS: no isolated excerpt contained decisive evidence. Search the full "
                             "context for evidence that may be split across sentences.");
            }
            append_block(user, "Claim", *request.claim);
            messages.user = std::move(user);
            break;
        }
    }
    return messages;
}

}  // namespace ragaudit
