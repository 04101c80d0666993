#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragaudit/decompose.hpp"
#include "ragaudit/judge.hpp"
#include "ragaudit/localize.hpp"
#include "ragaudit/segment.hpp"
#include "ragaudit/types.hpp"
#include "ragaudit/unicode.hpp"

namespace ragaudit {

// Outcome of the chunk-level fan-out for one claim.
struct LocalResult {
    std::size_t claim_id = 0;
    std::vector<std::pair<std::size_t, Label>> assessments;  // (chunk index, label), chunk order
    Label local_label = Label::Baseless;                     // or_join of the assessments
    std::optional<std::size_t> focus_chunk;  // lowest-index chunk matching local_label (ENT/CON only)
    // Raw evidence quotes per chunk, kept for diagnostics and for the
    // global-verification-off mode; the normal path re-extracts evidence at
    // the global stage instead of copying these forward.
    std::vector<std::pair<std::size_t, std::vector<std::string>>> provisional_evidence;
    bool degraded = false;  // a chunk call failed and was scored BASELESS
    bool repaired = false;  // a chunk response needed the BASELESS-evidence repair
    CostLedger usage;
};

LocalResult verify_local(const Claim& claim, const std::vector<Chunk>& chunks,
                         const std::optional<std::string>& question, Judge& judge,
                         const Decoding& decoding, int concurrency);

struct GlobalResult {
    ClaimVerdict verdict;
    CostLedger usage;
};

// Full-context re-examination seeded by the local outcome. A decisive local
// label ships the focus chunk as a hint; a BASELESS one asks for an
// unanchored full-context search. The judge may revise in any direction.
// Evidence quotes are grounded into sentence-hull spans; a failed call falls
// back to the local label with the degraded flag set.
GlobalResult verify_global(const Claim& claim, const Utf8Map& context,
                           const std::vector<Sentence>& sentences, const std::vector<Chunk>& chunks,
                           const std::optional<std::string>& question, const LocalResult& local,
                           Judge& judge, const Decoding& decoding);

struct PipelineOptions {
    std::size_t window = 25;
    std::size_t overlap = 10;
    DecomposeMode mode = DecomposeMode::SentenceBased;
    bool global_verification = true;
    Decoding decoding;
    int concurrency = 1;
    SegmenterOptions segmenter = SegmenterOptions::defaults();
};

struct AuditResult {
    std::string sample_id;
    DecomposeMode mode = DecomposeMode::SentenceBased;
    std::size_t context_length = 0;  // code points
    std::size_t answer_length = 0;
    std::size_t chunk_count = 0;
    std::vector<Claim> claims;
    std::vector<ClaimVerdict> trace;  // one verdict per claim, claim order
    AnswerVerdict answer;
    bool empty_claim_set = false;  // vacuous ENTAILED convention applied
    std::optional<AnswerSpanSet> answer_spans;  // absent in holistic mode
    std::vector<RrViolation> rr_violations;
    std::vector<AuditError> errors;
    CostLedger usage;
};

// Decompose, verify locally per chunk, re-verify globally, join, localize,
// self-check. An empty or unsegmentable context short-circuits every claim
// to BASELESS without judge calls. ScriptMissError and std::invalid_argument
// propagate; judge failures degrade per claim instead.
AuditResult run_pipeline(std::string_view context, const std::optional<std::string>& question,
                         std::string_view answer, const PipelineOptions& options, Judge& judge,
                         std::string sample_id = {});

}  // namespace ragaudit
