#include "ragaudit/verify.hpp"

#include <stdexcept>

#include "ragaudit/joins.hpp"
#include "ragaudit/parallel.hpp"

namespace ragaudit {

namespace {

struct ChunkOutput {
    Label label = Label::Baseless;
    bool failed = false;
    bool repaired = false;
    std::vector<std::string> evidence;
    TokenUsage usage;
};

JudgeRequest local_request(const Claim& claim, const Chunk& chunk,
                           const std::optional<std::string>& question, const Decoding& decoding) {
    JudgeRequest request;
    request.role = JudgeRole::Local;
    request.claim = claim.text;
    request.question = question;
    request.passage = chunk.text;
    request.decoding = decoding;
    return request;
}

LocalResult assemble_local(std::size_t claim_id, const std::vector<ChunkOutput>& outputs) {
    LocalResult local;
    local.claim_id = claim_id;
    std::vector<Label> labels;
    labels.reserve(outputs.size());
    for (std::size_t k = 0; k < outputs.size(); ++k) {
        const ChunkOutput& out = outputs[k];
        local.usage.count_request(JudgeRole::Local);
        if (out.failed) {
            local.degraded = true;  // an unjudged chunk counts as BASELESS in the join
        } else {
            local.usage.add_usage(out.usage);
            local.repaired = local.repaired || out.repaired;
        }
        local.assessments.emplace_back(k, out.label);
        labels.push_back(out.label);
        if (!out.evidence.empty()) local.provisional_evidence.emplace_back(k, out.evidence);
    }
    local.local_label = or_join(labels);
    if (local.local_label != Label::Baseless) {
        for (std::size_t k = 0; k < outputs.size(); ++k) {
            if (outputs[k].label == local.local_label) {
                local.focus_chunk = k;
                break;
            }
        }
    }
    return local;
}

ChunkOutput judge_chunk(const Claim& claim, const Chunk& chunk,
                        const std::optional<std::string>& question, Judge& judge,
                        const Decoding& decoding) {
    ChunkOutput out;
    try {
        JudgeResponse response = judge.submit(local_request(claim, chunk, question, decoding));
        out.label = response.label;
        out.repaired = response.repaired;
        out.evidence = std::move(response.evidence_texts);
        out.usage = response.usage;
    } catch (const JudgeError&) {
        out.failed = true;
        out.label = Label::Baseless;
    }
    return out;
}

// Grounds raw evidence quotes into sentence-hull spans. Quotes that cannot
// be anchored are dropped and flagged; a decisive verdict left with no
// evidence at all is additionally marked degraded.
void attach_evidence(ClaimVerdict& verdict, const std::vector<std::string>& quotes,
                     const Utf8Map& context, const std::vector<Sentence>& sentences) {
    if (verdict.final_label == Label::Baseless) return;
    for (const std::string& quote : quotes) {
        if (auto span = ground_evidence(quote, context, sentences)) {
            verdict.evidence.push_back(std::move(*span));
        } else {
            verdict.flags.ungrounded = true;
        }
    }
    if (verdict.evidence.empty()) verdict.flags.degraded = true;
}

ClaimVerdict verdict_shell(const Claim& claim, const LocalResult& local) {
    ClaimVerdict verdict;
    verdict.claim_id = claim.id;
    verdict.local_label = local.local_label;
    verdict.chunk_assessments = local.assessments;
    verdict.focus_chunk = local.focus_chunk;
    verdict.flags.degraded = local.degraded;
    verdict.flags.repaired = local.repaired;
    return verdict;
}

// Global verification disabled: the local label is final, and the focus
// chunk's provisional quotes are the only evidence source available.
ClaimVerdict finalize_without_global(const Claim& claim, const LocalResult& local,
                                     const Utf8Map& context, const std::vector<Sentence>& sentences) {
    ClaimVerdict verdict = verdict_shell(claim, local);
    verdict.final_label = local.local_label;
    if (verdict.final_label != Label::Baseless && local.focus_chunk) {
        for (const auto& [chunk_index, quotes] : local.provisional_evidence) {
            if (chunk_index != *local.focus_chunk) continue;
            attach_evidence(verdict, quotes, context, sentences);
            return verdict;
        }
        verdict.flags.degraded = true;  // decisive label but the focus chunk quoted nothing
    }
    return verdict;
}

}  // namespace

LocalResult verify_local(const Claim& claim, const std::vector<Chunk>& chunks,
                         const std::optional<std::string>& question, Judge& judge,
                         const Decoding& decoding, int concurrency) {
    if (chunks.empty()) throw std::invalid_argument("verify_local: empty chunk list");
    std::vector<ChunkOutput> outputs(chunks.size());
    parallel_for(chunks.size(), concurrency, [&](std::size_t k) {
        outputs[k] = judge_chunk(claim, chunks[k], question, judge, decoding);
    });
    return assemble_local(claim.id, outputs);
}

GlobalResult verify_global(const Claim& claim, const Utf8Map& context,
                           const std::vector<Sentence>& sentences, const std::vector<Chunk>& chunks,
                           const std::optional<std::string>& question, const LocalResult& local,
                           Judge& judge, const Decoding& decoding) {
    JudgeRequest request;
    request.role = JudgeRole::Global;
    request.claim = claim.text;
    request.question = question;
    request.passage = context.text();
    request.local_label = local.local_label;
    if (local.local_label != Label::Baseless) {
        if (!local.focus_chunk || *local.focus_chunk >= chunks.size())
            throw std::invalid_argument("verify_global: decisive local label without a focus chunk");
        request.focus = chunks[*local.focus_chunk].text;
    }
    request.decoding = decoding;

    GlobalResult result;
    result.verdict = verdict_shell(claim, local);
    result.usage.count_request(JudgeRole::Global);
    try {
        JudgeResponse response = judge.submit(request);
        result.usage.add_usage(response.usage);
        result.verdict.final_label = response.label;
        result.verdict.flags.repaired = result.verdict.flags.repaired || response.repaired;
        attach_evidence(result.verdict, response.evidence_texts, context, sentences);
    } catch (const JudgeError&) {
        result.verdict.final_label = local.local_label;
        result.verdict.flags.degraded = true;
        // no evidence can be extracted; the rr check will hold this verdict
        // only to the degraded-run standard
    }
    return result;
}

AuditResult run_pipeline(std::string_view context, const std::optional<std::string>& question,
                         std::string_view answer, const PipelineOptions& options, Judge& judge,
                         std::string sample_id) {
    const int concurrency = std::max(1, options.concurrency);
    const Utf8Map context_map(context);
    const std::vector<Sentence> sentences = segment_sentences(context, options.segmenter);
    const std::vector<Chunk> chunks = make_chunks(context_map, sentences, options.window, options.overlap);

    AuditResult result;
    result.sample_id = std::move(sample_id);
    result.mode = options.mode;
    result.context_length = context_map.size();
    result.answer_length = cp_length(answer);
    result.chunk_count = chunks.size();

    DecomposeResult decomposed =
        options.mode == DecomposeMode::SentenceBased
            ? decompose_sentence_based(answer, judge, options.segmenter, options.decoding, concurrency)
            : decompose_holistic(answer, judge, options.decoding);
    result.claims = std::move(decomposed.claims);
    result.errors = std::move(decomposed.errors);
    result.usage += decomposed.usage;

    if (result.claims.empty()) {
        result.empty_claim_set = true;
        result.answer = answer_verdict({});
    } else if (chunks.empty()) {
        // Nothing to check against: every claim is BASELESS by definition and
        // no judge call can change that.
        for (const Claim& claim : result.claims) {
            ClaimVerdict verdict;
            verdict.claim_id = claim.id;
            verdict.local_label = Label::Baseless;
            verdict.final_label = Label::Baseless;
            result.trace.push_back(std::move(verdict));
        }
        result.answer = answer_verdict(std::vector<Label>(result.claims.size(), Label::Baseless));
    } else {
        const std::size_t n_claims = result.claims.size();
        const std::size_t n_chunks = chunks.size();

        // Claim x chunk fan-out in one flat grid so a single concurrency
        // bound governs all local calls; slot (i, k) is owned by task i*K+k.
        std::vector<ChunkOutput> grid(n_claims * n_chunks);
        parallel_for(n_claims * n_chunks, concurrency, [&](std::size_t t) {
            const std::size_t i = t / n_chunks;
            const std::size_t k = t % n_chunks;
            grid[t] = judge_chunk(result.claims[i], chunks[k], question, judge, options.decoding);
        });

        std::vector<LocalResult> locals;
        locals.reserve(n_claims);
        for (std::size_t i = 0; i < n_claims; ++i) {
            std::vector<ChunkOutput> row(grid.begin() + static_cast<std::ptrdiff_t>(i * n_chunks),
                                         grid.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_chunks));
            locals.push_back(assemble_local(result.claims[i].id, row));
        }

        result.trace.resize(n_claims);
        if (options.global_verification) {
            std::vector<CostLedger> global_usage(n_claims);
            parallel_for(n_claims, concurrency, [&](std::size_t i) {
                GlobalResult global = verify_global(result.claims[i], context_map, sentences, chunks,
                                                    question, locals[i], judge, options.decoding);
                result.trace[i] = std::move(global.verdict);
                global_usage[i] = global.usage;
            });
            for (std::size_t i = 0; i < n_claims; ++i) {
                result.usage += locals[i].usage;
                result.usage += global_usage[i];
            }
        } else {
            for (std::size_t i = 0; i < n_claims; ++i) {
                result.trace[i] =
                    finalize_without_global(result.claims[i], locals[i], context_map, sentences);
                result.usage += locals[i].usage;
            }
        }

        std::vector<Label> finals;
        finals.reserve(n_claims);
        for (const ClaimVerdict& v : result.trace) finals.push_back(v.final_label);
        result.answer = answer_verdict(finals);
    }

    if (options.mode == DecomposeMode::SentenceBased)
        result.answer_spans = localize_answer(result.claims, result.trace);

    result.rr_violations = rr_check(result.trace, context);
    return result;
}

}  // namespace ragaudit
