#include "ragaudit/localize.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace ragaudit {

namespace {

bool is_space_cp(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
           c == U' ';
}

char32_t ascii_lower_cp(char32_t c) {
    if (c >= U'A' && c <= U'Z') return c - U'A' + U'a';
    return c;
}

bool is_token_cp(char32_t c) {
    if (c >= U'0' && c <= U'9') return true;
    if (c >= U'a' && c <= U'z') return true;
    if (c >= U'A' && c <= U'Z') return true;
    return c > 0x7F && !is_space_cp(c);  // non-ASCII letters count as token chars
}

// Lowercased token stream of a code point sequence.
std::vector<std::u32string> tokenize(const std::u32string& cp, std::size_t lo, std::size_t hi) {
    std::vector<std::u32string> tokens;
    std::u32string current;
    for (std::size_t i = lo; i < hi; ++i) {
        const char32_t c = cp[i];
        if (is_token_cp(c)) {
            current.push_back(ascii_lower_cp(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// Whitespace-collapsed, ASCII-casefolded copy of cp[lo, hi) plus a map from
// each normalized position back to its source code point index.
void normalize_with_map(const std::u32string& cp, std::size_t lo, std::size_t hi,
                        std::u32string& normalized, std::vector<std::size_t>& source_index) {
    normalized.clear();
    source_index.clear();
    bool pending_space = false;
    for (std::size_t i = lo; i < hi; ++i) {
        const char32_t c = cp[i];
        if (is_space_cp(c)) {
            pending_space = !normalized.empty();
            continue;
        }
        if (pending_space) {
            normalized.push_back(U' ');
            source_index.push_back(i);  // points at the first char after the gap; unused for span ends
            pending_space = false;
        }
        normalized.push_back(ascii_lower_cp(c));
        source_index.push_back(i);
    }
}

std::vector<std::size_t> sentences_intersecting(const std::vector<Sentence>& sentences, std::size_t lo,
                                                std::size_t hi) {
    std::vector<std::size_t> out;
    for (const Sentence& s : sentences) {
        if (s.span.start < hi && s.span.end > lo) out.push_back(s.index);
    }
    return out;
}

// Clips a raw match to the hull of the sentences it touches and packages it.
std::optional<EvidenceSpan> anchor(const Utf8Map& context, const std::vector<Sentence>& sentences,
                                   std::size_t lo, std::size_t hi, int tier, double score,
                                   std::size_t occurrences) {
    const std::vector<std::size_t> indices = sentences_intersecting(sentences, lo, hi);
    if (indices.empty()) return std::nullopt;
    EvidenceSpan span;
    span.sentence_indices = indices;
    span.span = {sentences[indices.front()].span.start, sentences[indices.back()].span.end};
    span.text = context.substr(span.span.start, span.span.end);
    span.tier = tier;
    span.score = score;
    span.occurrences = occurrences;
    return span;
}

}  // namespace

std::vector<CharSpan> merge_spans(std::vector<CharSpan> spans) {
    spans.erase(std::remove_if(spans.begin(), spans.end(), [](const CharSpan& s) { return s.empty(); }),
                spans.end());
    std::sort(spans.begin(), spans.end(), [](const CharSpan& a, const CharSpan& b) {
        return a.start != b.start ? a.start < b.start : a.end < b.end;
    });
    std::vector<CharSpan> merged;
    for (const CharSpan& s : spans) {
        if (!merged.empty() && s.start <= merged.back().end) {
            merged.back().end = std::max(merged.back().end, s.end);
        } else {
            merged.push_back(s);
        }
    }
    return merged;
}

AnswerSpanSet localize_answer(const std::vector<Claim>& claims,
                              const std::vector<ClaimVerdict>& verdicts) {
    std::map<std::size_t, const Claim*> by_id;
    for (const Claim& c : claims) by_id[c.id] = &c;

    std::vector<CharSpan> contradicted, baseless, entailed;
    for (const ClaimVerdict& v : verdicts) {
        auto it = by_id.find(v.claim_id);
        if (it == by_id.end())
            throw std::invalid_argument("localize_answer: verdict references unknown claim id " +
                                        std::to_string(v.claim_id));
        const Claim& claim = *it->second;
        if (!claim.source_span)
            throw std::invalid_argument(
                "localize_answer: claim " + std::to_string(claim.id) +
                " has no answer span; span localization is unavailable for holistic decomposition");
        switch (v.final_label) {
            case Label::Contradicted: contradicted.push_back(*claim.source_span); break;
            case Label::Baseless: baseless.push_back(*claim.source_span); break;
            case Label::Entailed: entailed.push_back(*claim.source_span); break;
        }
    }

    AnswerSpanSet out;
    out.contradicted = merge_spans(contradicted);
    out.baseless = merge_spans(baseless);
    out.entailed = merge_spans(entailed);
    std::vector<CharSpan> bad = contradicted;
    bad.insert(bad.end(), baseless.begin(), baseless.end());
    out.hallucinated = merge_spans(std::move(bad));
    return out;
}

std::optional<EvidenceSpan> ground_evidence(std::string_view evidence_text, const Utf8Map& context,
                                            const std::vector<Sentence>& sentences) {
    if (sentences.empty()) return std::nullopt;
    const Utf8Map evidence(evidence_text);
    const std::u32string& ecp = evidence.points();

    std::size_t elo = 0, ehi = ecp.size();
    while (elo < ehi && is_space_cp(ecp[elo])) ++elo;
    while (ehi > elo && is_space_cp(ecp[ehi - 1])) --ehi;
    if (elo >= ehi) return std::nullopt;

    // Tier 1: exact byte match (valid UTF-8 cannot match mid code point).
    {
        const std::string needle = evidence.substr(elo, ehi);
        const std::string& hay = context.text();
        std::size_t pos = hay.find(needle);
        if (pos != std::string::npos) {
            std::size_t occurrences = 0;
            for (std::size_t p = pos; p != std::string::npos; p = hay.find(needle, p + 1)) ++occurrences;
            const std::size_t lo = context.cp_at_byte(pos);
            const std::size_t hi = context.cp_at_byte(pos + needle.size());
            return anchor(context, sentences, lo, hi, 1, 1.0, occurrences);
        }
    }

    // Tier 2: whitespace-collapsed, ASCII-casefolded match.
    {
        std::u32string norm_context, norm_needle;
        std::vector<std::size_t> source_index, needle_index;
        normalize_with_map(context.points(), 0, context.size(), norm_context, source_index);
        normalize_with_map(ecp, elo, ehi, norm_needle, needle_index);
        if (!norm_needle.empty()) {
            const std::size_t pos = norm_context.find(norm_needle);
            if (pos != std::u32string::npos) {
                const std::size_t lo = source_index[pos];
                const std::size_t hi = source_index[pos + norm_needle.size() - 1] + 1;
                return anchor(context, sentences, lo, hi, 2, 1.0, 1);
            }
        }
    }

    // Tier 3: best contiguous sentence window by token overlap.
    {
        const std::vector<std::u32string> needle_tokens = tokenize(ecp, elo, ehi);
        if (needle_tokens.empty()) return std::nullopt;
        std::map<std::u32string, std::size_t> needle_counts;
        for (const auto& t : needle_tokens) ++needle_counts[t];

        std::vector<std::vector<std::u32string>> sentence_tokens(sentences.size());
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            sentence_tokens[i] =
                tokenize(context.points(), sentences[i].span.start, sentences[i].span.end);
        }

        constexpr std::size_t kMaxWindow = 8;
        double best_ratio = 0.0;
        std::size_t best_len = 0, best_start = 0;
        bool found = false;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            std::map<std::u32string, std::size_t> window_counts;
            for (std::size_t j = i; j < sentences.size() && j - i < kMaxWindow; ++j) {
                for (const auto& t : sentence_tokens[j]) ++window_counts[t];
                std::size_t hit = 0;
                for (const auto& [token, want] : needle_counts) {
                    auto it = window_counts.find(token);
                    if (it != window_counts.end()) hit += std::min(want, it->second);
                }
                const double ratio = static_cast<double>(hit) / static_cast<double>(needle_tokens.size());
                const std::size_t len = j - i + 1;
                // strictly-better ratio, or the same ratio from a tighter window;
                // earlier windows win remaining ties since iteration is left to right
                if (!found || ratio > best_ratio || (ratio == best_ratio && len < best_len)) {
                    best_ratio = ratio;
                    best_len = len;
                    best_start = i;
                    found = true;
                }
            }
        }
        if (found && best_ratio >= 0.8) {
            const std::size_t lo = sentences[best_start].span.start;
            const std::size_t hi = sentences[best_start + best_len - 1].span.end;
            return anchor(context, sentences, lo, hi, 3, best_ratio, 1);
        }
    }
    return std::nullopt;
}

std::optional<EvidenceSpan> ground_evidence(std::string_view evidence_text, std::string_view context,
                                            const std::vector<Sentence>& sentences) {
    return ground_evidence(evidence_text, Utf8Map(context), sentences);
}

}  // namespace ragaudit
