#include "ragaudit/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "ragaudit/localize.hpp"

namespace ragaudit {

PRF prf_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    PRF out;
    out.tp = tp;
    out.fp = fp;
    out.fn = fn;
    out.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    out.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    out.f1 = (out.precision + out.recall) == 0.0
                 ? 0.0
                 : 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

PRF answer_prf(const std::vector<bool>& predictions, const std::vector<bool>& gold) {
    if (predictions.size() != gold.size())
        throw std::invalid_argument("answer_prf: prediction/gold length mismatch");
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] && gold[i]) ++tp;
        else if (predictions[i] && !gold[i]) ++fp;
        else if (!predictions[i] && gold[i]) ++fn;
    }
    return prf_from_counts(tp, fp, fn);
}

namespace {

std::uint64_t total_length(const std::vector<CharSpan>& merged) {
    std::uint64_t total = 0;
    for (const CharSpan& s : merged) total += s.length();
    return total;
}

// Intersection size of two merged (sorted, disjoint) span lists.
std::uint64_t intersection_length(const std::vector<CharSpan>& a, const std::vector<CharSpan>& b) {
    std::uint64_t total = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const std::size_t lo = std::max(a[i].start, b[j].start);
        const std::size_t hi = std::min(a[i].end, b[j].end);
        if (lo < hi) total += hi - lo;
        if (a[i].end < b[j].end) ++i;
        else ++j;
    }
    return total;
}

void check_bounds(const std::vector<CharSpan>& spans, std::size_t text_length, const char* side) {
    for (const CharSpan& s : spans) {
        if (s.start > s.end || s.end > text_length)
            throw std::out_of_range(std::string("span metrics: ") + side + " span [" +
                                    std::to_string(s.start) + ", " + std::to_string(s.end) +
                                    ") exceeds text length " + std::to_string(text_length));
    }
}

}  // namespace

PRF span_micro_prf(std::span<const SpanEvalInput> samples) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const SpanEvalInput& sample : samples) {
        check_bounds(sample.gold_spans, sample.text_length, "gold");
        check_bounds(sample.pred_spans, sample.text_length, "predicted");
        const std::vector<CharSpan> gold = merge_spans(sample.gold_spans);
        const std::vector<CharSpan> pred = merge_spans(sample.pred_spans);
        const std::uint64_t overlap = intersection_length(gold, pred);
        tp += overlap;
        fp += total_length(pred) - overlap;
        fn += total_length(gold) - overlap;
    }
    return prf_from_counts(tp, fp, fn);
}

PRF evidence_grounding_prf(std::span<const SpanEvalInput> cases) { return span_micro_prf(cases); }

}  // namespace ragaudit
