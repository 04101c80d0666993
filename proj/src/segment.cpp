#include "ragaudit/segment.hpp"

#include <fstream>
#include <stdexcept>

namespace ragaudit {

namespace {

bool is_space_cp(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
           c == U' ';
}

bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool is_closer(char32_t c) {
    switch (c) {
        case U'"':
        case U'\'':
        case U')':
        case U']':
        case U'}':
        case U'”':  // right double quotation mark
        case U'’':  // right single quotation mark
        case U'»':  // right-pointing guillemet
            return true;
        default:
            return false;
    }
}

bool is_upper_or_digit(char32_t c) {
    return (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9');
}

bool is_ascii_alpha(char32_t c) {
    return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}

char ascii_lower(char32_t c) {
    if (c >= U'A' && c <= U'Z') return static_cast<char>(c - U'A' + 'a');
    return static_cast<char>(c);
}

// The token ending at the '.' at position `dot` is the maximal run of ASCII
// letters and dots immediately before it, dot included. "e.g." is looked up
// whole, so its inner '.' falls through to the boundary rules (and never
// splits anyway, since a lowercase letter follows).
bool dot_closes_abbreviation(const std::u32string& cp, std::size_t dot,
                             const std::set<std::string>& abbreviations) {
    std::size_t t = dot;
    while (t > 0 && (is_ascii_alpha(cp[t - 1]) || cp[t - 1] == U'.')) --t;
    if (t == dot) return false;  // a bare '.' starts no token
    std::string token;
    token.reserve(dot - t + 1);
    for (std::size_t k = t; k <= dot; ++k) {
        if (cp[k] > 0x7F) return false;
        token.push_back(ascii_lower(cp[k]));
    }
    return abbreviations.count(token) > 0;
}

const std::set<std::string>& default_abbreviations() {
    static const std::set<std::string> list = {
        "mr.",   "mrs.",  "ms.",   "dr.",    "prof.", "sr.",   "jr.",   "st.",  "no.",
        "vs.",   "etc.",  "e.g.",  "i.e.",   "cf.",   "al.",   "fig.",  "vol.", "dept.",
        "inc.",  "co.",   "corp.", "approx.", "u.s.", "u.k.",  "jan.",  "feb.", "mar.",
        "apr.",  "jun.",  "jul.",  "aug.",   "sep.",  "sept.", "oct.",  "nov.", "dec.",
    };
    return list;
}

}  // namespace

SegmenterOptions SegmenterOptions::defaults() {
    SegmenterOptions opts;
    opts.abbreviations = default_abbreviations();
    return opts;
}

std::set<std::string> load_abbreviations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read abbreviation file: " + path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t");
        std::string token = line.substr(b, e - b + 1);
        if (token.empty() || token[0] == '#') continue;
        for (char& c : token) {
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        }
        if (token.back() != '.') token.push_back('.');
        out.insert(token);
    }
    return out;
}

std::vector<Sentence> segment_sentences(std::string_view text, const SegmenterOptions& options) {
    const Utf8Map map(text);
    const std::u32string& cp = map.points();
    const std::size_t n = cp.size();

    std::vector<Sentence> out;
    auto flush = [&](std::size_t lo, std::size_t hi) {
        while (lo < hi && is_space_cp(cp[lo])) ++lo;
        while (hi > lo && is_space_cp(cp[hi - 1])) --hi;
        if (lo >= hi) return;
        Sentence s;
        s.index = out.size();
        s.span = {lo, hi};
        s.text = map.substr(lo, hi);
        out.push_back(std::move(s));
    };

    std::size_t start = 0;
    std::size_t i = 0;
    while (i < n) {
        const char32_t c = cp[i];
        if (c == U'\n') {
            flush(start, i);
            start = i + 1;
            ++i;
            continue;
        }
        if (is_terminator(c)) {
            if (c == U'.' && dot_closes_abbreviation(cp, i, options.abbreviations)) {
                ++i;
                continue;
            }
            std::size_t j = i + 1;
            while (j < n && is_closer(cp[j])) ++j;
            if (j >= n) {
                flush(start, j);
                start = j;
                i = j;
                continue;
            }
            if (is_space_cp(cp[j])) {
                std::size_t k = j;
                while (k < n && is_space_cp(cp[k])) ++k;
                if (k >= n || is_upper_or_digit(cp[k])) {
                    flush(start, j);
                    start = j;
                    i = j;
                    continue;
                }
            }
        }
        ++i;
    }
    flush(start, n);
    return out;
}

std::vector<Chunk> make_chunks(const Utf8Map& context, const std::vector<Sentence>& sentences,
                               std::size_t window, std::size_t overlap) {
    if (window < 1 || overlap >= window)
        throw std::invalid_argument("make_chunks: invalid (window, overlap) combination: window=" +
                                    std::to_string(window) + " overlap=" + std::to_string(overlap));
    std::vector<Chunk> chunks;
    const std::size_t m = sentences.size();
    if (m == 0) return chunks;
    const std::size_t stride = window - overlap;
    for (std::size_t start = 0; start < m; start += stride) {
        const std::size_t end = std::min(start + window, m);  // [start, end)
        // Starts only grow, so a chunk is a subset of its predecessor exactly
        // when it ends no later; every later chunk would be one too.
        if (!chunks.empty() && end <= chunks.back().last_sentence + 1) break;
        Chunk c;
        c.index = chunks.size();
        c.first_sentence = start;
        c.last_sentence = end - 1;
        c.span = {sentences[start].span.start, sentences[end - 1].span.end};
        c.text = context.substr(c.span.start, c.span.end);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

std::vector<Chunk> make_chunks(std::string_view context, const std::vector<Sentence>& sentences,
                               std::size_t window, std::size_t overlap) {
    return make_chunks(Utf8Map(context), sentences, window, overlap);
}

}  // namespace ragaudit
