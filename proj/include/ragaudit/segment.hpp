#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ragaudit/types.hpp"
#include "ragaudit/unicode.hpp"

namespace ragaudit {

// Bumped whenever the default abbreviation list or the boundary rules change;
// echoed in run summaries so results stay attributable.
inline constexpr const char* kSegmenterVersion = "seg-v1";

struct Sentence {
    std::size_t index = 0;
    CharSpan span;      // code points into the source text, whitespace-trimmed
    std::string text;   // exact substring at span

    friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct SegmenterOptions {
    // Lowercased tokens that end with '.', e.g. "dr.", "e.g.". A '.' closing
    // one of these never ends a sentence.
    std::set<std::string> abbreviations;

    static SegmenterOptions defaults();
};

// Loads one abbreviation per line; blank lines and lines starting with '#'
// are skipped, entries are lowercased, a missing trailing '.' is added.
// Throws std::runtime_error if the file cannot be read.
std::set<std::string> load_abbreviations(const std::string& path);

// Rule-based splitter. A sentence ends at '.', '!' or '?' (plus any closing
// quotes/brackets) when followed by whitespace and an ASCII uppercase letter
// or digit, or by end of text. A newline that ends a non-empty line is also
// a boundary. Spans cover the trimmed sentence text; concatenating the spans'
// substrings with the skipped separators reproduces the input.
std::vector<Sentence> segment_sentences(std::string_view text,
                                        const SegmenterOptions& options = SegmenterOptions::defaults());

struct Chunk {
    std::size_t index = 0;
    std::size_t first_sentence = 0;
    std::size_t last_sentence = 0;  // inclusive
    CharSpan span;                  // hull of the member sentence spans
    std::string text;

    friend bool operator==(const Chunk&, const Chunk&) = default;
};

// Sliding window of `window` sentences advancing by `window - overlap`.
// The final chunk may be short; a trailing chunk whose sentence range is a
// subset of the previous chunk's range is dropped. Requires window >= 1 and
// overlap < window, otherwise throws std::invalid_argument.
std::vector<Chunk> make_chunks(const Utf8Map& context, const std::vector<Sentence>& sentences,
                               std::size_t window, std::size_t overlap);
std::vector<Chunk> make_chunks(std::string_view context, const std::vector<Sentence>& sentences,
                               std::size_t window, std::size_t overlap);

}  // namespace ragaudit
