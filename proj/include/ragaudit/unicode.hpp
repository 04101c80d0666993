#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ragaudit {

// Code-point index over a UTF-8 string. Every offset this library exposes
// (sentence spans, answer spans, evidence spans) counts Unicode scalar values,
// not bytes; byte offsets would drift on non-ASCII text and break span
// comparisons against character-based gold annotations. Invalid bytes are
// consumed one at a time and decoded as U+FFFD so offsets stay monotone on
// malformed input instead of throwing.
class Utf8Map {
public:
    explicit Utf8Map(std::string_view text);

    // number of code points
    std::size_t size() const { return starts_.size(); }

    const std::string& text() const { return text_; }
    const std::u32string& points() const { return points_; }

    // byte offset of code point `cp`; cp == size() maps to text().size()
    std::size_t byte_at(std::size_t cp) const;

    // inverse of byte_at; `byte` is rounded down to the enclosing code point
    std::size_t cp_at_byte(std::size_t byte) const;

    char32_t at(std::size_t cp) const { return points_[cp]; }

    // substring [cp_start, cp_end) in code points, returned as UTF-8
    std::string substr(std::size_t cp_start, std::size_t cp_end) const;

private:
    std::string text_;
    std::vector<std::size_t> starts_;
    std::u32string points_;
};

std::size_t cp_length(std::string_view text);
std::string cp_substr(std::string_view text, std::size_t cp_start, std::size_t cp_end);

}  // namespace ragaudit
