#include "ragaudit/unicode.hpp"

#include <algorithm>
#include <stdexcept>

namespace ragaudit {

namespace {

inline bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

// Decodes one code point at text[i]. Returns its byte length (>= 1) and
// writes the value to out; malformed sequences decode as U+FFFD, length 1.
std::size_t decode_one(std::string_view text, std::size_t i, char32_t& out) {
    const unsigned char b0 = static_cast<unsigned char>(text[i]);
    if (b0 < 0x80) {
        out = b0;
        return 1;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        out = 0xFFFD;
        return 1;
    }
    if (i + len > text.size()) {
        out = 0xFFFD;
        return 1;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const unsigned char bk = static_cast<unsigned char>(text[i + k]);
        if (!is_continuation(bk)) {
            out = 0xFFFD;
            return 1;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    // reject overlong forms and surrogate/range violations the same way
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
        out = 0xFFFD;
        return 1;
    }
    out = cp;
    return len;
}

}  // namespace

Utf8Map::Utf8Map(std::string_view text) : text_(text) {
    starts_.reserve(text_.size());
    points_.reserve(text_.size());
    std::size_t i = 0;
    while (i < text_.size()) {
        char32_t cp = 0;
        const std::size_t len = decode_one(text_, i, cp);
        starts_.push_back(i);
        points_.push_back(cp);
        i += len;
    }
}

std::size_t Utf8Map::byte_at(std::size_t cp) const {
    if (cp > starts_.size()) throw std::out_of_range("Utf8Map::byte_at: index past end");
    return cp == starts_.size() ? text_.size() : starts_[cp];
}

std::size_t Utf8Map::cp_at_byte(std::size_t byte) const {
    if (byte > text_.size()) throw std::out_of_range("Utf8Map::cp_at_byte: offset past end");
    if (byte == text_.size()) return starts_.size();
    auto it = std::upper_bound(starts_.begin(), starts_.end(), byte);
    return static_cast<std::size_t>(it - starts_.begin()) - 1;
}

std::string Utf8Map::substr(std::size_t cp_start, std::size_t cp_end) const {
    if (cp_start > cp_end || cp_end > starts_.size())
        throw std::out_of_range("Utf8Map::substr: bad code point range");
    const std::size_t b0 = byte_at(cp_start);
    const std::size_t b1 = byte_at(cp_end);
    return text_.substr(b0, b1 - b0);
}

std::size_t cp_length(std::string_view text) {
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = 0;
        i += decode_one(text, i, cp);
        ++n;
    }
    return n;
}

std::string cp_substr(std::string_view text, std::size_t cp_start, std::size_t cp_end) {
    return Utf8Map(text).substr(cp_start, cp_end);
}

}  // namespace ragaudit
