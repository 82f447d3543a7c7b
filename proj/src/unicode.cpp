#include "veilkit/unicode.hpp"

#include "veilkit/errors.hpp"

namespace veilkit::unicode {

namespace {

[[noreturn]] void bad(std::size_t at) {
    throw Utf8Error("invalid UTF-8 sequence at byte " + std::to_string(at));
}

} // namespace

char32_t decode_at(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
        min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
        min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
        min = 0x10000;
    } else {
        bad(i);
    }
    if (i + len > s.size()) bad(i);
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) bad(i);
        cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min) bad(i);                      // overlong encoding
    if (cp >= 0xD800 && cp <= 0xDFFF) bad(i);  // surrogate
    if (cp > 0x10FFFF) bad(i);
    i += len;
    return cp;
}

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    try {
        while (i < s.size()) decode_at(s, i);
    } catch (const Utf8Error&) {
        return false;
    }
    return true;
}

std::size_t cp_length(std::string_view s) {
    std::size_t i = 0, n = 0;
    while (i < s.size()) {
        decode_at(s, i);
        ++n;
    }
    return n;
}

std::vector<std::size_t> cp_byte_offsets(std::string_view s) {
    std::vector<std::size_t> offsets;
    offsets.reserve(s.size() + 1);
    std::size_t i = 0;
    while (i < s.size()) {
        offsets.push_back(i);
        decode_at(s, i);
    }
    offsets.push_back(s.size());
    return offsets;
}

std::size_t cp_to_byte(std::string_view s, std::size_t cp) {
    std::size_t i = 0, n = 0;
    while (n < cp) {
        if (i >= s.size())
            throw DataError("code point index " + std::to_string(cp) + " out of range");
        decode_at(s, i);
        ++n;
    }
    return i;
}

std::string cp_slice(std::string_view s, std::size_t start, std::size_t end) {
    if (start > end) throw DataError("slice start exceeds end");
    const std::size_t b0 = cp_to_byte(s, start);
    std::size_t i = b0, n = start;
    while (n < end) {
        if (i >= s.size())
            throw DataError("code point index " + std::to_string(end) + " out of range");
        decode_at(s, i);
        ++n;
    }
    return std::string(s.substr(b0, i - b0));
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp >= 0xD800 && cp <= 0xDFFF) throw Utf8Error("cannot encode surrogate code point");
    if (cp > 0x10FFFF) throw Utf8Error("code point beyond U+10FFFF");
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

} // namespace veilkit::unicode
