#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers. All annotation offsets in this project are counted in
// Unicode code points; strings are stored as UTF-8 bytes. Invalid UTF-8
// raises Utf8Error (overlong forms, surrogates, and truncated sequences
// are all rejected).
namespace veilkit::unicode {

bool valid_utf8(std::string_view s);

// Number of code points in `s`.
std::size_t cp_length(std::string_view s);

// Byte offsets of code point boundaries: result[i] is the byte offset of
// code point i, result[cp_length] == s.size().
std::vector<std::size_t> cp_byte_offsets(std::string_view s);

// Byte offset of code point index `cp` (cp may equal cp_length(s)).
std::size_t cp_to_byte(std::string_view s, std::size_t cp);

// Slice [start, end) counted in code points.
std::string cp_slice(std::string_view s, std::size_t start, std::size_t end);

void append_utf8(std::string& out, char32_t cp);

// Decodes one code point starting at byte `i`, advancing `i`.
char32_t decode_at(std::string_view s, std::size_t& i);

} // namespace veilkit::unicode
