#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace miniens::text {

// Decodes UTF-8, dropping malformed byte sequences (overlong forms, stray
// continuation bytes, surrogates, out-of-range values).
std::vector<char32_t> decode_utf8_lossy(std::string_view bytes);

// Encodes a single code point (must be a valid scalar value).
void append_utf8(std::string& out, char32_t cp);

std::string encode_utf8(const std::vector<char32_t>& cps);

}  // namespace miniens::text
