#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace picl {

namespace detail {

struct cp_range {
    uint32_t lo;
    uint32_t hi;
};

extern const cp_range kLetterRanges[];
extern const std::size_t kLetterRanges_count;
extern const cp_range kNumberRanges[];
extern const std::size_t kNumberRanges_count;
extern const cp_range kSpaceRanges[];
extern const std::size_t kSpaceRanges_count;

} // namespace detail

bool is_letter(uint32_t cp);
bool is_number(uint32_t cp);
bool is_whitespace(uint32_t cp);

// Decodes UTF-8 into codepoints. Invalid byte sequences decode each bad byte
// as U+FFFD; the original byte offsets are preserved so slices map back to
// the source string.
struct decoded_char {
    uint32_t cp;
    std::size_t offset; // byte offset in the source string
    std::size_t len;    // byte length
};

std::vector<decoded_char> decode_utf8(std::string_view text);

std::string encode_utf8(uint32_t cp);

} // namespace picl
