#include "picl/unicode.hpp"

#include <algorithm>

namespace picl {

namespace {

bool in_ranges(const detail::cp_range* ranges, std::size_t count, std::uint32_t cp) {
    auto end = ranges + count;
    auto it = std::upper_bound(ranges, end, cp, [](std::uint32_t v, const detail::cp_range& r) {
        return v < r.lo;
    });
    return it != ranges && cp <= (it - 1)->hi;
}

}  // namespace

bool is_letter(std::uint32_t cp) {
    return in_ranges(detail::kLetterRanges, detail::kLetterRanges_count, cp);
}

bool is_number(std::uint32_t cp) {
    return in_ranges(detail::kNumberRanges, detail::kNumberRanges_count, cp);
}

bool is_whitespace(std::uint32_t cp) {
    return in_ranges(detail::kSpaceRanges, detail::kSpaceRanges_count, cp);
}

// Decodes UTF-8, keeping byte offsets so callers can slice the original
// buffer. Invalid sequences decode as one U+FFFD per offending byte; the
// offsets still cover those bytes, so slicing round-trips arbitrary input.
std::vector<decoded_char> decode_utf8(std::string_view text) {
    std::vector<decoded_char> out;
    out.reserve(text.size());
    std::size_t i = 0;
    const auto* bytes = reinterpret_cast<const unsigned char*>(text.data());
    while (i < text.size()) {
        const unsigned char b0 = bytes[i];
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        }
        bool ok = len != 0 && i + len <= text.size();
        if (ok) {
            for (std::size_t k = 1; k < len; ++k) {
                const unsigned char bk = bytes[i + k];
                if ((bk & 0xC0) != 0x80) {
                    ok = false;
                    break;
                }
                cp = (cp << 6) | (bk & 0x3F);
            }
        }
        if (ok) {
            // Reject overlong encodings, surrogates, and out-of-range values.
            static constexpr std::uint32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
            if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
                ok = false;
        }
        if (!ok) {
            out.push_back({0xFFFD, i, 1});
            ++i;
        } else {
            out.push_back({cp, i, len});
            i += len;
        }
    }
    return out;
}

std::string encode_utf8(std::uint32_t cp) {
    std::string out;
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
    return out;
}

}  // namespace picl
