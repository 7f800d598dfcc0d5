#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "tidepool/error.hpp"

namespace tidepool::unicode {

/// Decodes UTF-8. Each byte of an invalid or truncated sequence decodes to U+FFFD.
inline std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
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
        bool valid = len != 0 && i + len <= text.size();
        for (std::size_t k = 1; valid && k < len; ++k) {
            const auto bk = static_cast<unsigned char>(text[i + k]);
            if ((bk & 0xC0) != 0x80) valid = false;
            cp = (cp << 6) | (bk & 0x3F);
        }
        if (valid) {
            static constexpr char32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
            valid = cp >= min_for_len[len] && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
        }
        if (!valid) {
            out.push_back(U'�');
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
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

inline std::string encode_utf8(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char32_t cp : text) append_utf8(out, cp);
    return out;
}

/// Whitespace as Python's `str.isspace` (and therefore regex `\s`) defines it.
inline bool is_space(char32_t cp) {
    switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x1C: case 0x1D: case 0x1E: case 0x1F: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

/// Lowercasing as far as the cleaning pass can observe it: ASCII letters fold,
/// and the only non-ASCII code points whose full lowercase mapping is not a
/// single non-ASCII code point are U+0130 (-> "i" U+0307) and the Kelvin sign
/// (-> "k"). Every other code point is later replaced one-for-one, so its exact
/// lowercase form does not matter.
inline void append_lower(std::u32string& out, char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') {
        out.push_back(cp + (U'a' - U'A'));
    } else if (cp == 0x0130) {
        out.push_back(U'i');
        out.push_back(0x0307);
    } else if (cp == 0x212A) {
        out.push_back(U'k');
    } else {
        out.push_back(cp);
    }
}

/// Unicode NFKD (compatibility decomposition) of UTF-8 text via ICU.
/// Invalid UTF-8 bytes become U+FFFD.
inline std::string nfkd(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* normalizer = icu::Normalizer2::getNFKDInstance(status);
    if (U_FAILURE(status)) throw Error(Errc::precondition, std::string("ICU NFKD unavailable: ") + u_errorName(status));
    icu::UnicodeString source = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    icu::UnicodeString result = normalizer->normalize(source, status);
    if (U_FAILURE(status)) throw Error(Errc::precondition, std::string("NFKD failed: ") + u_errorName(status));
    std::string out;
    result.toUTF8String(out);
    return out;
}

} // namespace tidepool::unicode
