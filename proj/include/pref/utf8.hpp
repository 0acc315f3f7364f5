#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace pref {

// Decodes UTF-8 into codepoints; invalid bytes decode to U+FFFD one byte at
// a time so degenerate input never throws.
inline std::vector<char32_t> decode_utf8(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 >> 5) == 0x6 && i + 1 < s.size()) {
            cp = (b0 & 0x1F) << 6 | (static_cast<unsigned char>(s[i + 1]) & 0x3F);
            len = 2;
        } else if ((b0 >> 4) == 0xE && i + 2 < s.size()) {
            cp = (b0 & 0x0F) << 12 | (static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6 |
                 (static_cast<unsigned char>(s[i + 2]) & 0x3F);
            len = 3;
        } else if ((b0 >> 3) == 0x1E && i + 3 < s.size()) {
            cp = (b0 & 0x07) << 18 | (static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12 |
                 (static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6 |
                 (static_cast<unsigned char>(s[i + 3]) & 0x3F);
            len = 4;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

enum class CharClass {
    hiragana,
    katakana,
    kanji,
    alphabet,
    digit,
    punctuation,
    whitespace,
    symbol,
};

// Japanese-default classification table. Unicode ranges:
// hiragana U+3040-309F, katakana U+30A0-30FF, kanji = CJK Unified Ideographs
// (main block + extension A), alphabet = ASCII letters, digits ASCII and
// fullwidth, punctuation restricted to sentence punctuation.
inline CharClass classify_char(char32_t c) {
    if (c >= 0x3040 && c <= 0x309F) return CharClass::hiragana;
    if (c >= 0x30A0 && c <= 0x30FF) return CharClass::katakana;
    if ((c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF)) return CharClass::kanji;
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z')) return CharClass::alphabet;
    if ((c >= '0' && c <= '9') || (c >= 0xFF10 && c <= 0xFF19)) return CharClass::digit;
    if (c == 0x3001 || c == 0x3002 || c == ',' || c == '.') return CharClass::punctuation;
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == 0x3000) return CharClass::whitespace;
    return CharClass::symbol;
}

} // namespace pref
