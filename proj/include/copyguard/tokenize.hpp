#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "copyguard/util.hpp"

namespace copyguard {

using Tokens = std::vector<std::string>;

// Fixed preprocessing shared by the metrics and the status-cache keys:
// lowercase, split on Unicode whitespace, strip leading/trailing punctuation
// per token, drop empties. Input is treated as composed (NFC) text; none of
// the characters this pipeline matches on has a canonical decomposition, so
// no composition pass is applied.

namespace tokenize_detail {

inline bool is_strip_punct(char32_t cp) {
    if (cp < 0x80) {
        char c = static_cast<char>(cp);
        return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
               (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
    }
    switch (cp) {
        case 0x00A1: case 0x00AB: case 0x00BB: case 0x00BF:
        case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014:
        case 0x2018: case 0x2019: case 0x201A: case 0x201C: case 0x201D:
        case 0x201E: case 0x2026: case 0x2039: case 0x203A:
            return true;
        default:
            return false;
    }
}

// ASCII plus Latin-1 letters; enough for the corpus languages (incl. French
// translation targets). Other scripts pass through unchanged.
inline char32_t lower_cp(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    return cp;
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

}  // namespace tokenize_detail

inline std::vector<std::string> tokenize(std::string_view text) {
    using namespace tokenize_detail;

    std::vector<std::vector<char32_t>> raw_tokens;
    std::vector<char32_t> current;
    for (std::size_t i = 0; i < text.size();) {
        auto cp = utf8_decode(text, i);
        i += cp.length;
        if (is_unicode_space(cp.value)) {
            if (!current.empty()) raw_tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(lower_cp(cp.value));
        }
    }
    if (!current.empty()) raw_tokens.push_back(std::move(current));

    std::vector<std::string> out;
    out.reserve(raw_tokens.size());
    for (auto& tok : raw_tokens) {
        std::size_t b = 0, e = tok.size();
        while (b < e && is_strip_punct(tok[b])) ++b;
        while (e > b && is_strip_punct(tok[e - 1])) --e;
        if (b == e) continue;
        std::string s;
        for (std::size_t i = b; i < e; ++i) append_utf8(s, tok[i]);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace copyguard
