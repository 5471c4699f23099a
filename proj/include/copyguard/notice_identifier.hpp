#pragma once

#include <optional>
#include <string>
#include <vector>

#include "copyguard/domain.hpp"
#include "copyguard/providers.hpp"

namespace copyguard {

// Explicit ownership-marker detection over context text. Text-level only; no
// logo or watermark analysis.

struct NoticeMatch {
    std::string matched_pattern;
    std::size_t span_start = 0;  // byte offsets into scanned_text
    std::size_t span_end = 0;
    std::string scanned_text;
};

inline const std::vector<std::string>& default_notice_patterns() {
    static const std::vector<std::string> v = {
        "copyright",
        "\xC2\xA9",  // the circled-c sign
        "(c)",
        "all rights reserved",
    };
    return v;
}

constexpr double kDefaultOcrMinConfidence = 0.5;

// Concatenates OCR blocks at or above min_confidence, one per line, in
// provider order.
inline std::string extract_text(const ContextItem& item, OcrProvider& ocr,
                                double min_confidence = kDefaultOcrMinConfidence) {
    std::string out;
    for (const auto& block : ocr.extract(item.image)) {
        if (block.confidence < min_confidence) continue;
        if (!out.empty()) out.push_back('\n');
        out += block.text;
    }
    return out;
}

namespace notice_detail {

inline bool matches_at(std::string_view text, std::size_t pos, std::string_view pattern,
                       std::size_t& match_len) {
    if (pos + pattern.size() > text.size()) return false;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (ascii_lower(text[pos + i]) != ascii_lower(pattern[i])) return false;
    }
    match_len = pattern.size();
    // "(c)" alone is too ambiguous (code snippets, enumerations); it counts
    // only when whitespace and a digit follow.
    if (pattern == "(c)") {
        std::size_t j = pos + pattern.size();
        if (j >= text.size() || !is_ascii_space(text[j])) return false;
        while (j < text.size() && is_ascii_space(text[j])) ++j;
        if (j >= text.size() || text[j] < '0' || text[j] > '9') return false;
    }
    return true;
}

}  // namespace notice_detail

// Case-insensitive scan for the earliest pattern occurrence; byte offsets
// refer to the scanned text as given.
inline std::optional<NoticeMatch> detect_notice(
    std::string_view text,
    const std::vector<std::string>& patterns = default_notice_patterns()) {
    for (std::size_t pos = 0; pos < text.size(); ++pos) {
        for (const auto& pattern : patterns) {
            if (pattern.empty()) continue;
            std::size_t len = 0;
            if (notice_detail::matches_at(text, pos, pattern, len)) {
                NoticeMatch m;
                m.matched_pattern = pattern;
                m.span_start = pos;
                m.span_end = pos + len;
                m.scanned_text = std::string(text);
                return m;
            }
        }
    }
    return std::nullopt;
}

}  // namespace copyguard
