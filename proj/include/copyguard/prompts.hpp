#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <copyguard/prompts_data.hpp>

#include "copyguard/domain.hpp"
#include "copyguard/util.hpp"

namespace copyguard::prompts {

// Vendored prompt templates, embedded verbatim at build time. Tests pin their
// checksums; edit the files under prompts/, never these accessors.

namespace detail {
inline std::string_view view(const unsigned char* data, std::size_t len) {
    return {reinterpret_cast<const char*>(data), len};
}
}  // namespace detail

inline std::string_view risk_analyzer() {
    return detail::view(data::k_risk_analyzer, data::k_risk_analyzer_len);
}
inline std::string_view refusal_judge() {
    return detail::view(data::k_refusal_judge, data::k_refusal_judge_len);
}
inline std::string_view query_rewriter() {
    return detail::view(data::k_query_rewriter, data::k_query_rewriter_len);
}

inline std::string_view verification(MaterialKind kind) {
    switch (kind) {
        case MaterialKind::Book: return detail::view(data::k_verify_book, data::k_verify_book_len);
        case MaterialKind::News: return detail::view(data::k_verify_news, data::k_verify_news_len);
        case MaterialKind::Lyrics:
            return detail::view(data::k_verify_lyrics, data::k_verify_lyrics_len);
        case MaterialKind::CodeDoc:
            return detail::view(data::k_verify_code, data::k_verify_code_len);
    }
    return detail::view(data::k_verify_book, data::k_verify_book_len);
}

inline std::string_view seeds_raw(InfringementTask task) {
    switch (task) {
        case InfringementTask::Repetition:
            return detail::view(data::k_seeds_repetition, data::k_seeds_repetition_len);
        case InfringementTask::Extraction:
            return detail::view(data::k_seeds_extraction, data::k_seeds_extraction_len);
        case InfringementTask::Paraphrasing:
            return detail::view(data::k_seeds_paraphrasing, data::k_seeds_paraphrasing_len);
        case InfringementTask::Translation:
            return detail::view(data::k_seeds_translation, data::k_seeds_translation_len);
    }
    return detail::view(data::k_seeds_repetition, data::k_seeds_repetition_len);
}

// One seed prompt per line.
inline std::vector<std::string> seed_lines(InfringementTask task) {
    std::vector<std::string> out;
    std::string_view raw = seeds_raw(task);
    std::size_t start = 0;
    while (start < raw.size()) {
        std::size_t end = raw.find('\n', start);
        if (end == std::string_view::npos) end = raw.size();
        std::string line = trim(raw.substr(start, end - start));
        if (!line.empty()) out.push_back(std::move(line));
        start = end + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Placeholder substitution
// ---------------------------------------------------------------------------

class MissingFieldError : public std::invalid_argument {
public:
    explicit MissingFieldError(std::string field)
        : std::invalid_argument(field + " required"), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Replaces every {identifier} placeholder from fields; a placeholder with no
// matching field is an error naming it. Braces not followed by an identifier
// and '}' (e.g. JSON examples inside templates) pass through untouched.
inline std::string substitute(std::string_view tmpl,
                              const std::map<std::string, std::string>& fields) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        char c = tmpl[i];
        if (c == '{') {
            std::size_t j = i + 1;
            while (j < tmpl.size() && (std::isalnum(static_cast<unsigned char>(tmpl[j])) ||
                                       tmpl[j] == '_'))
                ++j;
            if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
                std::string name(tmpl.substr(i + 1, j - i - 1));
                auto it = fields.find(name);
                if (it == fields.end()) throw MissingFieldError(name);
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Role splitting
// ---------------------------------------------------------------------------

struct SystemUser {
    std::string system;
    std::string user;
};

// The judge template carries explicit SYSTEM:/USER: sections.
inline SystemUser split_refusal_judge() {
    std::string_view tmpl = refusal_judge();
    constexpr std::string_view sys_tag = "SYSTEM:\n";
    constexpr std::string_view user_tag = "\nUSER:\n";
    std::size_t user_pos = tmpl.find(user_tag);
    if (tmpl.substr(0, sys_tag.size()) != sys_tag || user_pos == std::string_view::npos)
        throw std::runtime_error("refusal judge template: missing SYSTEM/USER sections");
    return {trim(tmpl.substr(sys_tag.size(), user_pos - sys_tag.size())),
            trim(tmpl.substr(user_pos + user_tag.size()))};
}

// The analyzer template ends with the request slot; everything before it is
// the system text (instructions plus the three few-shot examples), and the
// per-request user message completes the template so that system + user
// equals the substituted original.
inline SystemUser split_risk_analyzer() {
    std::string_view tmpl = risk_analyzer();
    constexpr std::string_view marker = "User Request: {request}";
    std::size_t pos = tmpl.rfind(marker);
    if (pos == std::string_view::npos)
        throw std::runtime_error("risk analyzer template: missing request slot");
    return {trim(tmpl.substr(0, pos)), std::string(tmpl.substr(pos))};
}

}  // namespace copyguard::prompts
