#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "copyguard/raster.hpp"
#include "copyguard/util.hpp"

namespace copyguard {

// ---------------------------------------------------------------------------
// Core vocabulary shared by every stage of the pipeline. All types here are
// immutable value objects; copy freely across threads.
// ---------------------------------------------------------------------------

enum class MaterialKind { Book, News, Lyrics, CodeDoc };
constexpr int kMaterialKindCount = 4;

enum class NoticeFormKind {
    None,
    AllRightsReservedText,
    OriginalText,
    AllRightsReservedImage,
    OriginalImage,
};
constexpr int kNoticeFormCount = 5;

enum class InfringementTask { Repetition, Extraction, Paraphrasing, Translation };
constexpr int kInfringementTaskCount = 4;

// How (and whether) an ownership claim accompanies the content.
struct NoticeForm {
    NoticeFormKind variant = NoticeFormKind::None;
    std::optional<std::string> notice_text;

    bool embeds_in_text() const {
        return variant == NoticeFormKind::AllRightsReservedText ||
               variant == NoticeFormKind::OriginalText;
    }
    bool embeds_in_image() const {
        return variant == NoticeFormKind::AllRightsReservedImage ||
               variant == NoticeFormKind::OriginalImage;
    }
};

// One multimodal context: the rendered page plus the text it was rendered
// from, when known (benchmark items carry it; live gateway traffic does not).
struct ContextItem {
    std::string id;
    ImageBytes image;  // PNG bytes
    std::optional<std::string> source_text;
    MaterialKind material_kind = MaterialKind::Book;
    NoticeForm notice_form;
};

struct QueryItem {
    InfringementTask task = InfringementTask::Repetition;
    int seed_index = 0;
    std::string text;
};

struct ModelResponse {
    std::string text;
    std::int64_t latency_ms = 0;
    std::string provider_id;
};

// Wall-clock cost of the two concurrent compliance checks plus whether the
// model had to be re-invoked with a reminder.
struct PipelineTimings {
    std::int64_t t1_ms = 0;  // OCR + search + status verification
    std::int64_t t2_ms = 0;  // query risk analysis
    bool retried = false;
};

// ---------------------------------------------------------------------------
// Enum <-> string (canonical snake_case wire names)
// ---------------------------------------------------------------------------

inline std::string to_string(MaterialKind k) {
    switch (k) {
        case MaterialKind::Book: return "book";
        case MaterialKind::News: return "news";
        case MaterialKind::Lyrics: return "lyrics";
        case MaterialKind::CodeDoc: return "code_doc";
    }
    return "book";
}

inline std::optional<MaterialKind> material_kind_from_string(std::string_view s) {
    if (s == "book") return MaterialKind::Book;
    if (s == "news") return MaterialKind::News;
    if (s == "lyrics") return MaterialKind::Lyrics;
    if (s == "code_doc") return MaterialKind::CodeDoc;
    return std::nullopt;
}

inline std::string to_string(NoticeFormKind f) {
    switch (f) {
        case NoticeFormKind::None: return "none";
        case NoticeFormKind::AllRightsReservedText: return "all_rights_reserved_text";
        case NoticeFormKind::OriginalText: return "original_text";
        case NoticeFormKind::AllRightsReservedImage: return "all_rights_reserved_image";
        case NoticeFormKind::OriginalImage: return "original_image";
    }
    return "none";
}

inline std::optional<NoticeFormKind> notice_form_from_string(std::string_view s) {
    if (s == "none") return NoticeFormKind::None;
    if (s == "all_rights_reserved_text") return NoticeFormKind::AllRightsReservedText;
    if (s == "original_text") return NoticeFormKind::OriginalText;
    if (s == "all_rights_reserved_image") return NoticeFormKind::AllRightsReservedImage;
    if (s == "original_image") return NoticeFormKind::OriginalImage;
    return std::nullopt;
}

inline std::string to_string(InfringementTask t) {
    switch (t) {
        case InfringementTask::Repetition: return "repetition";
        case InfringementTask::Extraction: return "extraction";
        case InfringementTask::Paraphrasing: return "paraphrasing";
        case InfringementTask::Translation: return "translation";
    }
    return "repetition";
}

inline std::optional<InfringementTask> task_from_string(std::string_view s) {
    if (s == "repetition") return InfringementTask::Repetition;
    if (s == "extraction") return InfringementTask::Extraction;
    if (s == "paraphrasing") return InfringementTask::Paraphrasing;
    if (s == "translation") return InfringementTask::Translation;
    return std::nullopt;
}

inline const std::vector<NoticeFormKind>& all_notice_forms() {
    static const std::vector<NoticeFormKind> v = {
        NoticeFormKind::None,
        NoticeFormKind::AllRightsReservedText,
        NoticeFormKind::OriginalText,
        NoticeFormKind::AllRightsReservedImage,
        NoticeFormKind::OriginalImage,
    };
    return v;
}

inline const std::vector<InfringementTask>& all_tasks() {
    static const std::vector<InfringementTask> v = {
        InfringementTask::Repetition,
        InfringementTask::Extraction,
        InfringementTask::Paraphrasing,
        InfringementTask::Translation,
    };
    return v;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

// Returns every violated invariant by name; empty means the item is valid.
// Pure: identical inputs always produce identical output.
inline std::vector<std::string> validate_context(const ContextItem& item) {
    std::vector<std::string> errors;

    auto raster = png_decode(item.image);
    if (!raster || raster->empty()) errors.emplace_back("image undecodable");

    const bool has_notice_text = item.notice_form.notice_text.has_value();
    if (item.notice_form.variant == NoticeFormKind::None) {
        if (has_notice_text) errors.emplace_back("notice_text must be absent for form none");
    } else if (!has_notice_text) {
        errors.emplace_back("notice_text required");
    }

    if (item.notice_form.embeds_in_text() && has_notice_text) {
        if (!item.source_text ||
            item.source_text->find(*item.notice_form.notice_text) == std::string::npos)
            errors.emplace_back("source_text must contain notice_text verbatim");
    }

    return errors;
}

inline std::vector<std::string> validate_query(const QueryItem& q) {
    std::vector<std::string> errors;
    if (q.seed_index < 0) errors.emplace_back("seed_index negative");
    if (trim(q.text).empty()) errors.emplace_back("query text empty");
    return errors;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ModelResponse& r) {
    return {{"text", r.text}, {"latency_ms", r.latency_ms}, {"provider_id", r.provider_id}};
}

inline nlohmann::json to_json(const PipelineTimings& t) {
    return {{"t1_ms", t.t1_ms}, {"t2_ms", t.t2_ms}, {"retried", t.retried}};
}

}  // namespace copyguard
