#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "copyguard/domain.hpp"
#include "copyguard/font.hpp"
#include "copyguard/prompts.hpp"
#include "copyguard/providers.hpp"
#include "copyguard/tokenize.hpp"

namespace copyguard {

// Benchmark fabrication: render source text to page images, attach ownership
// notices in text or image form, and expand seed queries through the vendored
// rewriter prompt.

inline constexpr const char* kAllRightsReserved = "All Rights Reserved";

struct MaterialRecord {
    MaterialKind kind = MaterialKind::Book;
    std::string title;
    std::string body;  // the excerpt shown to the model
    std::optional<std::string> original_notice;
    std::string source_ref;  // provenance URL or identifier
};

inline std::vector<std::string> validate_material(const MaterialRecord& m) {
    std::vector<std::string> errors;
    if (trim(m.body).empty()) errors.emplace_back("body empty");
    return errors;
}

inline MaterialRecord material_from_json(const nlohmann::json& j) {
    MaterialRecord m;
    if (auto k = material_kind_from_string(j.value("kind", "book"))) m.kind = *k;
    m.title = j.value("title", "");
    m.body = j.at("body").get<std::string>();
    if (j.contains("original_notice") && j["original_notice"].is_string())
        m.original_notice = j["original_notice"].get<std::string>();
    m.source_ref = j.value("source_ref", "");
    return m;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

struct RenderConfig {
    int page_width = 1024;
    int scale = 2;   // 5x7 glyphs at scale 2 -> 16 px line height
    int margin = 8;
    int band_padding = 8;  // extra height around an image-embedded notice
};

constexpr std::size_t kMaxRenderChars = 20000;

namespace builder_detail {

// Left-aligned word wrap at a fixed number of cells per line; explicit
// newlines are respected and overlong words are hard-broken.
inline std::vector<std::vector<char32_t>> wrap_lines(std::string_view body, int cells_per_line) {
    std::vector<std::vector<char32_t>> lines;
    std::vector<char32_t> line, word;

    auto flush_word = [&] {
        if (word.empty()) return;
        int needed = static_cast<int>(word.size()) + (line.empty() ? 0 : 1);
        if (!line.empty() && static_cast<int>(line.size()) + needed > cells_per_line) {
            lines.push_back(line);
            line.clear();
        }
        if (!line.empty()) line.push_back(U' ');
        for (char32_t cp : word) {
            if (static_cast<int>(line.size()) >= cells_per_line) {
                lines.push_back(line);
                line.clear();
            }
            line.push_back(cp);
        }
        word.clear();
    };

    for (std::size_t i = 0; i < body.size();) {
        auto cp = utf8_decode(body, i);
        i += cp.length;
        if (cp.value == U'\n') {
            flush_word();
            lines.push_back(line);
            line.clear();
        } else if (is_unicode_space(cp.value)) {
            flush_word();
        } else {
            word.push_back(cp.value);
        }
    }
    flush_word();
    if (!line.empty() || lines.empty()) lines.push_back(line);
    return lines;
}

}  // namespace builder_detail

// Deterministic rasterization of a text body: fixed page width, monospaced
// glyphs, white background, black ink. source_text carries the body so the
// OCR stub can replay it.
inline ContextItem render_text_image(const std::string& body, const RenderConfig& cfg = {}) {
    if (trim(body).empty()) throw std::invalid_argument("render_text_image: body empty");
    if (utf8_length(body) > kMaxRenderChars)
        throw std::invalid_argument("render_text_image: body exceeds 20000 characters");

    const int cell_w = font5x7::cell_width(cfg.scale);
    const int cell_h = font5x7::cell_height(cfg.scale);
    const int cells_per_line = std::max(1, (cfg.page_width - 2 * cfg.margin) / cell_w);
    auto lines = builder_detail::wrap_lines(body, cells_per_line);

    Raster img = Raster::blank(cfg.page_width,
                               2 * cfg.margin + static_cast<int>(lines.size()) * cell_h);
    for (std::size_t row = 0; row < lines.size(); ++row) {
        int x = cfg.margin;
        int y = cfg.margin + static_cast<int>(row) * cell_h;
        for (char32_t cp : lines[row]) {
            draw_glyph(img, x, y, cp, cfg.scale);
            x += cell_w;
        }
    }

    ContextItem item;
    item.image = png_encode(img);
    item.source_text = body;
    return item;
}

// ---------------------------------------------------------------------------
// Notice embedding (x' = x (+) c)
// ---------------------------------------------------------------------------

// Appends the notice as a final text line; everything else is preserved.
inline MaterialRecord embed_notice_text(const MaterialRecord& record,
                                        const std::string& notice_text) {
    if (notice_text.empty())
        throw std::invalid_argument("embed_notice_text: notice text empty");
    MaterialRecord out = record;
    out.body = record.body + "\n" + notice_text;
    return out;
}

// Renders the notice as an opaque black-on-white band appended below the
// image; output height grows by exactly glyph height + padding.
inline ImageBytes embed_notice_image(const ImageBytes& image, const std::string& notice_text,
                                     const RenderConfig& cfg = {}) {
    if (notice_text.empty())
        throw std::invalid_argument("embed_notice_image: notice text empty");
    auto base = png_decode(image);
    if (!base || base->empty())
        throw std::invalid_argument("embed_notice_image: image undecodable");

    const int band_h = font5x7::cell_height(cfg.scale) + cfg.band_padding;
    Raster out = Raster::blank(base->width, base->height + band_h, 0xFF);
    std::copy(base->pixels.begin(), base->pixels.end(), out.pixels.begin());
    draw_text_line(out, cfg.band_padding / 2, base->height + cfg.band_padding / 2, notice_text,
                   cfg.scale);
    return png_encode(out);
}

// ---------------------------------------------------------------------------
// Query rewriting
// ---------------------------------------------------------------------------

struct RewriteResult {
    std::vector<QueryItem> variants;
    std::vector<std::string> warnings;
};

// k independent rewriter calls; each keeps the seed's task and index.
// Duplicates (token-identical to an earlier variant) are re-requested up to
// three extra times, then kept with a warning.
inline RewriteResult rewrite_query(const QueryItem& seed, ChatProvider& chat, int k) {
    if (k < 1) throw std::invalid_argument("rewrite_query: k must be >= 1");
    if (auto errors = validate_query(seed); !errors.empty())
        throw std::invalid_argument("rewrite_query: invalid seed: " + errors.front());

    auto ask = [&] {
        std::string prompt =
            prompts::substitute(prompts::query_rewriter(), {{"query", seed.text}});
        return trim(chat.complete(std::nullopt, prompt));
    };

    RewriteResult out;
    std::vector<Tokens> seen;
    for (int i = 0; i < k; ++i) {
        std::string reply = ask();
        Tokens toks = tokenize(reply);
        bool duplicate = reply.empty() ||
                         std::find(seen.begin(), seen.end(), toks) != seen.end();
        for (int attempt = 0; duplicate && attempt < 3; ++attempt) {
            reply = ask();
            toks = tokenize(reply);
            duplicate = reply.empty() ||
                        std::find(seen.begin(), seen.end(), toks) != seen.end();
        }
        if (reply.empty())
            throw ProviderError(ProviderErrorKind::BadPayload, "rewriter returned empty text");
        if (duplicate)
            out.warnings.push_back("duplicate rewrite kept for seed " +
                                   std::to_string(seed.seed_index) + " variant " +
                                   std::to_string(i));
        seen.push_back(std::move(toks));
        out.variants.push_back({seed.task, seed.seed_index, reply});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset assembly
// ---------------------------------------------------------------------------

struct ManifestEntry {
    std::string context_path;  // relative to the manifest file
    NoticeFormKind notice_form = NoticeFormKind::None;
    InfringementTask task = InfringementTask::Repetition;
    std::string query_text;
    std::string material_title;
    int seed_index = 0;
    // Self-contained scoring context: the notice-free reference body, the
    // full visible text, and the material kind for verification prompts.
    std::string body;
    std::string source_text;
    MaterialKind material_kind = MaterialKind::Book;
};

struct ManifestCounts {
    std::size_t total = 0;
    std::map<std::string, std::size_t> by_form;
    std::map<std::string, std::size_t> by_task;

    bool operator==(const ManifestCounts&) const = default;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    ManifestCounts counts;
    std::uint64_t seed = 0;
    int q_per_task = 0;
};

inline ManifestCounts tally_entries(const std::vector<ManifestEntry>& entries) {
    ManifestCounts c;
    c.total = entries.size();
    for (const auto& e : entries) {
        ++c.by_form[to_string(e.notice_form)];
        ++c.by_task[to_string(e.task)];
    }
    return c;
}

inline std::size_t expected_entry_count(std::size_t materials, std::size_t forms,
                                        std::size_t tasks, std::size_t q_per_task) {
    return materials * forms * tasks * q_per_task;
}

struct BuildConfig {
    std::filesystem::path out_dir;
    int q_per_task = 10;
    int rewrites_per_seed = 10;
    std::uint64_t seed = 0;  // rotates the round-robin start; recorded in the manifest
    RenderConfig render;
    std::string generic_notice = kAllRightsReserved;
};

namespace builder_detail {

inline std::string slugify(std::string_view s) {
    std::string out;
    for (char ch : s) {
        char c = ascii_lower(ch);
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) out.push_back(c);
        else if (!out.empty() && out.back() != '_') out.push_back('_');
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out.empty() ? "material" : out;
}

struct RenderedContext {
    ImageBytes image;
    std::string body;         // notice-free reference
    std::string source_text;  // everything visible in the image
};

inline RenderedContext render_for_form(const MaterialRecord& material, NoticeFormKind form,
                                       const std::string& generic_notice,
                                       const RenderConfig& cfg) {
    std::optional<std::string> notice;
    switch (form) {
        case NoticeFormKind::None: break;
        case NoticeFormKind::AllRightsReservedText:
        case NoticeFormKind::AllRightsReservedImage: notice = generic_notice; break;
        case NoticeFormKind::OriginalText:
        case NoticeFormKind::OriginalImage:
            if (!material.original_notice)
                throw std::invalid_argument("material \"" + material.title +
                                            "\" lacks original_notice for form " +
                                            to_string(form));
            notice = *material.original_notice;
            break;
    }

    RenderedContext out;
    out.body = material.body;
    if (!notice) {
        out.image = render_text_image(material.body, cfg).image;
        out.source_text = material.body;
        return out;
    }

    out.source_text = material.body + "\n" + *notice;
    if (form == NoticeFormKind::AllRightsReservedText || form == NoticeFormKind::OriginalText) {
        auto noticed = embed_notice_text(material, *notice);
        out.image = render_text_image(noticed.body, cfg).image;
    } else {
        auto base = render_text_image(material.body, cfg);
        out.image = embed_notice_image(base.image, *notice, cfg);
    }
    return out;
}

}  // namespace builder_detail

// Expands each task's seeds into a rewrite pool (seeds themselves when no
// rewriter is supplied), then emits one entry per material x form x task x
// query slot. Queries are drawn round-robin by seed then rewrite index.
inline DatasetManifest build_dataset(
    const std::vector<MaterialRecord>& materials,
    const std::map<InfringementTask, std::vector<QueryItem>>& seeds, ChatProvider* rewriter,
    const BuildConfig& cfg) {
    for (auto task : all_tasks()) {
        auto it = seeds.find(task);
        if (it == seeds.end() || it->second.empty())
            throw std::invalid_argument("build_dataset: missing seeds for task " +
                                        to_string(task));
    }
    if (cfg.q_per_task < 1) throw std::invalid_argument("build_dataset: q_per_task must be >= 1");

    // Round-robin pool per task: [s0r0, s1r0, s2r0, s0r1, ...]
    std::map<InfringementTask, std::vector<QueryItem>> pools;
    for (auto task : all_tasks()) {
        const auto& task_seeds = seeds.at(task);
        std::vector<std::vector<QueryItem>> per_seed;
        for (const auto& seed : task_seeds) {
            if (rewriter) per_seed.push_back(rewrite_query(seed, *rewriter, cfg.rewrites_per_seed).variants);
            else per_seed.push_back({seed});
        }
        std::size_t depth = 0;
        for (const auto& v : per_seed) depth = std::max(depth, v.size());
        auto& pool = pools[task];
        for (std::size_t r = 0; r < depth; ++r) {
            for (const auto& v : per_seed) {
                if (r < v.size()) pool.push_back(v[r]);
            }
        }
    }

    std::filesystem::create_directories(cfg.out_dir / "images");

    DatasetManifest manifest;
    manifest.seed = cfg.seed;
    manifest.q_per_task = cfg.q_per_task;

    for (const auto& material : materials) {
        if (auto errors = validate_material(material); !errors.empty())
            throw std::invalid_argument("build_dataset: material \"" + material.title +
                                        "\": " + errors.front());
        std::string slug = builder_detail::slugify(material.title);
        for (auto form : all_notice_forms()) {
            auto ctx = builder_detail::render_for_form(material, form, cfg.generic_notice,
                                                       cfg.render);
            std::string rel = "images/" + slug + "_" + to_string(form) + ".png";
            std::ofstream img_out(cfg.out_dir / rel, std::ios::binary);
            img_out.write(reinterpret_cast<const char*>(ctx.image.data()),
                          static_cast<std::streamsize>(ctx.image.size()));
            if (!img_out) throw std::runtime_error("build_dataset: cannot write " + rel);

            for (auto task : all_tasks()) {
                const auto& pool = pools[task];
                for (int q = 0; q < cfg.q_per_task; ++q) {
                    const auto& query = pool[(q + cfg.seed) % pool.size()];
                    ManifestEntry e;
                    e.context_path = rel;
                    e.notice_form = form;
                    e.task = task;
                    e.query_text = query.text;
                    e.material_title = material.title;
                    e.seed_index = query.seed_index;
                    e.body = ctx.body;
                    e.source_text = ctx.source_text;
                    e.material_kind = material.kind;
                    manifest.entries.push_back(std::move(e));
                }
            }
        }
    }
    manifest.counts = tally_entries(manifest.entries);
    return manifest;
}

// ---------------------------------------------------------------------------
// Manifest persistence: a header line with the counts summary, then one entry
// per line.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ManifestEntry& e) {
    return {{"context_path", e.context_path},
            {"notice_form", to_string(e.notice_form)},
            {"task", to_string(e.task)},
            {"query_text", e.query_text},
            {"material_title", e.material_title},
            {"seed_index", e.seed_index},
            {"body", e.body},
            {"source_text", e.source_text},
            {"material_kind", to_string(e.material_kind)}};
}

inline ManifestEntry manifest_entry_from_json(const nlohmann::json& j) {
    ManifestEntry e;
    e.context_path = j.at("context_path").get<std::string>();
    if (auto f = notice_form_from_string(j.at("notice_form").get<std::string>()))
        e.notice_form = *f;
    if (auto t = task_from_string(j.at("task").get<std::string>())) e.task = *t;
    e.query_text = j.at("query_text").get<std::string>();
    e.material_title = j.value("material_title", "");
    e.seed_index = j.value("seed_index", 0);
    e.body = j.value("body", "");
    e.source_text = j.value("source_text", e.body);
    if (auto k = material_kind_from_string(j.value("material_kind", "book")))
        e.material_kind = *k;
    return e;
}

inline void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path.string());
    nlohmann::json header{{"kind", "manifest_header"},
                          {"total", manifest.counts.total},
                          {"by_form", manifest.counts.by_form},
                          {"by_task", manifest.counts.by_task},
                          {"seed", manifest.seed},
                          {"q_per_task", manifest.q_per_task}};
    out << header.dump() << '\n';
    for (const auto& e : manifest.entries) out << to_json(e).dump() << '\n';
    if (!out) throw std::runtime_error("write_manifest: write failed");
}

// Loads and self-checks: the header's counts summary must equal the tallies
// recomputed from the entries.
inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_manifest: cannot open " + path.string());

    DatasetManifest manifest;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        if (!have_header && j.value("kind", "") == "manifest_header") {
            manifest.counts.total = j.value("total", std::size_t{0});
            if (j.contains("by_form"))
                manifest.counts.by_form =
                    j["by_form"].get<std::map<std::string, std::size_t>>();
            if (j.contains("by_task"))
                manifest.counts.by_task =
                    j["by_task"].get<std::map<std::string, std::size_t>>();
            manifest.seed = j.value("seed", std::uint64_t{0});
            manifest.q_per_task = j.value("q_per_task", 0);
            have_header = true;
            continue;
        }
        manifest.entries.push_back(manifest_entry_from_json(j));
    }
    if (!have_header) throw std::runtime_error("load_manifest: missing header line");
    if (tally_entries(manifest.entries) != manifest.counts)
        throw std::runtime_error("load_manifest: counts summary does not match entries");
    return manifest;
}

// Reads per-material JSON files (*.json) from a corpus directory.
inline std::vector<MaterialRecord> load_materials(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<MaterialRecord> out;
    for (const auto& file : files) {
        std::ifstream in(file);
        nlohmann::json j = nlohmann::json::parse(in);
        auto m = material_from_json(j);
        if (auto errors = validate_material(m); !errors.empty())
            throw std::runtime_error("load_materials: " + file.string() + ": " + errors.front());
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace copyguard
