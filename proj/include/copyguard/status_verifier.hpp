#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "copyguard/prompts.hpp"
#include "copyguard/providers.hpp"
#include "copyguard/tokenize.hpp"

namespace copyguard {

// When no explicit notice is present: find the likely source via web search,
// then ask a prompted chat model for the current copyright status.

struct SourceCandidate {
    std::string title;
    std::string url;
    std::string snippet;
    std::optional<std::string> published;
};

struct CopyrightStatusRecord {
    std::string title;
    int copyright_status = 1;  // 1 = in copyright, 0 = public domain
    std::optional<std::string> expiration_date;  // "YYYY/MM"
    std::vector<std::string> legal_references;
    std::string legal_source;
    std::int64_t fetched_at = 0;  // epoch seconds
    MaterialKind material_kind = MaterialKind::Book;
};

inline nlohmann::json to_json(const CopyrightStatusRecord& r) {
    nlohmann::json j{
        {"title", r.title},
        {"copyright_status", r.copyright_status},
        {"legal_references", r.legal_references},
        {"legal_source", r.legal_source},
        {"fetched_at", r.fetched_at},
        {"material_kind", to_string(r.material_kind)},
    };
    if (r.expiration_date) j["expiration_date"] = *r.expiration_date;
    return j;
}

inline CopyrightStatusRecord status_record_from_json(const nlohmann::json& j) {
    CopyrightStatusRecord r;
    r.title = j.value("title", "");
    r.copyright_status = j.at("copyright_status").get<int>();
    if (j.contains("expiration_date") && j["expiration_date"].is_string())
        r.expiration_date = j["expiration_date"].get<std::string>();
    if (j.contains("legal_references"))
        r.legal_references = j["legal_references"].get<std::vector<std::string>>();
    r.legal_source = j.value("legal_source", "");
    r.fetched_at = j.value("fetched_at", std::int64_t{0});
    if (auto k = material_kind_from_string(j.value("material_kind", "book")))
        r.material_kind = *k;
    return r;
}

// ---------------------------------------------------------------------------
// Source lookup
// ---------------------------------------------------------------------------

// One search with the leading <=32 whitespace tokens of the extracted text,
// quoted; results map to candidates in rank order.
inline std::vector<SourceCandidate> find_source(const std::string& extracted_text,
                                                SearchProvider& search, int top_k) {
    if (trim(extracted_text).empty())
        throw std::invalid_argument("find_source: extracted text is empty");

    auto tokens = split_whitespace(extracted_text);
    if (tokens.size() > 32) tokens.resize(32);
    std::string query = "\"";
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) query.push_back(' ');
        query += tokens[i];
    }
    query.push_back('"');

    std::vector<SourceCandidate> out;
    for (const auto& hit : search.search(query, top_k)) {
        if (static_cast<int>(out.size()) >= top_k) break;
        out.push_back({hit.title, hit.url, hit.snippet, hit.date});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verification prompt
// ---------------------------------------------------------------------------

// Fills the vendored template for the material kind. Each kind has its own
// required placeholders; a missing one raises an error naming it.
inline std::string build_verification_prompt(MaterialKind kind,
                                             const std::map<std::string, std::string>& fields) {
    return prompts::substitute(prompts::verification(kind), fields);
}

namespace verifier_detail {

inline bool valid_expiration(std::string_view s) {
    if (s.size() != 7 || s[4] != '/') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u}) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
}

inline std::string url_host(std::string_view url) {
    auto scheme = url.find("://");
    std::size_t start = scheme == std::string_view::npos ? 0 : scheme + 3;
    std::size_t end = url.find_first_of("/:?", start);
    return std::string(url.substr(start, end == std::string_view::npos ? url.size() - start
                                                                       : end - start));
}

}  // namespace verifier_detail

// Asks the chat model for the candidate's status and parses the structured
// reply. Never returns a partially valid record: any domain violation in the
// reply is a BadPayload error.
inline CopyrightStatusRecord verify_status(const SourceCandidate& candidate, MaterialKind kind,
                                           ChatProvider& chat,
                                           std::int64_t now_s = now_epoch_seconds()) {
    if (candidate.url.empty())
        throw std::invalid_argument("verify_status: candidate url is empty");

    std::map<std::string, std::string> fields{
        {"title", candidate.title},
        {"excerpt", candidate.snippet},
        {"url", candidate.url},
        {"link", candidate.url},
        {"date", candidate.published.value_or("unknown")},
        {"publisher", verifier_detail::url_host(candidate.url)},
    };
    std::string reply = chat.complete(std::nullopt, build_verification_prompt(kind, fields));

    auto payload = extract_first_json_object(reply);
    if (!payload)
        throw ProviderError(ProviderErrorKind::BadPayload, "verifier reply has no JSON object");
    nlohmann::json j = nlohmann::json::parse(*payload, nullptr, false);
    if (j.is_discarded())
        throw ProviderError(ProviderErrorKind::BadPayload, "verifier reply is not valid JSON");

    CopyrightStatusRecord record;
    record.material_kind = kind;
    record.fetched_at = now_s;
    record.title = j.contains("title") && j["title"].is_string()
                       ? j["title"].get<std::string>()
                       : candidate.title;

    if (!j.contains("copyright_status") || !j["copyright_status"].is_number_integer())
        throw ProviderError(ProviderErrorKind::BadPayload, "copyright_status missing");
    int status = j["copyright_status"].get<int>();
    if (status != 0 && status != 1)
        throw ProviderError(ProviderErrorKind::BadPayload, "copyright_status out of domain");
    record.copyright_status = status;

    if (j.contains("expiration_date") && j["expiration_date"].is_string()) {
        std::string date = j["expiration_date"].get<std::string>();
        if (!date.empty()) {
            if (!verifier_detail::valid_expiration(date))
                throw ProviderError(ProviderErrorKind::BadPayload,
                                    "expiration_date not YYYY/MM");
            record.expiration_date = date;
        }
    }

    if (j.contains("legal_references")) {
        if (!j["legal_references"].is_array())
            throw ProviderError(ProviderErrorKind::BadPayload, "legal_references not a list");
        for (const auto& e : j["legal_references"]) {
            if (!e.is_string())
                throw ProviderError(ProviderErrorKind::BadPayload, "legal_references entry");
            record.legal_references.push_back(e.get<std::string>());
        }
    }
    if (j.contains("legal_source") && j["legal_source"].is_string())
        record.legal_source = j["legal_source"].get<std::string>();

    return record;
}

// ---------------------------------------------------------------------------
// Status cache
// ---------------------------------------------------------------------------

class CacheIoError : public std::runtime_error {
public:
    explicit CacheIoError(const std::string& what) : std::runtime_error(what) {}
};

// Content-addressed key: normalized leading 32 tokens of the extracted text.
inline std::string status_cache_key(std::string_view extracted_text) {
    auto toks = tokenize(extracted_text);
    if (toks.size() > 32) toks.resize(32);
    std::string joined;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) joined.push_back(' ');
        joined += toks[i];
    }
    return to_hex64(fnv1a64(joined));
}

constexpr int kDefaultStatusTtlDays = 30;

// Persistent TTL cache over verification results, one JSON record per line.
// Concurrent readers share; writers are exclusive; last write wins. Dead
// lines are dropped whenever the live set is rewritten (compaction on load).
class StatusCache {
public:
    explicit StatusCache(std::filesystem::path path, int ttl_days = kDefaultStatusTtlDays,
                         std::function<std::int64_t()> now = now_epoch_seconds)
        : path_(std::move(path)), ttl_s_(std::int64_t{ttl_days} * 24 * 3600),
          now_(std::move(now)) {
        load();
    }

    std::optional<CopyrightStatusRecord> get(const std::string& key) const {
        std::shared_lock lock(mu_);
        auto it = entries_.find(key);
        if (it == entries_.end() || it->second.expires_at <= now_()) return std::nullopt;
        return it->second.record;
    }

    void put(const std::string& key, const CopyrightStatusRecord& record) {
        std::unique_lock lock(mu_);
        Entry e{record, now_() + ttl_s_};
        entries_[key] = e;
        std::ofstream out(path_, std::ios::app);
        if (!out) throw CacheIoError("status cache: cannot open " + path_.string());
        out << line_for(key, e) << '\n';
        if (!out) throw CacheIoError("status cache: write failed for " + path_.string());
    }

    std::size_t size() const {
        std::shared_lock lock(mu_);
        return entries_.size();
    }

private:
    struct Entry {
        CopyrightStatusRecord record;
        std::int64_t expires_at = 0;
    };

    static std::string line_for(const std::string& key, const Entry& e) {
        nlohmann::json j{{"key", key}, {"expires_at", e.expires_at}, {"record", to_json(e.record)}};
        return j.dump();
    }

    void load() {
        std::ifstream in(path_);
        if (!in) return;  // first run
        std::string line;
        std::size_t parsed = 0;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            ++parsed;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("key") || !j.contains("record")) continue;
            Entry e;
            e.expires_at = j.value("expires_at", std::int64_t{0});
            if (e.expires_at <= now_()) continue;
            try {
                e.record = status_record_from_json(j["record"]);
            } catch (const nlohmann::json::exception&) {
                continue;
            }
            entries_[j["key"].get<std::string>()] = e;
        }
        in.close();
        // Expired, corrupt or superseded lines get dropped on the rewrite.
        if (entries_.size() < parsed) compact();
    }

    void compact() {
        std::ofstream out(path_, std::ios::trunc);
        if (!out) return;  // keep serving from memory
        for (const auto& [key, e] : entries_) out << line_for(key, e) << '\n';
    }

    std::filesystem::path path_;
    std::int64_t ttl_s_;
    std::function<std::int64_t()> now_;
    mutable std::shared_mutex mu_;
    std::map<std::string, Entry> entries_;
};

}  // namespace copyguard
