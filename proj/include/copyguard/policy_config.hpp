#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "copyguard/guard_pipeline.hpp"

namespace copyguard {

struct ProviderTimeouts {
    std::int64_t ocr_ms = 30000;
    std::int64_t search_ms = 30000;
    std::int64_t chat_ms = 30000;
    std::int64_t embed_ms = 30000;
    std::int64_t lvlm_ms = 30000;
};

// Pipeline policy from a JSON file. Recognized keys:
//   fail_mode: "open" | "closed"
//   min_confidence: number in [0,1]
//   ttl_days: integer
//   search_top_k: integer
//   notice_patterns: [string]
//   timeout_ms: integer (all providers)
//   timeouts_ms: {"ocr": n, "search": n, "chat": n, "embed": n, "lvlm": n}
struct PolicyFile {
    GuardPolicy policy;
    ProviderTimeouts timeouts;
};

inline PolicyFile load_policy_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open policy file " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);

    PolicyFile out;
    std::string mode = j.value("fail_mode", "open");
    if (mode == "closed") out.policy.fail_mode = FailMode::Closed;
    else if (mode == "open") out.policy.fail_mode = FailMode::Open;
    else throw std::runtime_error("policy fail_mode must be open or closed");

    out.policy.min_confidence = j.value("min_confidence", kDefaultOcrMinConfidence);
    out.policy.ttl_days = j.value("ttl_days", kDefaultStatusTtlDays);
    out.policy.search_top_k = j.value("search_top_k", 5);
    if (j.contains("notice_patterns"))
        out.policy.notice_patterns = j["notice_patterns"].get<std::vector<std::string>>();

    if (j.contains("timeout_ms")) {
        auto all = j["timeout_ms"].get<std::int64_t>();
        out.timeouts = {all, all, all, all, all};
    }
    if (j.contains("timeouts_ms")) {
        const auto& t = j["timeouts_ms"];
        out.timeouts.ocr_ms = t.value("ocr", out.timeouts.ocr_ms);
        out.timeouts.search_ms = t.value("search", out.timeouts.search_ms);
        out.timeouts.chat_ms = t.value("chat", out.timeouts.chat_ms);
        out.timeouts.embed_ms = t.value("embed", out.timeouts.embed_ms);
        out.timeouts.lvlm_ms = t.value("lvlm", out.timeouts.lvlm_ms);
    }
    return out;
}

}  // namespace copyguard
