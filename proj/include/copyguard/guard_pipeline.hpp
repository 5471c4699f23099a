#pragma once

#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "copyguard/notice_identifier.hpp"
#include "copyguard/risk_analyzer.hpp"
#include "copyguard/status_verifier.hpp"

namespace copyguard {

// Orchestrates the four compliance components around a model invocation:
// notice identification and status verification (branch A), query risk
// analysis (branch B), and the speculative model call on the original query
// (branch C) all run concurrently, so the no-risk path costs max(T1, T2)
// extra wall time and the risky path adds exactly one re-invocation.

enum class TriState { Yes, No, Unknown };

inline std::string to_string(TriState t) {
    switch (t) {
        case TriState::Yes: return "yes";
        case TriState::No: return "no";
        case TriState::Unknown: return "unknown";
    }
    return "unknown";
}

enum class GuardAction { Allow, RemindAndRetry };

inline std::string to_string(GuardAction a) {
    return a == GuardAction::Allow ? "allow" : "remind_and_retry";
}

enum class FailMode { Open, Closed };

struct GuardPolicy {
    FailMode fail_mode = FailMode::Open;
    double min_confidence = kDefaultOcrMinConfidence;
    int ttl_days = kDefaultStatusTtlDays;
    int search_top_k = 5;
    std::vector<std::string> notice_patterns = default_notice_patterns();
    std::function<std::int64_t()> now = now_epoch_seconds;
};

using CopyrightEvidence = std::variant<std::monostate, NoticeMatch, CopyrightStatusRecord>;

struct GuardDecision {
    TriState copyrighted = TriState::Unknown;
    CopyrightEvidence copyright_evidence;
    std::optional<RiskAnalysis> risk;
    GuardAction action = GuardAction::Allow;
    std::optional<std::string> reminder;
    PipelineTimings timings;
};

struct GuardedResponse {
    ModelResponse response;
    GuardDecision decision;
    std::vector<std::string> warnings;
    bool fail_closed = false;  // compliance check unavailable under fail-closed
};

inline constexpr const char* kFailClosedText =
    "request declined: compliance check unavailable";

// ---------------------------------------------------------------------------
// Decision rule
// ---------------------------------------------------------------------------

// The single cell (copyrighted, risky) = (yes, true) retries with a reminder;
// every other cell allows.
inline GuardAction decide_action(TriState copyrighted, const std::optional<RiskAnalysis>& risk) {
    return (copyrighted == TriState::Yes && risk && risk->is_infringing)
               ? GuardAction::RemindAndRetry
               : GuardAction::Allow;
}

// ---------------------------------------------------------------------------
// Reminder composition
// ---------------------------------------------------------------------------

constexpr std::size_t kReminderMaxChars = 1200;

// Deterministic three-sentence template: the evidence, the flagged reason,
// and the suggested rewrite when one exists.
inline std::string compose_reminder(const CopyrightEvidence& evidence, const RiskAnalysis& risk) {
    if (!risk.is_infringing)
        throw std::invalid_argument("compose_reminder: risk is not infringing");

    std::string out;
    if (const auto* notice = std::get_if<NoticeMatch>(&evidence)) {
        std::string found = notice->scanned_text.substr(
            notice->span_start, notice->span_end - notice->span_start);
        out += "The provided content carries an explicit copyright notice (\"" + found + "\").";
    } else if (const auto* record = std::get_if<CopyrightStatusRecord>(&evidence)) {
        out += "The provided content was verified as copyrighted material (\"" + record->title +
               "\", see " + record->legal_source + ").";
    } else {
        out += "The provided content is treated as copyrighted material.";
    }
    out += " This request risks copyright infringement: " + risk.reason;
    if (risk.rewritten_request)
        out += " A compliant alternative: " + *risk.rewritten_request;

    if (out.size() > kReminderMaxChars) {
        out.resize(kReminderMaxChars - 3);
        out += "...";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Branch runners
// ---------------------------------------------------------------------------

namespace pipeline_detail {

struct CopyrightCheck {
    TriState state = TriState::Unknown;
    CopyrightEvidence evidence;
    std::vector<std::string> warnings;
    bool provider_failed = false;
    std::int64_t elapsed_ms = 0;
};

inline CopyrightCheck run_copyright_check(const ContextItem& item, const ProviderBundle& providers,
                                          const GuardPolicy& policy, StatusCache* cache) {
    CopyrightCheck out;
    const std::int64_t t0 = steady_ms();
    try {
        std::string text = extract_text(item, *providers.ocr, policy.min_confidence);
        if (auto notice = detect_notice(text, policy.notice_patterns)) {
            out.state = TriState::Yes;
            out.evidence = *notice;
        } else if (trim(text).empty()) {
            out.warnings.emplace_back("copyright status unknown: no text extracted");
        } else {
            std::string key = status_cache_key(text);
            std::optional<CopyrightStatusRecord> record;
            if (cache) {
                try {
                    record = cache->get(key);
                } catch (const CacheIoError&) {
                    // treated as a miss
                }
            }
            if (!record) {
                auto candidates = find_source(text, *providers.search, policy.search_top_k);
                if (candidates.empty()) {
                    out.warnings.emplace_back("copyright status unknown: no search results");
                } else {
                    // Only the rank-1 candidate is verified; the rest are
                    // retained by the search provider for logging.
                    record = verify_status(candidates.front(), item.material_kind,
                                           *providers.chat, policy.now());
                    if (cache) {
                        try {
                            cache->put(key, *record);
                        } catch (const CacheIoError& e) {
                            out.warnings.emplace_back(std::string("status cache write failed: ") +
                                                      e.what());
                        }
                    }
                }
            }
            if (record) {
                out.state = record->copyright_status == 1 ? TriState::Yes : TriState::No;
                out.evidence = *record;
            }
        }
    } catch (const std::exception& e) {
        out.provider_failed = true;
        out.state = TriState::Unknown;
        out.evidence = std::monostate{};
        out.warnings.emplace_back(std::string("copyright check failed: ") + e.what());
    }
    out.elapsed_ms = steady_ms() - t0;
    return out;
}

struct RiskCheck {
    std::optional<RiskAnalysis> risk;
    std::vector<std::string> warnings;
    bool provider_failed = false;
    std::int64_t elapsed_ms = 0;
};

inline RiskCheck run_risk_check(const QueryItem& query, const ProviderBundle& providers) {
    RiskCheck out;
    const std::int64_t t0 = steady_ms();
    try {
        out.risk = analyze(query, *providers.chat);
    } catch (const std::exception& e) {
        out.provider_failed = true;
        out.warnings.emplace_back(std::string("risk analysis failed: ") + e.what());
    }
    out.elapsed_ms = steady_ms() - t0;
    return out;
}

}  // namespace pipeline_detail

// ---------------------------------------------------------------------------
// Guard
// ---------------------------------------------------------------------------

inline GuardedResponse guard(const ContextItem& item, const QueryItem& query,
                             const ProviderBundle& providers, const GuardPolicy& policy = {},
                             StatusCache* cache = nullptr) {
    using namespace pipeline_detail;

    auto branch_a = std::async(std::launch::async, [&] {
        return run_copyright_check(item, providers, policy, cache);
    });
    auto branch_b =
        std::async(std::launch::async, [&] { return run_risk_check(query, providers); });
    auto branch_c = std::async(std::launch::async, [&] {
        return providers.lvlm->ask(item.image, query.text);
    });

    CopyrightCheck a = branch_a.get();
    RiskCheck b = branch_b.get();

    GuardedResponse out;
    out.warnings = a.warnings;
    out.warnings.insert(out.warnings.end(), b.warnings.begin(), b.warnings.end());
    out.decision.copyrighted = a.state;
    out.decision.copyright_evidence = a.evidence;
    out.decision.risk = b.risk;
    out.decision.timings.t1_ms = a.elapsed_ms;
    out.decision.timings.t2_ms = b.elapsed_ms;

    if ((a.provider_failed || b.provider_failed) && policy.fail_mode == FailMode::Closed) {
        branch_c.wait();
        out.fail_closed = true;
        out.decision.action = GuardAction::Allow;
        out.response = {kFailClosedText, 0, "copyguard"};
        out.warnings.emplace_back("fail-closed: compliance check unavailable");
        return out;
    }

    out.decision.action = decide_action(a.state, b.risk);

    if (out.decision.action == GuardAction::RemindAndRetry) {
        out.decision.reminder = compose_reminder(a.evidence, *b.risk);
        // The speculative reply is discarded; its outcome, including failure,
        // no longer matters.
        try {
            branch_c.get();
        } catch (...) {
        }
        out.response = providers.lvlm->ask(item.image, *out.decision.reminder + "\n\n" + query.text);
        out.decision.timings.retried = true;
    } else {
        out.response = branch_c.get();  // model errors surface to the caller
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const GuardDecision& d) {
    nlohmann::json evidence;
    if (const auto* notice = std::get_if<NoticeMatch>(&d.copyright_evidence)) {
        evidence = {{"type", "notice"},
                    {"matched_pattern", notice->matched_pattern},
                    {"span", {notice->span_start, notice->span_end}},
                    {"scanned_text", notice->scanned_text}};
    } else if (const auto* record = std::get_if<CopyrightStatusRecord>(&d.copyright_evidence)) {
        evidence = {{"type", "verified"}, {"record", to_json(*record)}};
    } else {
        evidence = {{"type", "none"}};
    }
    nlohmann::json j{
        {"copyrighted", to_string(d.copyrighted)},
        {"copyright_evidence", evidence},
        {"risk", d.risk ? to_json(*d.risk) : nlohmann::json(nullptr)},
        {"action", to_string(d.action)},
        {"reminder", d.reminder ? nlohmann::json(*d.reminder) : nlohmann::json(nullptr)},
        {"timings", to_json(d.timings)},
    };
    return j;
}

inline nlohmann::json to_json(const GuardedResponse& r) {
    return {{"response", to_json(r.response)},
            {"decision", to_json(r.decision)},
            {"warnings", r.warnings},
            {"fail_closed", r.fail_closed}};
}

}  // namespace copyguard
