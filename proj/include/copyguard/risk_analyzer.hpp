#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "copyguard/prompts.hpp"
#include "copyguard/providers.hpp"

namespace copyguard {

// Single-shot classification of a query's infringement risk via the vendored
// analyzer prompt, plus the model's suggested compliant rewrite.

struct RiskAnalysis {
    bool is_infringing = false;
    std::string reason;
    std::optional<std::string> rewritten_request;
};

inline nlohmann::json to_json(const RiskAnalysis& r) {
    nlohmann::json j{{"is_infringing", r.is_infringing}, {"reason", r.reason}};
    j["rewritten_request"] =
        r.rewritten_request ? nlohmann::json(*r.rewritten_request) : nlohmann::json(nullptr);
    return j;
}

// Exactly one chat call per invocation. The reply must carry the three
// analyzer fields; extra fields are ignored, a JSON null rewrite maps to
// absent. No offline heuristic fallback: a failed provider stays an error and
// the pipeline policy decides.
inline RiskAnalysis analyze(const QueryItem& query, ChatProvider& chat) {
    if (auto errors = validate_query(query); !errors.empty())
        throw std::invalid_argument("analyze: invalid query: " + errors.front());

    auto roles = prompts::split_risk_analyzer();
    std::string user = prompts::substitute(roles.user, {{"request", query.text}});
    std::string reply = chat.complete(roles.system, user);

    auto payload = extract_first_json_object(reply);
    if (!payload)
        throw ProviderError(ProviderErrorKind::BadPayload, "analyzer reply has no JSON object");
    nlohmann::json j = nlohmann::json::parse(*payload, nullptr, false);
    if (j.is_discarded())
        throw ProviderError(ProviderErrorKind::BadPayload, "analyzer reply is not valid JSON");

    if (!j.contains("is_infringing") || !j["is_infringing"].is_boolean())
        throw ProviderError(ProviderErrorKind::BadPayload, "is_infringing missing or non-boolean");
    if (!j.contains("reason") || !j["reason"].is_string())
        throw ProviderError(ProviderErrorKind::BadPayload, "reason missing or non-string");
    if (!j.contains("rewritten_request"))
        throw ProviderError(ProviderErrorKind::BadPayload, "rewritten_request missing");

    RiskAnalysis out;
    out.is_infringing = j["is_infringing"].get<bool>();
    out.reason = j["reason"].get<std::string>();
    // A rewrite only makes sense for an infringing request; tolerate models
    // that return one anyway by dropping it.
    if (out.is_infringing && j["rewritten_request"].is_string())
        out.rewritten_request = j["rewritten_request"].get<std::string>();
    return out;
}

}  // namespace copyguard
