#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "copyguard/providers.hpp"
#include "copyguard/util.hpp"

namespace copyguard {

// HTTP adapters for the five provider roles. Every call is one POST with a
// JSON body against the configured endpoint; responses are JSON. One retry on
// timeout/transport failures, none on bad payloads.
//
// Wire schemas (request -> response):
//   OCR      {"image_b64": str}                    -> {"blocks": [{"text": str, "confidence": num}]}
//   Search   {"query": str, "top_k": int}          -> {"results": [{"title", "url", "snippet", "date"?}]}
//   Chat     {"system"?: str, "user": str}         -> {"text": str}
//   Embed    {"text": str, "mode": "tokens"}       -> {"vectors": [[num]]}
//            {"text": str, "mode": "sentence"}     -> {"vector": [num]}
//   LVLM     {"image_b64": str, "prompt": str}     -> {"text": str}

struct HttpEndpoint {
    std::string scheme = "http";
    std::string host;
    int port = 80;
    std::string path = "/";
    std::optional<std::string> api_key;
    std::chrono::milliseconds timeout{30000};
};

inline HttpEndpoint parse_endpoint(const std::string& url) {
    HttpEndpoint ep;
    std::string rest = url;
    auto scheme_pos = rest.find("://");
    if (scheme_pos != std::string::npos) {
        ep.scheme = rest.substr(0, scheme_pos);
        rest = rest.substr(scheme_pos + 3);
    }
    ep.port = ep.scheme == "https" ? 443 : 80;
    auto path_pos = rest.find('/');
    std::string authority = path_pos == std::string::npos ? rest : rest.substr(0, path_pos);
    ep.path = path_pos == std::string::npos ? "/" : rest.substr(path_pos);
    auto colon = authority.rfind(':');
    if (colon != std::string::npos) {
        ep.host = authority.substr(0, colon);
        ep.port = std::atoi(authority.substr(colon + 1).c_str());
    } else {
        ep.host = authority;
    }
    if (ep.host.empty()) throw std::invalid_argument("endpoint url has no host: " + url);
    return ep;
}

namespace http_detail {

inline nlohmann::json post_json(const HttpEndpoint& ep, const nlohmann::json& body,
                                const RetryOptions& retry = {}) {
    return with_retry(
        [&]() -> nlohmann::json {
            httplib::Client client(ep.host, ep.port);
            auto sec = static_cast<time_t>(ep.timeout.count() / 1000);
            auto usec = static_cast<long>(ep.timeout.count() % 1000) * 1000;
            client.set_connection_timeout(sec, usec);
            client.set_read_timeout(sec, usec);
            client.set_write_timeout(sec, usec);
            httplib::Headers headers;
            if (ep.api_key) headers.emplace("Authorization", "Bearer " + *ep.api_key);

            auto res = client.Post(ep.path, headers, body.dump(), "application/json");
            if (!res) {
                auto err = res.error();
                bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                 err == httplib::Error::Read || err == httplib::Error::Write;
                throw ProviderError(timed_out ? ProviderErrorKind::Timeout
                                              : ProviderErrorKind::Transport,
                                    httplib::to_string(err));
            }
            if (res->status == 429)
                throw ProviderError(ProviderErrorKind::RateLimited, "http 429");
            if (res->status != 200)
                throw ProviderError(ProviderErrorKind::Transport,
                                    "http " + std::to_string(res->status));
            nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
            if (j.is_discarded())
                throw ProviderError(ProviderErrorKind::BadPayload, "response is not JSON");
            return j;
        },
        retry);
}

}  // namespace http_detail

class HttpOcr : public OcrProvider {
public:
    explicit HttpOcr(HttpEndpoint ep) : ep_(std::move(ep)) {}

    std::vector<OcrBlock> extract(const ImageBytes& image) override {
        auto j = http_detail::post_json(ep_, {{"image_b64", base64_encode(image)}});
        if (!j.contains("blocks") || !j["blocks"].is_array())
            throw ProviderError(ProviderErrorKind::BadPayload, "ocr reply missing blocks");
        std::vector<OcrBlock> out;
        for (const auto& b : j["blocks"]) {
            OcrBlock block{b.value("text", ""), b.value("confidence", 0.0)};
            if (block.confidence < 0.0 || block.confidence > 1.0)
                throw ProviderError(ProviderErrorKind::BadPayload, "ocr confidence out of range");
            out.push_back(std::move(block));
        }
        return out;
    }

private:
    HttpEndpoint ep_;
};

class HttpSearch : public SearchProvider {
public:
    explicit HttpSearch(HttpEndpoint ep) : ep_(std::move(ep)) {}

    std::vector<SearchHit> search(const std::string& query, int top_k) override {
        auto j = http_detail::post_json(ep_, {{"query", query}, {"top_k", top_k}});
        if (!j.contains("results") || !j["results"].is_array())
            throw ProviderError(ProviderErrorKind::BadPayload, "search reply missing results");
        std::vector<SearchHit> out;
        for (const auto& r : j["results"]) {
            if (static_cast<int>(out.size()) >= top_k) break;
            SearchHit hit{r.value("title", ""), r.value("url", ""), r.value("snippet", ""),
                          std::nullopt};
            if (r.contains("date") && r["date"].is_string())
                hit.date = r["date"].get<std::string>();
            out.push_back(std::move(hit));
        }
        return out;
    }

private:
    HttpEndpoint ep_;
};

class HttpChat : public ChatProvider {
public:
    explicit HttpChat(HttpEndpoint ep) : ep_(std::move(ep)) {}

    std::string complete(const std::optional<std::string>& system,
                         const std::string& user) override {
        nlohmann::json body{{"user", user}};
        if (system) body["system"] = *system;
        auto j = http_detail::post_json(ep_, body);
        if (!j.contains("text") || !j["text"].is_string())
            throw ProviderError(ProviderErrorKind::BadPayload, "chat reply missing text");
        return j["text"].get<std::string>();
    }

private:
    HttpEndpoint ep_;
};

class HttpEmbedding : public EmbeddingProvider {
public:
    explicit HttpEmbedding(HttpEndpoint ep) : ep_(std::move(ep)) {}

    std::vector<std::vector<double>> embed_tokens(const std::string& text) override {
        auto j = http_detail::post_json(ep_, {{"text", text}, {"mode", "tokens"}});
        if (!j.contains("vectors") || !j["vectors"].is_array())
            throw ProviderError(ProviderErrorKind::BadPayload, "embed reply missing vectors");
        auto out = j["vectors"].get<std::vector<std::vector<double>>>();
        std::size_t dim = out.empty() ? 0 : out.front().size();
        for (const auto& v : out) {
            if (v.empty() || v.size() != dim)
                throw ProviderError(ProviderErrorKind::BadPayload, "embed vectors inconsistent");
        }
        return out;
    }

    std::vector<double> embed_sentence(const std::string& text) override {
        auto j = http_detail::post_json(ep_, {{"text", text}, {"mode", "sentence"}});
        if (!j.contains("vector") || !j["vector"].is_array())
            throw ProviderError(ProviderErrorKind::BadPayload, "embed reply missing vector");
        auto v = j["vector"].get<std::vector<double>>();
        if (v.empty()) throw ProviderError(ProviderErrorKind::BadPayload, "embed vector empty");
        return v;
    }

private:
    HttpEndpoint ep_;
};

class HttpLvlm : public LvlmProvider {
public:
    explicit HttpLvlm(HttpEndpoint ep, std::string provider_id)
        : ep_(std::move(ep)), provider_id_(std::move(provider_id)) {}

    ModelResponse ask(const ImageBytes& image, const std::string& prompt) override {
        const std::int64_t t0 = steady_ms();
        auto j = http_detail::post_json(ep_,
                                        {{"image_b64", base64_encode(image)}, {"prompt", prompt}});
        if (!j.contains("text") || !j["text"].is_string())
            throw ProviderError(ProviderErrorKind::BadPayload, "model reply missing text");
        return {j["text"].get<std::string>(), steady_ms() - t0, provider_id_};
    }

private:
    HttpEndpoint ep_;
    std::string provider_id_;
};

// ---------------------------------------------------------------------------
// Environment wiring
// ---------------------------------------------------------------------------

// Endpoint and credential configuration, one variable per provider:
//   COPYGUARD_OCR_URL, COPYGUARD_SEARCH_URL, COPYGUARD_SEARCH_KEY,
//   COPYGUARD_CHAT_URL, COPYGUARD_CHAT_KEY, COPYGUARD_EMBED_URL,
//   COPYGUARD_LVLM_URL, COPYGUARD_CACHE_PATH
inline std::optional<std::string> env_var(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

struct EnvTimeouts {
    std::chrono::milliseconds ocr{30000};
    std::chrono::milliseconds search{30000};
    std::chrono::milliseconds chat{30000};
    std::chrono::milliseconds embed{30000};
    std::chrono::milliseconds lvlm{30000};
};

inline ProviderBundle providers_from_env(const EnvTimeouts& timeouts = {}) {
    ProviderBundle bundle;
    auto make = [&](const char* url_var, const char* key_var,
                    std::chrono::milliseconds timeout) -> std::optional<HttpEndpoint> {
        auto url = env_var(url_var);
        if (!url) return std::nullopt;
        auto ep = parse_endpoint(*url);
        if (key_var) ep.api_key = env_var(key_var);
        ep.timeout = timeout;
        return ep;
    };
    if (auto ep = make("COPYGUARD_OCR_URL", nullptr, timeouts.ocr))
        bundle.ocr = std::make_shared<HttpOcr>(*ep);
    if (auto ep = make("COPYGUARD_SEARCH_URL", "COPYGUARD_SEARCH_KEY", timeouts.search))
        bundle.search = std::make_shared<HttpSearch>(*ep);
    if (auto ep = make("COPYGUARD_CHAT_URL", "COPYGUARD_CHAT_KEY", timeouts.chat))
        bundle.chat = std::make_shared<HttpChat>(*ep);
    if (auto ep = make("COPYGUARD_EMBED_URL", nullptr, timeouts.embed))
        bundle.embed = std::make_shared<HttpEmbedding>(*ep);
    if (auto ep = make("COPYGUARD_LVLM_URL", nullptr, timeouts.lvlm))
        bundle.lvlm = std::make_shared<HttpLvlm>(*ep, *env_var("COPYGUARD_LVLM_URL"));
    return bundle;
}

}  // namespace copyguard
