#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "copyguard/domain.hpp"

namespace copyguard {

// ---------------------------------------------------------------------------
// Provider errors
// ---------------------------------------------------------------------------

// One error vocabulary across every external service so the pipeline can
// apply its fail-open/fail-closed policy uniformly.
enum class ProviderErrorKind { Timeout, Transport, BadPayload, RateLimited };

inline std::string to_string(ProviderErrorKind k) {
    switch (k) {
        case ProviderErrorKind::Timeout: return "timeout";
        case ProviderErrorKind::Transport: return "transport";
        case ProviderErrorKind::BadPayload: return "bad_payload";
        case ProviderErrorKind::RateLimited: return "rate_limited";
    }
    return "transport";
}

class ProviderError : public std::runtime_error {
public:
    ProviderError(ProviderErrorKind kind, const std::string& what)
        : std::runtime_error(to_string(kind) + ": " + what), kind_(kind) {}
    ProviderErrorKind kind() const { return kind_; }

private:
    ProviderErrorKind kind_;
};

// One retry on Timeout/Transport with exponential backoff; BadPayload and
// RateLimited are never retried here.
struct RetryOptions {
    int max_retries = 1;
    std::chrono::milliseconds base_backoff{250};
    std::function<void(std::chrono::milliseconds)> sleep_fn =
        [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
};

template <typename F>
auto with_retry(F&& call, const RetryOptions& opts = {}) -> decltype(call()) {
    for (int attempt = 0;; ++attempt) {
        try {
            return call();
        } catch (const ProviderError& e) {
            bool retryable = e.kind() == ProviderErrorKind::Timeout ||
                             e.kind() == ProviderErrorKind::Transport;
            if (!retryable || attempt >= opts.max_retries) throw;
            opts.sleep_fn(opts.base_backoff * (1 << attempt));
        }
    }
}

// ---------------------------------------------------------------------------
// Service interfaces
// ---------------------------------------------------------------------------

struct OcrBlock {
    std::string text;
    double confidence = 0.0;  // in [0, 1]
};

class OcrProvider {
public:
    virtual ~OcrProvider() = default;
    virtual std::vector<OcrBlock> extract(const ImageBytes& image) = 0;
};

struct SearchHit {
    std::string title;
    std::string url;
    std::string snippet;
    std::optional<std::string> date;
};

class SearchProvider {
public:
    virtual ~SearchProvider() = default;
    virtual std::vector<SearchHit> search(const std::string& query, int top_k) = 0;
};

// Chat completions are used for status verification, risk analysis, refusal
// judging and query rewriting.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(const std::optional<std::string>& system,
                                 const std::string& user) = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // One vector per token; all vectors in one call share a dimension >= 1.
    virtual std::vector<std::vector<double>> embed_tokens(const std::string& text) = 0;
    virtual std::vector<double> embed_sentence(const std::string& text) = 0;
};

// The model under guard: image + prompt in, text out. Never returns a null
// text (empty string is permitted).
class LvlmProvider {
public:
    virtual ~LvlmProvider() = default;
    virtual ModelResponse ask(const ImageBytes& image, const std::string& prompt) = 0;
};

// Everything the pipeline and harness need, wired once at startup.
struct ProviderBundle {
    std::shared_ptr<OcrProvider> ocr;
    std::shared_ptr<SearchProvider> search;
    std::shared_ptr<ChatProvider> chat;
    std::shared_ptr<EmbeddingProvider> embed;
    std::shared_ptr<LvlmProvider> lvlm;
};

}  // namespace copyguard
