#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "copyguard/providers.hpp"
#include "copyguard/tokenize.hpp"

namespace copyguard {

// Deterministic provider doubles. Same input sequence, same output sequence;
// no network, no clock.

// ---------------------------------------------------------------------------
// OCR stub: replays the item's ground-truth source_text as one full-confidence
// block, exactly what a perfect OCR pass over the rendered page would yield.
// ---------------------------------------------------------------------------

class SourceTextOcr : public OcrProvider {
public:
    SourceTextOcr() = default;
    explicit SourceTextOcr(const ContextItem& item) { bind(item); }

    void bind(const ContextItem& item) {
        if (!item.source_text)
            throw std::invalid_argument("SourceTextOcr: no source text");
        texts_[fnv1a64({reinterpret_cast<const char*>(item.image.data()), item.image.size()})] =
            *item.source_text;
    }

    std::vector<OcrBlock> extract(const ImageBytes& image) override {
        auto it = texts_.find(
            fnv1a64({reinterpret_cast<const char*>(image.data()), image.size()}));
        if (it == texts_.end())
            throw ProviderError(ProviderErrorKind::BadPayload, "no source text for image");
        return {{it->second, 1.0}};
    }

private:
    std::map<std::uint64_t, std::string> texts_;
};

inline std::shared_ptr<SourceTextOcr> stub_ocr_from_source_text(const ContextItem& item) {
    return std::make_shared<SourceTextOcr>(item);
}

// ---------------------------------------------------------------------------
// Chat stub: replies selected by prompt fingerprint
// ---------------------------------------------------------------------------

// First 64 chars of the lowercased, whitespace-collapsed user prompt.
inline std::string prompt_fingerprint(std::string_view user_prompt) {
    std::string norm = normalize_collapse(user_prompt);
    return norm.substr(0, 64);
}

class ScriptedChat : public ChatProvider {
public:
    explicit ScriptedChat(std::string default_reply = "") : default_reply_(std::move(default_reply)) {}

    // Successive hits on the same fingerprint consume replies in order; the
    // last one repeats.
    ScriptedChat& script(std::string_view prompt_or_fingerprint, std::string reply) {
        std::string fp = prompt_fingerprint(prompt_or_fingerprint);
        std::lock_guard lock(mu_);
        scripts_[fp].replies.push_back(std::move(reply));
        return *this;
    }

    std::string complete(const std::optional<std::string>&, const std::string& user) override {
        std::string fp = prompt_fingerprint(user);
        std::lock_guard lock(mu_);
        auto it = scripts_.find(fp);
        if (it == scripts_.end()) return default_reply_;
        auto& entry = it->second;
        std::string reply = entry.replies[std::min(entry.next, entry.replies.size() - 1)];
        ++entry.next;
        return reply;
    }

private:
    struct Entry {
        std::vector<std::string> replies;
        std::size_t next = 0;
    };
    std::mutex mu_;
    std::map<std::string, Entry> scripts_;
    std::string default_reply_;
};

inline std::shared_ptr<ScriptedChat> scripted_chat(
    const std::map<std::string, std::string>& script, std::string default_reply = "") {
    if (script.empty()) throw std::invalid_argument("scripted_chat: empty script");
    auto chat = std::make_shared<ScriptedChat>(std::move(default_reply));
    for (const auto& [prompt, reply] : script) chat->script(prompt, reply);
    return chat;
}

// ---------------------------------------------------------------------------
// Search stubs
// ---------------------------------------------------------------------------

class FixedSearch : public SearchProvider {
public:
    explicit FixedSearch(std::vector<SearchHit> hits = {}) : hits_(std::move(hits)) {}

    std::vector<SearchHit> search(const std::string&, int top_k) override {
        std::vector<SearchHit> out = hits_;
        if (static_cast<int>(out.size()) > top_k) out.resize(static_cast<std::size_t>(top_k));
        return out;
    }

private:
    std::vector<SearchHit> hits_;
};

// ---------------------------------------------------------------------------
// Embedding stub: orthonormal one-hot per distinct token
// ---------------------------------------------------------------------------

// Every distinct token (per the metrics tokenizer) gets its own axis of a
// fixed-dimension space, shared across calls, so cross-text cosines reduce to
// exact token matching.
class OneHotEmbedding : public EmbeddingProvider {
public:
    explicit OneHotEmbedding(std::size_t dim = 1024) : dim_(dim) {}

    std::vector<std::vector<double>> embed_tokens(const std::string& text) override {
        std::vector<std::vector<double>> out;
        for (const auto& tok : tokenize(text)) {
            std::vector<double> v(dim_, 0.0);
            v[index_of(tok)] = 1.0;
            out.push_back(std::move(v));
        }
        return out;
    }

    std::vector<double> embed_sentence(const std::string& text) override {
        std::vector<double> v(dim_, 0.0);
        for (const auto& tok : tokenize(text)) v[index_of(tok)] += 1.0;
        return v;
    }

private:
    std::size_t index_of(const std::string& token) {
        std::lock_guard lock(mu_);
        auto [it, inserted] = axes_.try_emplace(token, axes_.size());
        if (it->second >= dim_)
            throw ProviderError(ProviderErrorKind::BadPayload, "one-hot vocabulary overflow");
        return it->second;
    }

    std::size_t dim_;
    std::mutex mu_;
    std::map<std::string, std::size_t> axes_;
};

// ---------------------------------------------------------------------------
// LVLM stubs
// ---------------------------------------------------------------------------

inline constexpr const char* kStubRefusalText =
    "I cannot reproduce copyrighted material.";

// Replies with the text registered for the image; when reminder_respecting is
// set, any prompt carrying a compliance reminder gets a refusal instead.
class EchoLvlm : public LvlmProvider {
public:
    explicit EchoLvlm(bool reminder_respecting = false, std::string provider_id = "stub-echo")
        : reminder_respecting_(reminder_respecting), provider_id_(std::move(provider_id)) {}

    void remember(const ImageBytes& image, std::string text) {
        std::lock_guard lock(mu_);
        texts_[fnv1a64({reinterpret_cast<const char*>(image.data()), image.size()})] =
            std::move(text);
    }

    ModelResponse ask(const ImageBytes& image, const std::string& prompt) override {
        calls_.fetch_add(1);
        if (reminder_respecting_ && lower_ascii(prompt).find("copyright") != std::string::npos)
            return {kStubRefusalText, 0, provider_id_};
        std::lock_guard lock(mu_);
        auto it = texts_.find(
            fnv1a64({reinterpret_cast<const char*>(image.data()), image.size()}));
        return {it == texts_.end() ? prompt : it->second, 0, provider_id_};
    }

    int call_count() const { return calls_.load(); }

private:
    bool reminder_respecting_;
    std::string provider_id_;
    std::mutex mu_;
    std::map<std::uint64_t, std::string> texts_;
    std::atomic<int> calls_{0};
};

class RefuseLvlm : public LvlmProvider {
public:
    explicit RefuseLvlm(std::string provider_id = "stub-refuse")
        : provider_id_(std::move(provider_id)) {}

    ModelResponse ask(const ImageBytes&, const std::string&) override {
        calls_.fetch_add(1);
        return {kStubRefusalText, 0, provider_id_};
    }

    int call_count() const { return calls_.load(); }

private:
    std::string provider_id_;
    std::atomic<int> calls_{0};
};

}  // namespace copyguard
