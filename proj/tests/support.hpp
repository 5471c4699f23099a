#pragma once

// Shared test doubles and fixture helpers.

#include <chrono>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "copyguard/builder.hpp"
#include "copyguard/providers.hpp"
#include "copyguard/stubs.hpp"

namespace copyguard::test {

// ---------------------------------------------------------------------------
// Dispatching chat: routes replies by the role a prompt plays, so one chat
// provider can serve verification, risk analysis and judging in one pipeline.
// ---------------------------------------------------------------------------

struct DispatchChatConfig {
    // Verification prompts ("copyright status" templates).
    int verify_status = 1;
    bool verify_throws = false;
    // Analyzer prompts (user text starts with "User Request:").
    std::function<bool(const std::string&)> is_infringing = [](const std::string&) {
        return true;
    };
    bool analyzer_throws = false;
    // Judge prompts: refusal detection over the model response section only
    // (the template's own criteria text mentions refusal words).
    std::function<bool(const std::string&)> is_refusal = [](const std::string& user) {
        auto start = user.find("- Model Response: ");
        if (start == std::string::npos) return false;
        auto section = user.substr(start);
        auto end = section.find("\n\nEvaluate");
        if (end != std::string::npos) section.resize(end);
        return lower_ascii(section).find("cannot") != std::string::npos;
    };
    std::string default_reply = "{}";
};

class DispatchChat : public ChatProvider {
public:
    explicit DispatchChat(DispatchChatConfig cfg = {}) : cfg_(std::move(cfg)) {}

    std::string complete(const std::optional<std::string>& system,
                         const std::string& user) override {
        std::string sys = system ? lower_ascii(*system) : "";
        std::string usr = lower_ascii(user);

        if (usr.find("copyright status") != std::string::npos) {
            if (cfg_.verify_throws)
                throw ProviderError(ProviderErrorKind::Transport, "verifier down");
            return std::string("{\"title\": \"Verified Title\", \"copyright_status\": ") +
                   std::to_string(cfg_.verify_status) +
                   ", \"legal_references\": [\"17 U.S.C. 102\"], "
                   "\"legal_source\": \"https://example.test/law\"}";
        }
        if (usr.rfind("user request:", 0) == 0) {
            if (cfg_.analyzer_throws)
                throw ProviderError(ProviderErrorKind::Timeout, "analyzer down");
            if (cfg_.is_infringing(user))
                return "{\"is_infringing\": true, \"reason\": \"Redistributing the content is "
                       "not transformative.\", \"rewritten_request\": \"Could you summarize "
                       "the text instead?\"}";
            return "{\"is_infringing\": false, \"reason\": \"The request is transformative.\", "
                   "\"rewritten_request\": null}";
        }
        if (sys.find("rejection to an instruction") != std::string::npos)
            return cfg_.is_refusal(user) ? "yes" : "no";
        return cfg_.default_reply;
    }

private:
    DispatchChatConfig cfg_;
};

// ---------------------------------------------------------------------------
// Clocked providers for the latency contract
// ---------------------------------------------------------------------------

class SleepyOcr : public OcrProvider {
public:
    SleepyOcr(std::chrono::milliseconds delay, std::string text)
        : delay_(delay), text_(std::move(text)) {}
    std::vector<OcrBlock> extract(const ImageBytes&) override {
        std::this_thread::sleep_for(delay_);
        return {{text_, 1.0}};
    }

private:
    std::chrono::milliseconds delay_;
    std::string text_;
};

class SleepyChat : public ChatProvider {
public:
    SleepyChat(std::chrono::milliseconds delay, std::shared_ptr<ChatProvider> inner)
        : delay_(delay), inner_(std::move(inner)) {}
    std::string complete(const std::optional<std::string>& system,
                         const std::string& user) override {
        std::this_thread::sleep_for(delay_);
        return inner_->complete(system, user);
    }

private:
    std::chrono::milliseconds delay_;
    std::shared_ptr<ChatProvider> inner_;
};

class SleepyLvlm : public LvlmProvider {
public:
    SleepyLvlm(std::chrono::milliseconds delay, std::string reply)
        : delay_(delay), reply_(std::move(reply)) {}
    ModelResponse ask(const ImageBytes&, const std::string&) override {
        std::this_thread::sleep_for(delay_);
        return {reply_, delay_.count(), "stub-sleepy"};
    }

private:
    std::chrono::milliseconds delay_;
    std::string reply_;
};

class ThrowingOcr : public OcrProvider {
public:
    std::vector<OcrBlock> extract(const ImageBytes&) override {
        throw ProviderError(ProviderErrorKind::Transport, "ocr down");
    }
};

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

// Smallest valid context: a 1x1 white PNG with no notice.
inline ContextItem minimal_context() {
    ContextItem item;
    item.id = "minimal";
    item.image = png_encode(Raster::blank(1, 1));
    return item;
}

// Random text guaranteed to contain no notice pattern: the alphabet excludes
// the letters needed for "copyright", "(c)" and "all rights reserved".
inline std::string pattern_free_text(std::mt19937_64& rng, int words = 12) {
    static constexpr char alphabet[] = {'a', 'b', 'd', 'e', 'f', 'g', 'h', 'm'};
    std::uniform_int_distribution<int> len(1, 8);
    std::uniform_int_distribution<int> pick(0, 7);
    std::string out;
    for (int w = 0; w < words; ++w) {
        if (w) out.push_back(' ');
        int n = len(rng);
        for (int i = 0; i < n; ++i) out.push_back(alphabet[pick(rng)]);
    }
    return out;
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("copyguard_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::map<InfringementTask, std::vector<QueryItem>> seed_map() {
    std::map<InfringementTask, std::vector<QueryItem>> seeds;
    for (auto task : all_tasks()) {
        int index = 0;
        for (auto& line : prompts::seed_lines(task)) seeds[task].push_back({task, index++, line});
    }
    return seeds;
}

inline MaterialRecord sample_material(const std::string& title, const std::string& body,
                                      MaterialKind kind = MaterialKind::Book) {
    MaterialRecord m;
    m.kind = kind;
    m.title = title;
    m.body = body;
    m.original_notice = "Copyright 2021 by Example Author";
    m.source_ref = "https://example.test/" + title;
    return m;
}

}  // namespace copyguard::test
