#pragma once

#include <memory>
#include <string>

#include "copyguard/stubs.hpp"

namespace copyguard {

// Offline provider doubles selectable from the CLI via "stub:<name>" URLs.
// They make every subcommand runnable on a disconnected machine; replies are
// deterministic and clearly synthetic.

// Routes by prompt shape: verification prompts get a structured status reply,
// analyzer prompts a risk classification keyed on redistribution verbs, judge
// prompts a yes/no keyed on refusal phrasing, anything else the rewrite echo.
class AutoChat : public ChatProvider {
public:
    explicit AutoChat(int verify_status = 1) : verify_status_(verify_status) {}

    std::string complete(const std::optional<std::string>& system,
                         const std::string& user) override {
        std::string sys = system ? lower_ascii(*system) : "";
        std::string usr = lower_ascii(user);

        if (usr.find("copyright status") != std::string::npos &&
            usr.find("json") != std::string::npos) {
            return std::string("{\"title\": \"offline stub\", \"copyright_status\": ") +
                   std::to_string(verify_status_) +
                   ", \"legal_references\": [\"offline stub\"], "
                   "\"legal_source\": \"stub://verifier\"}";
        }
        if (sys.find("copyright compliance assistant") != std::string::npos) {
            bool risky = false;
            for (const char* verb :
                 {"repeat", "verbatim", "duplicate", "echo", "extract", "pull out",
                  "rephrase", "paraphrase", "reword", "translate", "render", "wording"}) {
                if (usr.find(verb) != std::string::npos) {
                    risky = true;
                    break;
                }
            }
            if (risky)
                return "{\"is_infringing\": true, \"reason\": \"The request redistributes the "
                       "content rather than transforming it.\", \"rewritten_request\": \"Could "
                       "you summarize the key points of the text in the image instead?\"}";
            return "{\"is_infringing\": false, \"reason\": \"The request appears transformative.\","
                   " \"rewritten_request\": null}";
        }
        if (sys.find("rejection to an instruction") != std::string::npos) {
            for (const char* marker : {"cannot", "can't", "unable", "won't", "will not",
                                       "declin", "refus", "sorry", "not able"}) {
                if (usr.find(marker) != std::string::npos) return "yes";
            }
            return "no";
        }
        // Rewriter fallback: echo the instruction so builds stay deterministic.
        auto pos = user.rfind(": ");
        return pos == std::string::npos ? user : user.substr(pos + 2);
    }

private:
    int verify_status_;
};

class EmptyOcr : public OcrProvider {
public:
    std::vector<OcrBlock> extract(const ImageBytes&) override { return {}; }
};

class FixedNoticeOcr : public OcrProvider {
public:
    explicit FixedNoticeOcr(std::string text) : text_(std::move(text)) {}
    std::vector<OcrBlock> extract(const ImageBytes&) override { return {{text_, 1.0}}; }

private:
    std::string text_;
};

// Builds one provider from a "stub:<name>" URL; returns false if the name is
// not a stub scheme.
inline bool apply_stub_url(ProviderBundle& bundle, const std::string& role,
                           const std::string& url) {
    if (url.rfind("stub:", 0) != 0) return false;
    std::string name = url.substr(5);
    if (role == "lvlm") {
        if (name == "echo-prompt") bundle.lvlm = std::make_shared<EchoLvlm>(false, "stub:echo-prompt");
        else if (name == "refuse") bundle.lvlm = std::make_shared<RefuseLvlm>("stub:refuse");
        else if (name == "reminder-respecting")
            bundle.lvlm = std::make_shared<EchoLvlm>(true, "stub:reminder-respecting");
        else throw std::invalid_argument("unknown lvlm stub: " + name);
    } else if (role == "chat") {
        if (name == "auto") bundle.chat = std::make_shared<AutoChat>(1);
        else if (name == "auto-public-domain") bundle.chat = std::make_shared<AutoChat>(0);
        else throw std::invalid_argument("unknown chat stub: " + name);
    } else if (role == "ocr") {
        if (name == "none") bundle.ocr = std::make_shared<EmptyOcr>();
        else if (name == "notice")
            bundle.ocr = std::make_shared<FixedNoticeOcr>("All Rights Reserved");
        else throw std::invalid_argument("unknown ocr stub: " + name);
    } else if (role == "search") {
        if (name == "none") bundle.search = std::make_shared<FixedSearch>();
        else if (name == "fixed")
            bundle.search = std::make_shared<FixedSearch>(std::vector<SearchHit>{
                {"Offline Stub Result", "https://example.invalid/stub", "stub snippet",
                 std::nullopt}});
        else throw std::invalid_argument("unknown search stub: " + name);
    } else if (role == "embed") {
        if (name == "onehot") bundle.embed = std::make_shared<OneHotEmbedding>(4096);
        else throw std::invalid_argument("unknown embed stub: " + name);
    } else {
        return false;
    }
    return true;
}

}  // namespace copyguard
