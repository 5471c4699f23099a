#include <doctest.h>

#include "copyguard/stubs.hpp"
#include "support.hpp"

using namespace copyguard;

TEST_CASE("stub OCR replays source text") {
    auto item = test::minimal_context();
    item.source_text = "hello";
    auto ocr = stub_ocr_from_source_text(item);
    auto blocks = ocr->extract(item.image);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].text == "hello");
    CHECK(blocks[0].confidence == 1.0);

    item.source_text = "\xC2\xA9 2020 Foo";
    auto ocr2 = stub_ocr_from_source_text(item);
    CHECK(ocr2->extract(item.image)[0].text == "\xC2\xA9 2020 Foo");

    ContextItem no_text = test::minimal_context();
    CHECK_THROWS_AS(stub_ocr_from_source_text(no_text), std::invalid_argument);
}

TEST_CASE("scripted chat selects replies by fingerprint") {
    auto chat = scripted_chat({{"What is the copyright status of X?", "status: protected"},
                               {"Summarize the text", "a summary"}},
                              "REFUSE");
    CHECK(chat->complete(std::nullopt, "What is the copyright status of X?") ==
          "status: protected");
    CHECK(chat->complete(std::nullopt, "  what IS the\ncopyright status of X?") ==
          "status: protected");  // normalization: case and whitespace
    CHECK(chat->complete(std::nullopt, "Summarize the text") == "a summary");
    CHECK(chat->complete(std::nullopt, "something unscripted") == "REFUSE");

    CHECK_THROWS_AS(scripted_chat({}), std::invalid_argument);
}

TEST_CASE("scripted chat replays reply sequences in order") {
    ScriptedChat chat("default");
    chat.script("rewrite this", "first");
    chat.script("rewrite this", "second");
    CHECK(chat.complete(std::nullopt, "rewrite this") == "first");
    CHECK(chat.complete(std::nullopt, "rewrite this") == "second");
    CHECK(chat.complete(std::nullopt, "rewrite this") == "second");  // last reply sticks
}

TEST_CASE("stubs are deterministic") {
    auto make = [] {
        auto chat = scripted_chat({{"q1", "r1"}}, "fallback");
        std::vector<std::string> replies;
        replies.push_back(chat->complete(std::nullopt, "q1"));
        replies.push_back(chat->complete(std::nullopt, "q2"));
        replies.push_back(chat->complete(std::nullopt, "q1"));
        return replies;
    };
    CHECK(make() == make());
}

TEST_CASE("with_retry retries only transient failures") {
    int sleeps = 0;
    RetryOptions opts;
    opts.sleep_fn = [&](std::chrono::milliseconds d) {
        ++sleeps;
        CHECK(d.count() == 250);  // base backoff, first retry
    };

    SUBCASE("timeout retried once, then succeeds") {
        int calls = 0;
        auto value = with_retry(
            [&] {
                if (++calls == 1) throw ProviderError(ProviderErrorKind::Timeout, "slow");
                return 42;
            },
            opts);
        CHECK(value == 42);
        CHECK(calls == 2);
        CHECK(sleeps == 1);
    }

    SUBCASE("transport retried, persistent failure surfaces") {
        int calls = 0;
        CHECK_THROWS_AS(with_retry(
                            [&]() -> int {
                                ++calls;
                                throw ProviderError(ProviderErrorKind::Transport, "down");
                            },
                            opts),
                        ProviderError);
        CHECK(calls == 2);
    }

    SUBCASE("bad payload is never retried") {
        int calls = 0;
        CHECK_THROWS_AS(with_retry(
                            [&]() -> int {
                                ++calls;
                                throw ProviderError(ProviderErrorKind::BadPayload, "junk");
                            },
                            opts),
                        ProviderError);
        CHECK(calls == 1);
        CHECK(sleeps == 0);
    }

    SUBCASE("rate limit is never retried") {
        int calls = 0;
        CHECK_THROWS_AS(with_retry(
                            [&]() -> int {
                                ++calls;
                                throw ProviderError(ProviderErrorKind::RateLimited, "429");
                            },
                            opts),
                        ProviderError);
        CHECK(calls == 1);
    }
}

TEST_CASE("one-hot embedder is orthonormal and consistent across calls") {
    OneHotEmbedding emb(64);
    auto a = emb.embed_tokens("alpha beta");
    auto b = emb.embed_tokens("beta gamma");
    REQUIRE(a.size() == 2);
    REQUIRE(b.size() == 2);
    CHECK(a[0].size() == b[0].size());
    // "beta" maps to the same axis in both calls.
    CHECK(a[1] == b[0]);
    CHECK(a[0] != b[1]);

    auto s1 = emb.embed_sentence("alpha beta");
    auto s2 = emb.embed_sentence("alpha beta");
    CHECK(s1 == s2);
}
