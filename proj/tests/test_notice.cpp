#include <doctest.h>

#include <random>

#include "copyguard/notice_identifier.hpp"
#include "copyguard/stubs.hpp"
#include "support.hpp"

using namespace copyguard;

namespace {

class BlocksOcr : public OcrProvider {
public:
    explicit BlocksOcr(std::vector<OcrBlock> blocks) : blocks_(std::move(blocks)) {}
    std::vector<OcrBlock> extract(const ImageBytes&) override { return blocks_; }

private:
    std::vector<OcrBlock> blocks_;
};

}  // namespace

TEST_CASE("extract_text") {
    auto item = test::minimal_context();

    SUBCASE("passthrough stub") {
        item.source_text = "abc";
        auto ocr = stub_ocr_from_source_text(item);
        CHECK(extract_text(item, *ocr) == "abc");
    }

    SUBCASE("confidence threshold filters blocks") {
        BlocksOcr ocr({{"a", 0.9}, {"b", 0.3}});
        CHECK(extract_text(item, ocr, 0.5) == "a");
        CHECK(extract_text(item, ocr, 0.2) == "a\nb");
    }

    SUBCASE("empty block list") {
        BlocksOcr ocr({});
        CHECK(extract_text(item, ocr) == "");
    }
}

TEST_CASE("detect_notice frozen examples") {
    SUBCASE("copyright sign, hand-checked offsets") {
        std::string text = "\xC2\xA9 2020 J.K. Rowling. All rights reserved.";
        auto m = detect_notice(text);
        REQUIRE(m.has_value());
        CHECK(m->matched_pattern == "\xC2\xA9");
        CHECK(m->span_start == 0);
        CHECK(m->span_end == 2);  // the sign is two UTF-8 bytes
        CHECK(m->scanned_text == text);
    }

    SUBCASE("no pattern") {
        CHECK(!detect_notice("hello world").has_value());
    }

    SUBCASE("case-insensitive") {
        auto m = detect_notice("ALL RIGHTS RESERVED");
        REQUIRE(m.has_value());
        CHECK(m->matched_pattern == "all rights reserved");
        CHECK(m->span_start == 0);
        CHECK(m->span_end == 19);
    }

    SUBCASE("word copyright mid-text") {
        std::string text = "This text is Copyright 1999 by Someone";
        auto m = detect_notice(text);
        REQUIRE(m.has_value());
        CHECK(m->matched_pattern == "copyright");
        CHECK(m->span_start == 13);
        CHECK(text.substr(m->span_start, m->span_end - m->span_start) == "Copyright");
    }
}

TEST_CASE("(c) needs whitespace and a digit") {
    CHECK(detect_notice("(c) 2020 Example Corp").has_value());
    CHECK(detect_notice("(C)  1987").has_value());
    CHECK(!detect_notice("f(c) returns the argument").has_value());
    CHECK(!detect_notice("(c)2020 no space").has_value());
    CHECK(!detect_notice("call (c) then (d)").has_value());
}

TEST_CASE("earliest match wins") {
    std::string text = "preface all rights reserved, then copyright 2001";
    auto m = detect_notice(text);
    REQUIRE(m.has_value());
    CHECK(m->matched_pattern == "all rights reserved");
    CHECK(m->span_start == 8);

    // Span start is minimal over every pattern occurrence.
    for (const auto& p : default_notice_patterns()) {
        auto pos = lower_ascii(text).find(p == "\xC2\xA9" ? p : lower_ascii(p));
        if (pos != std::string::npos && p != "(c)") CHECK(m->span_start <= pos);
    }
}

TEST_CASE("custom pattern set") {
    std::vector<std::string> patterns = {"propriete exclusive"};
    CHECK(!detect_notice("all rights reserved", patterns).has_value());
    auto m = detect_notice("texte sous PROPRIETE EXCLUSIVE de l'auteur", patterns);
    REQUIRE(m.has_value());
    CHECK(m->matched_pattern == "propriete exclusive");
}

TEST_CASE("pattern-free fuzz never matches") {
    std::mt19937_64 rng(42);
    for (int it = 0; it < 300; ++it) {
        auto text = test::pattern_free_text(rng, 20);
        CAPTURE(text);
        CHECK(!detect_notice(text).has_value());
    }
}
