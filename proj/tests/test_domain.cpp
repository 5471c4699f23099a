#include <doctest.h>

#include "copyguard/domain.hpp"
#include "support.hpp"

using namespace copyguard;

TEST_CASE("enum cardinalities") {
    CHECK(all_notice_forms().size() == 5);
    CHECK(all_tasks().size() == 4);
    CHECK(kNoticeFormCount == 5);
    CHECK(kInfringementTaskCount == 4);

    // Round trips through the wire names.
    for (auto f : all_notice_forms()) CHECK(notice_form_from_string(to_string(f)) == f);
    for (auto t : all_tasks()) CHECK(task_from_string(to_string(t)) == t);
    for (auto k : {MaterialKind::Book, MaterialKind::News, MaterialKind::Lyrics,
                   MaterialKind::CodeDoc})
        CHECK(material_kind_from_string(to_string(k)) == k);
}

TEST_CASE("validate_context") {
    SUBCASE("minimal valid item") {
        auto item = test::minimal_context();
        CHECK(validate_context(item).empty());
    }

    SUBCASE("empty image bytes") {
        ContextItem item;
        auto errors = validate_context(item);
        REQUIRE(!errors.empty());
        CHECK(errors.front() == "image undecodable");
    }

    SUBCASE("garbage image bytes") {
        ContextItem item;
        item.image = {1, 2, 3, 4, 5, 6, 7, 8, 9};
        auto errors = validate_context(item);
        REQUIRE(!errors.empty());
        CHECK(errors.front() == "image undecodable");
    }

    SUBCASE("notice form requires notice text") {
        auto item = test::minimal_context();
        item.notice_form.variant = NoticeFormKind::OriginalText;
        auto errors = validate_context(item);
        REQUIRE(!errors.empty());
        CHECK(errors.front() == "notice_text required");
    }

    SUBCASE("form none forbids notice text") {
        auto item = test::minimal_context();
        item.notice_form.notice_text = "All Rights Reserved";
        CHECK(!validate_context(item).empty());
    }

    SUBCASE("text-embedded notice must appear in source_text") {
        auto item = test::minimal_context();
        item.notice_form.variant = NoticeFormKind::AllRightsReservedText;
        item.notice_form.notice_text = "All Rights Reserved";
        item.source_text = "body without the notice";
        CHECK(!validate_context(item).empty());

        item.source_text = "body text\nAll Rights Reserved";
        CHECK(validate_context(item).empty());
    }

    SUBCASE("pure: identical inputs, identical outputs") {
        ContextItem item;
        item.image = {0xDE, 0xAD};
        item.notice_form.variant = NoticeFormKind::OriginalImage;
        CHECK(validate_context(item) == validate_context(item));
    }
}

TEST_CASE("png round trip") {
    Raster img = Raster::blank(17, 9);
    img.at(3, 4) = 0x00;
    img.at(16, 8) = 0x7F;

    auto bytes = png_encode(img);
    auto back = png_decode(bytes);
    REQUIRE(back.has_value());
    CHECK(back->width == 17);
    CHECK(back->height == 9);
    CHECK(back->pixels == img.pixels);

    // Deterministic encoding.
    CHECK(png_encode(img) == bytes);

    // Truncation breaks decoding.
    ImageBytes cut(bytes.begin(), bytes.begin() + bytes.size() / 2);
    CHECK(!png_decode(cut).has_value());
}
