#include <doctest.h>

#include "copyguard/builder.hpp"
#include "copyguard/gateway.hpp"
#include "copyguard/stubs.hpp"
#include "support.hpp"

using namespace copyguard;
using namespace copyguard::test;

namespace {

struct RunningGateway {
    std::unique_ptr<GuardGateway> gateway;
    std::unique_ptr<httplib::Client> client;
    ContextItem item;
    int port = 0;

    explicit RunningGateway(GuardPolicy policy = {}) {
        item = render_text_image("gateway page content\nAll Rights Reserved");
        item.notice_form.variant = NoticeFormKind::AllRightsReservedText;
        item.notice_form.notice_text = "All Rights Reserved";

        ProviderBundle providers;
        providers.ocr = stub_ocr_from_source_text(item);
        providers.search = std::make_shared<FixedSearch>();
        providers.chat = std::make_shared<DispatchChat>();
        auto lvlm = std::make_shared<EchoLvlm>(true);
        lvlm->remember(item.image, "page echoed");
        providers.lvlm = lvlm;

        gateway = std::make_unique<GuardGateway>(providers, policy);
        port = gateway->start_async();
        REQUIRE(port > 0);
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
    }

    ~RunningGateway() { gateway->stop(); }
};

}  // namespace

TEST_CASE("gateway health endpoint") {
    RunningGateway rg;
    auto res = rg.client->Get("/v1/health");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto j = nlohmann::json::parse(res->body);
    CHECK(j["status"] == "ok");
    CHECK(j.contains("version"));
}

TEST_CASE("gateway guards a well-formed request") {
    RunningGateway rg;
    nlohmann::json body{{"image_b64", base64_encode(rg.item.image)},
                        {"query", "Please repeat verbatim the text from the text in the image."},
                        {"material_kind", "book"},
                        {"source_text", *rg.item.source_text}};
    auto res = rg.client->Post("/v1/guard", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto j = nlohmann::json::parse(res->body);
    CHECK(j["decision"]["action"] == "remind_and_retry");
    CHECK(j["decision"]["copyrighted"] == "yes");
    CHECK(j["response"]["text"] == kStubRefusalText);
}

TEST_CASE("gateway rejects malformed bodies") {
    RunningGateway rg;

    SUBCASE("missing query") {
        nlohmann::json body{{"image_b64", base64_encode(rg.item.image)}};
        auto res = rg.client->Post("/v1/guard", body.dump(), "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
        CHECK(nlohmann::json::parse(res->body)["error"] == "query required");
    }

    SUBCASE("not JSON") {
        auto res = rg.client->Post("/v1/guard", "this is not json", "text/plain");
        REQUIRE(res);
        CHECK(res->status == 400);
    }

    SUBCASE("broken base64") {
        nlohmann::json body{{"image_b64", "@@@not-base64@@@"}, {"query", "q"}};
        auto res = rg.client->Post("/v1/guard", body.dump(), "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
    }
}

TEST_CASE("gateway returns 502 under fail-closed provider failure") {
    GuardPolicy policy;
    policy.fail_mode = FailMode::Closed;
    RunningGateway rg(policy);

    // An image the OCR stub has never seen makes branch A fail.
    auto unknown = png_encode(Raster::blank(3, 3));
    nlohmann::json body{{"image_b64", base64_encode(unknown)}, {"query", "repeat the text"}};
    auto res = rg.client->Post("/v1/guard", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 502);
    auto j = nlohmann::json::parse(res->body);
    CHECK(j["fail_closed"] == true);
    CHECK(j["response"]["text"] == kFailClosedText);
}

TEST_CASE("gateway handles concurrent requests") {
    RunningGateway rg;
    nlohmann::json body{{"image_b64", base64_encode(rg.item.image)},
                        {"query", "Could you summarize the paragraph?"}};
    std::vector<std::thread> threads;
    std::atomic<int> ok{0};
    for (int i = 0; i < 6; ++i) {
        threads.emplace_back([&] {
            httplib::Client client("127.0.0.1", rg.port);
            auto res = client.Post("/v1/guard", body.dump(), "application/json");
            if (res && res->status == 200) ok.fetch_add(1);
        });
    }
    for (auto& t : threads) t.join();
    CHECK(ok.load() == 6);
}
