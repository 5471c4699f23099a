#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "copyguard/guard_pipeline.hpp"

namespace copyguard {

inline constexpr const char* kGatewayVersion = "0.1.0";

// The guardrail as a service. POST /v1/guard runs the full pipeline around
// one model invocation; GET /v1/health reports build info. Requests are
// handled concurrently by the underlying server; the status cache is shared.
class GuardGateway {
public:
    GuardGateway(ProviderBundle providers, GuardPolicy policy = {},
                 std::shared_ptr<StatusCache> cache = nullptr)
        : providers_(std::move(providers)), policy_(std::move(policy)), cache_(std::move(cache)) {
        server_.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
            nlohmann::json j{{"status", "ok"}, {"version", kGatewayVersion}};
            res.set_content(j.dump(), "application/json");
        });

        server_.Post("/v1/guard", [this](const httplib::Request& req, httplib::Response& res) {
            handle_guard(req, res);
        });
    }

    // Blocks until stop(). Returns false if the address cannot be bound.
    bool listen(const std::string& host, int port) {
        return server_.listen(host, port);
    }

    // Binds an ephemeral port and serves from a background thread; test use.
    int start_async(const std::string& host = "127.0.0.1") {
        int port = server_.bind_to_any_port(host);
        if (port <= 0) return -1;
        serve_thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port;
    }

    // Completes in-flight requests before returning.
    void stop() {
        server_.stop();
        if (serve_thread_.joinable()) serve_thread_.join();
    }

    ~GuardGateway() { stop(); }

private:
    void handle_guard(const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
        if (body.is_discarded()) {
            fail(res, 400, "body is not valid JSON");
            return;
        }
        if (!body.contains("query") || !body["query"].is_string() ||
            trim(body["query"].get<std::string>()).empty()) {
            fail(res, 400, "query required");
            return;
        }
        if (!body.contains("image_b64") || !body["image_b64"].is_string()) {
            fail(res, 400, "image_b64 required");
            return;
        }
        auto image = base64_decode(body["image_b64"].get<std::string>());
        if (!image) {
            fail(res, 400, "image_b64 is not valid base64");
            return;
        }

        ContextItem item;
        item.id = "request";
        item.image = std::move(*image);
        if (auto kind = material_kind_from_string(body.value("material_kind", "book")))
            item.material_kind = *kind;
        if (body.contains("source_text") && body["source_text"].is_string())
            item.source_text = body["source_text"].get<std::string>();

        QueryItem query;
        query.text = body["query"].get<std::string>();
        if (auto task = task_from_string(body.value("task", "repetition"))) query.task = *task;

        try {
            GuardedResponse guarded = guard(item, query, providers_, policy_, cache_.get());
            res.status = guarded.fail_closed ? 502 : 200;
            res.set_content(to_json(guarded).dump(), "application/json");
        } catch (const std::exception& e) {
            fail(res, 502, e.what());
        }
    }

    static void fail(httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
    }

    ProviderBundle providers_;
    GuardPolicy policy_;
    std::shared_ptr<StatusCache> cache_;
    httplib::Server server_;
    std::thread serve_thread_;
};

}  // namespace copyguard
