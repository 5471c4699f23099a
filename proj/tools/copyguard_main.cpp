// copyguard -- copyright-compliance gateway and benchmark tooling.
//
// Subcommands: build (fabricate a benchmark), eval (run a model over a
// manifest, optionally guarded), report (aggregate results), compare
// (baseline vs +guard), serve (run the gateway).
//
// Exit codes: 0 success, 2 usage error, 3 provider failure under fail-closed.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "copyguard/builder.hpp"
#include "copyguard/gateway.hpp"
#include "copyguard/harness.hpp"
#include "copyguard/http_providers.hpp"
#include "copyguard/offline_stubs.hpp"
#include "copyguard/policy_config.hpp"

namespace fs = std::filesystem;
using namespace copyguard;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitProviderFailure = 3;

std::atomic<GuardGateway*> g_gateway{nullptr};

// Once-only: a second signal while shutdown is draining must not re-enter.
void handle_signal(int) {
    if (GuardGateway* gateway = g_gateway.exchange(nullptr)) gateway->stop();
}

// Providers come from COPYGUARD_* environment variables; any URL may instead
// use a stub: scheme for offline runs (see README).
ProviderBundle bundle_from_env_with_stubs(const ProviderTimeouts& timeouts = {}) {
    EnvTimeouts env_timeouts;
    env_timeouts.ocr = std::chrono::milliseconds(timeouts.ocr_ms);
    env_timeouts.search = std::chrono::milliseconds(timeouts.search_ms);
    env_timeouts.chat = std::chrono::milliseconds(timeouts.chat_ms);
    env_timeouts.embed = std::chrono::milliseconds(timeouts.embed_ms);
    env_timeouts.lvlm = std::chrono::milliseconds(timeouts.lvlm_ms);
    ProviderBundle bundle = providers_from_env(env_timeouts);
    struct Role {
        const char* role;
        const char* var;
    };
    for (auto [role, var] : {Role{"ocr", "COPYGUARD_OCR_URL"},
                             Role{"search", "COPYGUARD_SEARCH_URL"},
                             Role{"chat", "COPYGUARD_CHAT_URL"},
                             Role{"embed", "COPYGUARD_EMBED_URL"},
                             Role{"lvlm", "COPYGUARD_LVLM_URL"}}) {
        if (auto url = env_var(var)) apply_stub_url(bundle, role, *url);
    }
    return bundle;
}

// Policy assembly: file first, then explicit flag overrides.
struct PolicyFlags {
    std::string file;
    std::string fail_mode;       // "", "open" or "closed"
    double min_confidence = -1;  // <0 means unset
    int ttl_days = -1;

    PolicyFile resolve() const {
        PolicyFile out;
        if (!file.empty()) out = load_policy_file(file);
        if (fail_mode == "open") out.policy.fail_mode = FailMode::Open;
        else if (fail_mode == "closed") out.policy.fail_mode = FailMode::Closed;
        if (min_confidence >= 0) out.policy.min_confidence = min_confidence;
        if (ttl_days >= 0) out.policy.ttl_days = ttl_days;
        return out;
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--policy", file, "policy JSON file");
        cmd->add_option("--fail-mode", fail_mode, "open or closed")
            ->check(CLI::IsMember({"open", "closed"}));
        cmd->add_option("--min-confidence", min_confidence, "OCR confidence floor");
        cmd->add_option("--ttl-days", ttl_days, "status cache TTL in days");
    }
};

std::shared_ptr<StatusCache> cache_from_env(const GuardPolicy& policy) {
    if (auto path = env_var("COPYGUARD_CACHE_PATH"))
        return std::make_shared<StatusCache>(*path, policy.ttl_days);
    return nullptr;
}

std::map<InfringementTask, std::vector<QueryItem>> vendored_seeds() {
    std::map<InfringementTask, std::vector<QueryItem>> seeds;
    for (auto task : all_tasks()) {
        int index = 0;
        for (auto& line : prompts::seed_lines(task))
            seeds[task].push_back({task, index++, line});
    }
    return seeds;
}

int run_build(const std::string& corpus, const std::string& out_dir, int q_per_task,
              std::uint64_t seed, int rewrites_per_seed, bool offline) {
    auto materials = load_materials(corpus);
    if (materials.empty()) {
        std::cerr << "no materials found in " << corpus << "\n";
        return kExitUsage;
    }

    ProviderBundle bundle = bundle_from_env_with_stubs();
    ChatProvider* rewriter = nullptr;
    if (!offline && bundle.chat) rewriter = bundle.chat.get();
    if (!rewriter)
        std::cerr << "note: no rewriter chat provider; query pool is the seed prompts only\n";

    BuildConfig cfg;
    cfg.out_dir = out_dir;
    cfg.q_per_task = q_per_task;
    cfg.rewrites_per_seed = rewrites_per_seed;
    cfg.seed = seed;
    fs::create_directories(cfg.out_dir);

    auto manifest = build_dataset(materials, vendored_seeds(), rewriter, cfg);
    write_manifest(manifest, fs::path(out_dir) / "manifest.jsonl");

    std::printf("built %zu entries over %zu materials -> %s/manifest.jsonl\n",
                manifest.counts.total, materials.size(), out_dir.c_str());
    for (const auto& [task, n] : manifest.counts.by_task)
        std::printf("  task %-14s %zu\n", task.c_str(), n);
    for (const auto& [form, n] : manifest.counts.by_form)
        std::printf("  form %-26s %zu\n", form.c_str(), n);
    return kExitOk;
}

int run_eval_cmd(const std::string& manifest_path, const std::string& model_url, bool guarded,
                 const std::string& out_path, int concurrency, const PolicyFlags& flags) {
    auto manifest = load_manifest(manifest_path);
    auto policy_file = flags.resolve();

    ProviderBundle bundle = bundle_from_env_with_stubs(policy_file.timeouts);
    if (!apply_stub_url(bundle, "lvlm", model_url)) {
        auto ep = parse_endpoint(model_url);
        ep.timeout = std::chrono::milliseconds(policy_file.timeouts.lvlm_ms);
        bundle.lvlm = std::make_shared<HttpLvlm>(ep, model_url);
    }
    if (!bundle.chat) {
        std::cerr << "a chat provider is required for refusal judging "
                     "(COPYGUARD_CHAT_URL, or stub:auto)\n";
        return kExitUsage;
    }

    EvalConfig cfg;
    cfg.model_id = model_url;
    cfg.guarded = guarded;
    cfg.concurrency = concurrency;
    cfg.results_path = out_path;
    cfg.manifest_dir = fs::path(manifest_path).parent_path();
    cfg.policy = policy_file.policy;

    auto cache = cache_from_env(cfg.policy);
    auto records = run_eval(manifest, bundle, cfg, cache.get());

    std::size_t failed = 0;
    for (const auto& r : records)
        if (r.error) ++failed;
    std::printf("evaluated %zu entries (%zu failed) -> %s\n", records.size(), failed,
                out_path.c_str());

    if (failed > 0 && cfg.policy.fail_mode == FailMode::Closed) return kExitProviderFailure;
    return kExitOk;
}

int run_report(const std::string& in_path, const std::string& format,
               const std::string& out_path) {
    auto results = load_results(in_path);
    auto rep = report(results);

    std::string rendered =
        format == "json" ? to_json(rep).dump(2) + "\n" : render_report_text(rep);
    if (out_path.empty()) {
        std::fputs(rendered.c_str(), stdout);
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        out << rendered;
    }
    return kExitOk;
}

int run_compare(const std::string& base_path, const std::string& guarded_path) {
    auto base = report(load_results(base_path));
    auto guarded = report(load_results(guarded_path));
    auto cmp = compare(base, guarded);
    std::fputs(render_comparison_text(cmp).c_str(), stdout);
    return kExitOk;
}

int run_serve(const std::string& bind, const PolicyFlags& flags) {
    auto policy_file = flags.resolve();
    const GuardPolicy& policy = policy_file.policy;

    ProviderBundle bundle = bundle_from_env_with_stubs(policy_file.timeouts);
    if (!bundle.ocr || !bundle.search || !bundle.chat || !bundle.lvlm) {
        std::cerr << "serve requires COPYGUARD_OCR_URL, COPYGUARD_SEARCH_URL, "
                     "COPYGUARD_CHAT_URL and COPYGUARD_LVLM_URL (stub: URLs allowed)\n";
        return kExitUsage;
    }

    auto colon = bind.rfind(':');
    if (colon == std::string::npos) {
        std::cerr << "--bind must be HOST:PORT\n";
        return kExitUsage;
    }
    std::string host = bind.substr(0, colon);
    int port = std::atoi(bind.substr(colon + 1).c_str());

    GuardGateway gateway(bundle, policy, cache_from_env(policy));
    g_gateway = &gateway;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    std::printf("copyguard gateway listening on %s:%d\n", host.c_str(), port);
    bool ok = gateway.listen(host, port);
    g_gateway = nullptr;
    if (!ok) {
        std::cerr << "failed to bind " << bind << "\n";
        return 1;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"copyright-compliance gateway and evaluation tooling"};
    app.require_subcommand(1);

    // build
    auto* build = app.add_subcommand("build", "fabricate a benchmark from a corpus directory");
    std::string corpus_dir, build_out;
    int q_per_task = 10, rewrites_per_seed = 10;
    std::uint64_t seed = 0;
    bool offline = false;
    build->add_option("--corpus", corpus_dir, "directory of per-material JSON files")->required();
    build->add_option("--out", build_out, "output directory")->required();
    build->add_option("--q-per-task", q_per_task, "queries per task per context");
    build->add_option("--seed", seed, "sampling seed (rotates query round-robin)");
    build->add_option("--rewrites-per-seed", rewrites_per_seed, "rewrites per seed prompt");
    build->add_flag("--offline", offline, "skip the rewriter; use seed prompts directly");

    // eval
    auto* eval = app.add_subcommand("eval", "run a model over a manifest and score it");
    std::string manifest_path, model_url, eval_out = "results.jsonl";
    bool guarded = false;
    int concurrency = 8;
    PolicyFlags eval_policy;
    eval->add_option("--manifest", manifest_path, "manifest.jsonl path")->required();
    eval->add_option("--model", model_url, "model endpoint URL or stub:<name>")->required();
    eval->add_flag("--guard", guarded, "route queries through the guard pipeline");
    eval->add_option("--out", eval_out, "results JSONL path");
    eval->add_option("--concurrency", concurrency, "max in-flight model calls");
    eval_policy.attach(eval);

    // report
    auto* rep = app.add_subcommand("report", "aggregate a results file");
    std::string report_in, report_format = "text", report_out;
    rep->add_option("--in", report_in, "results JSONL path")->required();
    rep->add_option("--format", report_format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    rep->add_option("--out", report_out, "write to file instead of stdout");

    // compare
    auto* cmp = app.add_subcommand("compare", "baseline vs guarded results");
    std::string base_path, guarded_path;
    cmp->add_option("--base", base_path, "baseline results JSONL")->required();
    cmp->add_option("--guarded", guarded_path, "guarded results JSONL")->required();

    // serve
    auto* serve = app.add_subcommand("serve", "run the guard gateway");
    std::string bind = "127.0.0.1:8787";
    PolicyFlags serve_policy;
    serve->add_option("--bind", bind, "HOST:PORT to listen on");
    serve_policy.attach(serve);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (build->parsed())
            return run_build(corpus_dir, build_out, q_per_task, seed, rewrites_per_seed, offline);
        if (eval->parsed())
            return run_eval_cmd(manifest_path, model_url, guarded, eval_out, concurrency,
                                eval_policy);
        if (rep->parsed()) return run_report(report_in, report_format, report_out);
        if (cmp->parsed()) return run_compare(base_path, guarded_path);
        if (serve->parsed()) return run_serve(bind, serve_policy);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
