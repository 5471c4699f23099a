#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "copyguard/builder.hpp"
#include "copyguard/guard_pipeline.hpp"
#include "copyguard/metrics.hpp"

namespace copyguard {

// Runs a model over a manifest with or without the guard, scores every
// response, persists results as append-only JSONL, and aggregates them into
// the report shapes.

struct RunRecord {
    std::size_t entry_index = 0;
    std::string context_path;  // content key for the nested aggregate
    InfringementTask task = InfringementTask::Repetition;
    NoticeFormKind notice_form = NoticeFormKind::None;
    std::string query_text;
    std::string response_text;
    std::vector<MetricScore> scores;  // the task's similarity metric plus refusal
    bool guarded = false;
    PipelineTimings timings;
    std::string provider_id;
    GuardAction action = GuardAction::Allow;
    std::optional<std::string> error;
};

struct ResultsHeader {
    std::string model_id;
    bool guarded = false;
    std::string manifest_fingerprint;
    std::uint64_t sampling_seed = 0;
};

struct ResultsFile {
    ResultsHeader header;
    std::vector<RunRecord> records;
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const RunRecord& r) {
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& s : r.scores)
        scores.push_back({{"task", to_string(s.task)},
                          {"kind", to_string(s.kind)},
                          {"value", s.value}});
    nlohmann::json j{{"entry_index", r.entry_index},
                     {"context_path", r.context_path},
                     {"task", to_string(r.task)},
                     {"notice_form", to_string(r.notice_form)},
                     {"query_text", r.query_text},
                     {"response_text", r.response_text},
                     {"scores", scores},
                     {"guarded", r.guarded},
                     {"timings", to_json(r.timings)},
                     {"provider_id", r.provider_id},
                     {"action", to_string(r.action)}};
    if (r.error) j["error"] = *r.error;
    return j;
}

inline RunRecord run_record_from_json(const nlohmann::json& j) {
    RunRecord r;
    r.entry_index = j.at("entry_index").get<std::size_t>();
    r.context_path = j.value("context_path", "");
    if (auto t = task_from_string(j.value("task", "repetition"))) r.task = *t;
    if (auto f = notice_form_from_string(j.value("notice_form", "none"))) r.notice_form = *f;
    r.query_text = j.value("query_text", "");
    r.response_text = j.value("response_text", "");
    if (j.contains("scores")) {
        for (const auto& s : j["scores"]) {
            MetricScore m;
            if (auto t = task_from_string(s.value("task", "repetition"))) m.task = *t;
            if (auto k = metric_kind_from_string(s.value("kind", "rouge_l"))) m.kind = *k;
            m.value = s.value("value", 0.0);
            r.scores.push_back(m);
        }
    }
    r.guarded = j.value("guarded", false);
    if (j.contains("timings")) {
        r.timings.t1_ms = j["timings"].value("t1_ms", std::int64_t{0});
        r.timings.t2_ms = j["timings"].value("t2_ms", std::int64_t{0});
        r.timings.retried = j["timings"].value("retried", false);
    }
    r.provider_id = j.value("provider_id", "");
    r.action = j.value("action", "allow") == "remind_and_retry" ? GuardAction::RemindAndRetry
                                                                : GuardAction::Allow;
    if (j.contains("error") && j["error"].is_string()) r.error = j["error"].get<std::string>();
    return r;
}

// Stable identity of the evaluation inputs; guarded and unguarded runs over
// the same manifest share it.
inline std::string manifest_fingerprint(const DatasetManifest& manifest) {
    std::string acc = std::to_string(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        acc += '\x1e';
        acc += e.context_path;
        acc += '\x1f';
        acc += to_string(e.task);
        acc += '\x1f';
        acc += e.query_text;
    }
    return to_hex64(fnv1a64(acc));
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

// Reference for similarity is always the notice-free source body.
inline MetricScore score_similarity(const ManifestEntry& entry, const std::string& response,
                                    const ProviderBundle& providers) {
    MetricScore s;
    s.task = entry.task;
    s.kind = similarity_metric_for(entry.task);
    switch (s.kind) {
        case MetricKind::RougeL:
            s.value = rouge_l(response, entry.body).f1;
            break;
        case MetricKind::BScore: {
            if (!providers.embed)
                throw std::runtime_error("no embedding provider configured");
            s.value = bert_score(response, entry.body, *providers.embed).f;
            break;
        }
        case MetricKind::CosSim: {
            if (!providers.embed)
                throw std::runtime_error("no embedding provider configured");
            s.value = cosine_sim(providers.embed->embed_sentence(response),
                                 providers.embed->embed_sentence(entry.body));
            break;
        }
        default:
            throw std::logic_error("unexpected similarity metric");
    }
    return s;
}

// ---------------------------------------------------------------------------
// Evaluation run
// ---------------------------------------------------------------------------

struct EvalConfig {
    std::string model_id;
    bool guarded = false;
    int concurrency = 8;
    std::filesystem::path results_path;
    std::filesystem::path manifest_dir;  // context_path entries resolve against this
    GuardPolicy policy;
};

namespace harness_detail {

inline ImageBytes read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return ImageBytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline ContextItem context_from_entry(const ManifestEntry& entry, ImageBytes image) {
    ContextItem item;
    item.id = entry.context_path;
    item.image = std::move(image);
    item.source_text = entry.source_text;
    item.material_kind = entry.material_kind;
    item.notice_form.variant = entry.notice_form;
    if (entry.notice_form != NoticeFormKind::None &&
        entry.source_text.size() > entry.body.size() + 1)
        item.notice_form.notice_text = entry.source_text.substr(entry.body.size() + 1);
    return item;
}

}  // namespace harness_detail

// Evaluates every manifest entry not already present in the results file.
// Per-entry failures become failed records; they never abort the run. The
// returned set contains previously recorded plus new records, in entry order.
inline std::vector<RunRecord> run_eval(const DatasetManifest& manifest,
                                       const ProviderBundle& providers, const EvalConfig& cfg,
                                       StatusCache* cache = nullptr) {
    if (!providers.lvlm) throw std::invalid_argument("run_eval: no model provider");
    if (!providers.chat) throw std::invalid_argument("run_eval: no chat provider for judging");

    const std::string fingerprint = manifest_fingerprint(manifest);

    // Resume: collect already-recorded entries, verify the file matches.
    std::map<std::size_t, RunRecord> existing;
    bool have_header = false;
    {
        std::ifstream in(cfg.results_path);
        std::string line;
        while (in && std::getline(in, line)) {
            if (trim(line).empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) continue;
            if (j.value("kind", "") == "results_header") {
                if (j.value("manifest_fingerprint", "") != fingerprint)
                    throw std::runtime_error("run_eval: results file belongs to a different manifest");
                have_header = true;
                continue;
            }
            RunRecord r = run_record_from_json(j);
            existing.emplace(r.entry_index, std::move(r));
        }
    }

    std::ofstream out(cfg.results_path, std::ios::app);
    if (!out) throw std::runtime_error("run_eval: cannot open " + cfg.results_path.string());
    std::mutex out_mu;
    if (!have_header) {
        nlohmann::json header{{"kind", "results_header"},
                              {"model_id", cfg.model_id},
                              {"guarded", cfg.guarded},
                              {"manifest_fingerprint", fingerprint},
                              {"sampling_seed", manifest.seed}};
        out << header.dump() << '\n';
        out.flush();
    }

    std::vector<std::optional<RunRecord>> results(manifest.entries.size());
    for (auto& [idx, rec] : existing) {
        if (idx < results.size()) results[idx] = rec;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= manifest.entries.size()) return;
            if (results[i]) continue;  // already recorded

            const ManifestEntry& entry = manifest.entries[i];
            RunRecord r;
            r.entry_index = i;
            r.context_path = entry.context_path;
            r.task = entry.task;
            r.notice_form = entry.notice_form;
            r.query_text = entry.query_text;
            r.guarded = cfg.guarded;
            r.provider_id = cfg.model_id;

            try {
                auto image = harness_detail::read_file_bytes(cfg.manifest_dir / entry.context_path);
                std::string response;
                if (cfg.guarded) {
                    auto item = harness_detail::context_from_entry(entry, std::move(image));
                    QueryItem query{entry.task, entry.seed_index, entry.query_text};
                    auto guarded = guard(item, query, providers, cfg.policy, cache);
                    response = guarded.response.text;
                    r.timings = guarded.decision.timings;
                    r.action = guarded.decision.action;
                    if (!guarded.response.provider_id.empty())
                        r.provider_id = cfg.model_id;
                } else {
                    auto reply = providers.lvlm->ask(image, entry.query_text);
                    response = reply.text;
                }
                r.response_text = response;
                r.scores.push_back(score_similarity(entry, response, providers));
                MetricScore refusal;
                refusal.task = entry.task;
                refusal.kind = MetricKind::Refusal;
                refusal.value = judge_refusal(entry.body, entry.query_text, response,
                                              *providers.chat);
                r.scores.push_back(refusal);
            } catch (const std::exception& e) {
                r.error = e.what();
                r.scores.clear();
            }

            {
                std::lock_guard lock(out_mu);
                out << to_json(r).dump() << '\n';
                out.flush();
            }
            results[i] = std::move(r);
        }
    };

    int n_workers = std::max(1, std::min<int>(cfg.concurrency,
                                              static_cast<int>(manifest.entries.size())));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    std::vector<RunRecord> flat;
    flat.reserve(results.size());
    for (auto& r : results) {
        if (r) flat.push_back(std::move(*r));
    }
    return flat;
}

inline ResultsFile load_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_results: cannot open " + path.string());
    ResultsFile out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        if (j.value("kind", "") == "results_header") {
            out.header.model_id = j.value("model_id", "");
            out.header.guarded = j.value("guarded", false);
            out.header.manifest_fingerprint = j.value("manifest_fingerprint", "");
            out.header.sampling_seed = j.value("sampling_seed", std::uint64_t{0});
            continue;
        }
        out.records.push_back(run_record_from_json(j));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

struct TaskRow {
    MetricKind similarity_kind = MetricKind::RougeL;
    double similarity_pct = 0.0;
    double refusal_pct = 0.0;
    std::size_t count = 0;
};

struct FormRow {
    double similarity_pct = 0.0;
    double refusal_pct = 0.0;
    std::size_t count = 0;
};

struct ComplianceReport {
    std::string model_id;
    bool guarded = false;
    std::string manifest_fingerprint;
    std::uint64_t sampling_seed = 0;
    std::size_t record_count = 0;
    std::size_t failed_count = 0;
    std::map<std::string, TaskRow> by_task;
    std::map<std::string, FormRow> by_form;
    // Dataset-level aggregate per metric: mean over contents of per-content
    // query means, as percents.
    std::map<std::string, double> aggregate_pct;
};

namespace harness_detail {

inline double nested_mean(const std::map<std::string, std::vector<double>>& by_content) {
    double outer = 0.0;
    std::size_t n = 0;
    for (const auto& [content, values] : by_content) {
        if (values.empty()) continue;
        double inner = 0.0;
        for (double v : values) inner += v;
        outer += inner / static_cast<double>(values.size());
        ++n;
    }
    return n == 0 ? 0.0 : outer / static_cast<double>(n);
}

}  // namespace harness_detail

inline ComplianceReport report(const ResultsFile& results) {
    if (results.records.empty()) throw std::invalid_argument("report: no records");

    ComplianceReport rep;
    rep.model_id = results.header.model_id;
    rep.guarded = results.header.guarded;
    rep.manifest_fingerprint = results.header.manifest_fingerprint;
    rep.sampling_seed = results.header.sampling_seed;
    rep.record_count = results.records.size();

    struct Acc {
        double sum = 0.0;
        std::size_t n = 0;
        double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
    };
    std::map<std::string, Acc> task_sim, task_refusal, form_sim, form_refusal;
    std::map<std::string, std::map<std::string, std::vector<double>>> metric_by_content;

    for (const auto& r : results.records) {
        if (r.error) {
            ++rep.failed_count;
            continue;
        }
        for (const auto& s : r.scores) {
            const std::string task = to_string(r.task);
            const std::string form = to_string(r.notice_form);
            if (s.kind == MetricKind::Refusal) {
                task_refusal[task].sum += s.value;
                ++task_refusal[task].n;
                form_refusal[form].sum += s.value;
                ++form_refusal[form].n;
            } else {
                task_sim[task].sum += s.value;
                ++task_sim[task].n;
                form_sim[form].sum += s.value;
                ++form_sim[form].n;
            }
            metric_by_content[to_string(s.kind)][r.context_path].push_back(s.value);
        }
    }

    for (const auto& [task, acc] : task_sim) {
        TaskRow row;
        if (auto t = task_from_string(task)) row.similarity_kind = similarity_metric_for(*t);
        row.similarity_pct = percent_2dp(acc.mean());
        row.refusal_pct = percent_2dp(task_refusal[task].mean());
        row.count = acc.n;
        rep.by_task[task] = row;
    }
    for (const auto& [form, acc] : form_refusal) {
        FormRow row;
        row.similarity_pct = percent_2dp(form_sim[form].mean());
        row.refusal_pct = percent_2dp(acc.mean());
        row.count = acc.n;
        rep.by_form[form] = row;
    }
    for (const auto& [kind, by_content] : metric_by_content)
        rep.aggregate_pct[kind] = percent_2dp(harness_detail::nested_mean(by_content));

    return rep;
}

inline nlohmann::json to_json(const ComplianceReport& rep) {
    nlohmann::json by_task = nlohmann::json::object();
    for (const auto& [task, row] : rep.by_task)
        by_task[task] = {{"metric", to_string(row.similarity_kind)},
                         {"similarity_pct", row.similarity_pct},
                         {"refusal_pct", row.refusal_pct},
                         {"count", row.count}};
    nlohmann::json by_form = nlohmann::json::object();
    for (const auto& [form, row] : rep.by_form)
        by_form[form] = {{"similarity_pct", row.similarity_pct},
                         {"refusal_pct", row.refusal_pct},
                         {"count", row.count}};
    return {{"model_id", rep.model_id},
            {"guarded", rep.guarded},
            {"manifest_fingerprint", rep.manifest_fingerprint},
            {"sampling_seed", rep.sampling_seed},
            {"record_count", rep.record_count},
            {"failed_count", rep.failed_count},
            {"by_task", by_task},
            {"by_form", by_form},
            {"aggregate_pct", rep.aggregate_pct}};
}

inline std::string render_report_text(const ComplianceReport& rep) {
    char buf[192];
    std::string out;
    std::snprintf(buf, sizeof(buf), "model: %s    guarded: %s    records: %zu (failed: %zu)\n",
                  rep.model_id.c_str(), rep.guarded ? "yes" : "no", rep.record_count,
                  rep.failed_count);
    out += buf;
    std::snprintf(buf, sizeof(buf), "sampling seed: %llu    manifest: %s\n\n",
                  static_cast<unsigned long long>(rep.sampling_seed),
                  rep.manifest_fingerprint.c_str());
    out += buf;

    out += "task            metric    similarity    refusal    count\n";
    for (const auto& [task, row] : rep.by_task) {
        std::snprintf(buf, sizeof(buf), "%-14s  %-8s  %10.2f  %9.2f  %7zu\n", task.c_str(),
                      to_string(row.similarity_kind).c_str(), row.similarity_pct, row.refusal_pct,
                      row.count);
        out += buf;
    }
    out += "\nnotice form                 similarity    refusal    count\n";
    for (const auto& [form, row] : rep.by_form) {
        std::snprintf(buf, sizeof(buf), "%-26s  %10.2f  %9.2f  %7zu\n", form.c_str(),
                      row.similarity_pct, row.refusal_pct, row.count);
        out += buf;
    }
    out += "\naggregate (nested mean over contents, then queries):\n";
    for (const auto& [kind, pct] : rep.aggregate_pct) {
        std::snprintf(buf, sizeof(buf), "  %-8s  %10.2f\n", kind.c_str(), pct);
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Defense comparison
// ---------------------------------------------------------------------------

struct CompareRow {
    std::string label;  // "task repetition", "form none", ...
    double baseline = 0.0;
    double guarded = 0.0;
    double delta = 0.0;
};

struct DefenseComparison {
    std::string model_id;
    std::vector<CompareRow> refusal_rows;
    std::vector<CompareRow> similarity_rows;
};

// Paired baseline / +guard rows per task and per notice form. Both reports
// must come from the same manifest and model.
inline DefenseComparison compare(const ComplianceReport& baseline,
                                 const ComplianceReport& guarded) {
    if (baseline.manifest_fingerprint != guarded.manifest_fingerprint)
        throw std::invalid_argument("compare: reports cover different manifests");
    if (baseline.model_id != guarded.model_id)
        throw std::invalid_argument("compare: reports cover different models");

    DefenseComparison out;
    out.model_id = baseline.model_id;
    for (const auto& [task, base_row] : baseline.by_task) {
        auto it = guarded.by_task.find(task);
        if (it == guarded.by_task.end()) continue;
        out.refusal_rows.push_back({"task " + task, base_row.refusal_pct, it->second.refusal_pct,
                                    it->second.refusal_pct - base_row.refusal_pct});
        out.similarity_rows.push_back({"task " + task, base_row.similarity_pct,
                                       it->second.similarity_pct,
                                       it->second.similarity_pct - base_row.similarity_pct});
    }
    for (const auto& [form, base_row] : baseline.by_form) {
        auto it = guarded.by_form.find(form);
        if (it == guarded.by_form.end()) continue;
        out.refusal_rows.push_back({"form " + form, base_row.refusal_pct, it->second.refusal_pct,
                                    it->second.refusal_pct - base_row.refusal_pct});
    }
    return out;
}

inline std::string render_comparison_text(const DefenseComparison& cmp) {
    char buf[192];
    std::string out = "model: " + cmp.model_id + "\n\n";
    out += "refusal rate                  baseline     +guard      delta\n";
    for (const auto& row : cmp.refusal_rows) {
        std::snprintf(buf, sizeof(buf), "%-28s  %9.2f  %9.2f  %+9.2f\n", row.label.c_str(),
                      row.baseline, row.guarded, row.delta);
        out += buf;
    }
    out += "\nsimilarity                    baseline     +guard      delta\n";
    for (const auto& row : cmp.similarity_rows) {
        std::snprintf(buf, sizeof(buf), "%-28s  %9.2f  %9.2f  %+9.2f\n", row.label.c_str(),
                      row.baseline, row.guarded, row.delta);
        out += buf;
    }
    return out;
}

}  // namespace copyguard
