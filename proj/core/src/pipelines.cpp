#include "rcr/pipelines.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "rcr/error.hpp"
#include "rcr/sha256.hpp"
#include "rcr/util.hpp"

namespace rcr {

Completion pipeline_complete(const BackendHandle& be, const Conversation& conv) {
    if (be.cache != nullptr) {
        return cached_complete(conv, be.config, *be.cache, be.backend);
    }
    return be.backend.complete(conv);
}

namespace {

constexpr const char* kEpoch = "1970-01-01T00:00:00Z";

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(
               std::chrono::steady_clock::now() - since)
        .count();
}

Completion complete_step(const BackendHandle& be, const Conversation& conv,
                         const std::string& instance_id, const std::string& step) {
    try {
        return pipeline_complete(be, conv);
    } catch (Error& e) {
        throw e.with_instance(instance_id).with_step(step);
    }
}

struct FinalLabel {
    std::optional<Polarity> label;
    bool fallback_used = false;
    std::string rule;
};

// Parses the deciding response under the configured fallback policy. The
// retry policy appends one clarification turn to the same conversation (and
// its transcript) and falls back to neutral if that too fails to parse.
FinalLabel parse_final(const BackendHandle& be, const PipelineConfig& cfg,
                       Conversation conv, const std::string& response,
                       LabeledConversation& transcript,
                       const std::string& instance_id, const std::string& step) {
    const ParseOutcome outcome = extract_polarity(response);
    const Resolution res = resolve_unparseable(outcome, cfg.policy);
    if (!res.retry) {
        return {res.label, !outcome.polarity.has_value(), outcome.rule_fired};
    }

    const PromptMessage clarification =
        user_msg(cfg.templates.render("clarification", {}));
    conv.push_back(assistant_msg(response));
    conv.push_back(clarification);
    const Completion retried = complete_step(be, conv, instance_id, step);
    transcript.messages.push_back(clarification);
    transcript.messages.push_back(assistant_msg(retried.text));

    const ParseOutcome second = extract_polarity(retried.text);
    if (second.polarity) return {second.polarity, true, second.rule_fired};
    return {Polarity::Neutral, true, second.rule_fired};
}

ReasoningRecord make_record(const Premise& premise, const std::string& raw,
                            const std::string& instance_id,
                            const std::string& step) {
    auto [aspect, rationale] = split_premise_response(raw);
    if (rationale.empty()) {
        throw Error(ErrorKind::Pipeline,
                    "premise response produced an empty rationale")
            .with_instance(instance_id)
            .with_step(step);
    }
    ReasoningRecord rec;
    rec.premise = premise;
    rec.aspect_answer = std::move(aspect);
    rec.rationale = std::move(rationale);
    rec.raw_response = raw;
    return rec;
}

}  // namespace

PredictionRecord run_direct(const SentenceInstance& x, const BackendHandle& be,
                            const PipelineConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    PredictionRecord pred;
    pred.instance_id = x.id;
    pred.method = Method::Direct;

    const Conversation conv = render_direct_prompt(cfg.templates, x, cfg.render);
    const Completion completion = complete_step(be, conv, x.id, "direct");
    LabeledConversation transcript{"direct", conv};
    transcript.messages.push_back(assistant_msg(completion.text));

    const FinalLabel final =
        parse_final(be, cfg, conv, completion.text, transcript, x.id, "direct");
    pred.final_polarity = final.label;
    pred.fallback_used = final.fallback_used;
    pred.parse_rule = final.rule;
    pred.transcripts.push_back(std::move(transcript));
    pred.wall_time_ms = elapsed_ms(started);
    return pred;
}

PredictionRecord run_thor(const SentenceInstance& x, const BackendHandle& be,
                          const PipelineConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    PredictionRecord pred;
    pred.instance_id = x.id;
    pred.method = Method::Thor;

    std::vector<std::string> answers;
    Conversation conv;
    for (int hop = 1; hop <= 3; ++hop) {
        conv = render_thor_hop(cfg.templates, x, hop, answers, cfg.render);
        const Completion completion =
            complete_step(be, conv, x.id, "hop-" + std::to_string(hop));
        answers.push_back(completion.text);

        ReasoningRecord rec;
        rec.aspect_answer = hop == 1 ? completion.text : "";
        rec.rationale = completion.text;
        rec.raw_response = completion.text;
        pred.records.push_back(std::move(rec));
    }

    LabeledConversation transcript{"thor", conv};
    transcript.messages.push_back(assistant_msg(answers.back()));
    const FinalLabel final =
        parse_final(be, cfg, conv, answers.back(), transcript, x.id, "hop-3");
    pred.final_polarity = final.label;
    pred.fallback_used = final.fallback_used;
    pred.parse_rule = final.rule;
    pred.transcripts.push_back(std::move(transcript));
    pred.wall_time_ms = elapsed_ms(started);
    return pred;
}

PredictionRecord run_drcr(const SentenceInstance& x, const BackendHandle& be,
                          const PipelineConfig& cfg, std::uint64_t seed) {
    const auto started = std::chrono::steady_clock::now();
    PredictionRecord pred;
    pred.instance_id = x.id;
    pred.method = Method::Drcr;
    pred.seed = seed;

    const Premise premise = cfg.fixed_premise ? asserted(*cfg.fixed_premise)
                                              : sample_hypothesis(seed, x.id);

    const Conversation conv1 =
        render_premise_prompt(cfg.templates, x, premise, false, cfg.render);
    const Completion c1 = complete_step(be, conv1, x.id, "1");
    LabeledConversation t1{"premise-1", conv1};
    t1.messages.push_back(assistant_msg(c1.text));
    pred.transcripts.push_back(std::move(t1));
    ReasoningRecord rec1 = make_record(premise, c1.text, x.id, "1");
    if (cfg.correction_enabled) {
        rec1 = run_correction_check(x, rec1, false, be, cfg, pred.transcripts, "1");
    }

    const Premise negated = negate_premise(premise);
    const Conversation conv2 =
        render_premise_prompt(cfg.templates, x, negated, true, cfg.render);
    const Completion c2 = complete_step(be, conv2, x.id, "2");
    LabeledConversation t2{"premise-2", conv2};
    t2.messages.push_back(assistant_msg(c2.text));
    pred.transcripts.push_back(std::move(t2));
    ReasoningRecord rec2 = make_record(negated, c2.text, x.id, "2");
    if (cfg.correction_enabled) {
        rec2 = run_correction_check(x, rec2, true, be, cfg, pred.transcripts, "2");
    }

    pred.records = {std::move(rec1), std::move(rec2)};
    const Conversation conv3 =
        render_contrast_prompt(cfg.templates, x, pred.records, cfg.render);
    const Completion c3 = complete_step(be, conv3, x.id, "3");
    pred.contrast_raw = c3.text;
    LabeledConversation t3{"contrast", conv3};
    t3.messages.push_back(assistant_msg(c3.text));

    const FinalLabel final = parse_final(be, cfg, conv3, c3.text, t3, x.id, "3");
    pred.final_polarity = final.label;
    pred.fallback_used = final.fallback_used;
    pred.parse_rule = final.rule;
    pred.transcripts.push_back(std::move(t3));
    pred.wall_time_ms = elapsed_ms(started);
    return pred;
}

PredictionRecord run_trcr(const SentenceInstance& x, const BackendHandle& be,
                          const PipelineConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    PredictionRecord pred;
    pred.instance_id = x.id;
    pred.method = Method::Trcr;

    for (int i = 0; i < 3; ++i) {
        const Premise premise = asserted(kAllPolarities[i]);
        const std::string step = std::to_string(i + 1);
        const Conversation conv =
            render_premise_prompt(cfg.templates, x, premise, true, cfg.render);
        const Completion completion = complete_step(be, conv, x.id, step);
        LabeledConversation t{"premise-" + step, conv};
        t.messages.push_back(assistant_msg(completion.text));
        pred.transcripts.push_back(std::move(t));
        ReasoningRecord rec = make_record(premise, completion.text, x.id, step);
        if (cfg.correction_enabled) {
            rec = run_correction_check(x, rec, true, be, cfg, pred.transcripts, step);
        }
        pred.records.push_back(std::move(rec));
    }

    const Conversation conv4 =
        render_contrast_prompt(cfg.templates, x, pred.records, cfg.render);
    const Completion c4 = complete_step(be, conv4, x.id, "4");
    pred.contrast_raw = c4.text;
    LabeledConversation t4{"contrast", conv4};
    t4.messages.push_back(assistant_msg(c4.text));

    const FinalLabel final = parse_final(be, cfg, conv4, c4.text, t4, x.id, "4");
    pred.final_polarity = final.label;
    pred.fallback_used = final.fallback_used;
    pred.parse_rule = final.rule;
    pred.transcripts.push_back(std::move(t4));
    pred.wall_time_ms = elapsed_ms(started);
    return pred;
}

ReasoningRecord run_correction_check(const SentenceInstance& x,
                                     const ReasoningRecord& record, bool isolate,
                                     const BackendHandle& be,
                                     const PipelineConfig& cfg,
                                     std::vector<LabeledConversation>& transcripts,
                                     const std::string& step_label) {
    const Conversation conv =
        render_correction_prompt(cfg.templates, record, cfg.render);
    const Completion completion =
        complete_step(be, conv, x.id, "correction-" + step_label);
    LabeledConversation t{"correction-" + step_label, conv};
    t.messages.push_back(assistant_msg(completion.text));
    transcripts.push_back(std::move(t));

    CorrectionResult result;
    const ParseOutcome outcome = extract_polarity(completion.text);
    result.re_inferred = outcome.polarity;
    result.consistent =
        outcome.polarity && premise_matches(*record.premise, *outcome.polarity);

    ReasoningRecord out = record;
    if (!result.consistent && cfg.correction_regenerate) {
        const std::string regen_step = "premise-" + step_label + "-regen";
        const Conversation regen =
            render_premise_prompt(cfg.templates, x, *record.premise, isolate,
                                  cfg.render);
        const Completion rc = complete_step(be, regen, x.id, regen_step);
        LabeledConversation rt{regen_step, regen};
        rt.messages.push_back(assistant_msg(rc.text));
        transcripts.push_back(std::move(rt));
        out = make_record(*record.premise, rc.text, x.id, step_label);
        result.regenerated = true;
    }
    out.correction = result;
    return out;
}

PredictionRecord run_instance(Method method, const SentenceInstance& x,
                              const BackendHandle& be, const PipelineConfig& cfg,
                              std::uint64_t seed) {
    switch (method) {
        case Method::Direct: return run_direct(x, be, cfg);
        case Method::Thor: return run_thor(x, be, cfg);
        case Method::Drcr: return run_drcr(x, be, cfg, seed);
        case Method::Trcr: return run_trcr(x, be, cfg);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown method");
}

RunArtifact run_dataset(const std::vector<SentenceInstance>& instances,
                        Method method, const BackendHandle& be,
                        const PipelineConfig& cfg, std::uint64_t seed,
                        int parallelism, const RunOptions& opts) {
    if (parallelism < 1) {
        throw Error(ErrorKind::InvalidArgument, "parallelism must be >= 1");
    }

    RunManifest manifest;
    manifest.method = std::string(to_string(method));
    manifest.seed = seed;
    manifest.config = opts.config_json;
    manifest.config_hash =
        sha256_hex(opts.config_json.is_null() ? "" : opts.config_json.dump());
    manifest.template_hash = cfg.templates.sha256();
    manifest.dataset_path = opts.dataset_path;
    manifest.dataset_hash = opts.dataset_hash;
    manifest.instance_count = static_cast<int>(instances.size());
    manifest.started_at = opts.deterministic_artifact ? kEpoch : now_utc();

    std::vector<std::optional<PredictionRecord>> results(instances.size());
    std::vector<InstanceFailure> failures;
    std::mutex failures_mu;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};

    const auto worker = [&] {
        for (;;) {
            if (stop.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= instances.size()) return;
            try {
                results[i] = run_instance(method, instances[i], be, cfg, seed);
            } catch (const std::exception& e) {
                const std::lock_guard<std::mutex> lock(failures_mu);
                failures.push_back({instances[i].id, e.what()});
                if (opts.fail_fast) stop.store(true);
            }
        }
    };

    const std::size_t n_threads = std::min<std::size_t>(
        static_cast<std::size_t>(parallelism), std::max<std::size_t>(instances.size(), 1));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::sort(failures.begin(), failures.end(),
              [](const InstanceFailure& a, const InstanceFailure& b) {
                  return a.instance_id < b.instance_id;
              });
    if (opts.fail_fast && !failures.empty()) {
        throw Error(ErrorKind::Pipeline,
                    "run aborted on instance " + failures.front().instance_id + ": " +
                        failures.front().error);
    }
    if (!instances.empty() &&
        static_cast<double>(failures.size()) >
            opts.failure_threshold * static_cast<double>(instances.size())) {
        char percent[32];
        std::snprintf(percent, sizeof percent, "%.0f%%", opts.failure_threshold * 100.0);
        throw Error(ErrorKind::Pipeline,
                    std::to_string(failures.size()) + " of " +
                        std::to_string(instances.size()) +
                        " instances failed, above the " + percent +
                        " threshold; first: " + failures.front().error);
    }

    RunArtifact artifact;
    for (auto& r : results) {
        if (r) artifact.predictions.push_back(std::move(*r));
    }
    std::sort(artifact.predictions.begin(), artifact.predictions.end(),
              [](const PredictionRecord& a, const PredictionRecord& b) {
                  return a.instance_id < b.instance_id;
              });
    if (opts.deterministic_artifact) {
        for (auto& p : artifact.predictions) p.wall_time_ms = 0.0;
    }
    manifest.prediction_count = static_cast<int>(artifact.predictions.size());
    manifest.failures = std::move(failures);
    manifest.finished_at = opts.deterministic_artifact ? kEpoch : now_utc();
    artifact.manifest = std::move(manifest);
    return artifact;
}

nlohmann::ordered_json run_manifest_to_json(const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["method"] = manifest.method;
    j["seed"] = manifest.seed;
    j["config_hash"] = manifest.config_hash;
    j["template_hash"] = manifest.template_hash;
    j["dataset_path"] = manifest.dataset_path;
    j["dataset_hash"] = manifest.dataset_hash;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["instance_count"] = manifest.instance_count;
    j["prediction_count"] = manifest.prediction_count;
    auto failures = nlohmann::ordered_json::array();
    for (const auto& f : manifest.failures) {
        failures.push_back({{"instance_id", f.instance_id}, {"error", f.error}});
    }
    j["failures"] = std::move(failures);
    j["config"] = manifest.config;
    return j;
}

RunManifest run_manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    m.method = j.at("method").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.template_hash = j.at("template_hash").get<std::string>();
    m.dataset_path = j.at("dataset_path").get<std::string>();
    m.dataset_hash = j.at("dataset_hash").get<std::string>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.instance_count = j.at("instance_count").get<int>();
    m.prediction_count = j.at("prediction_count").get<int>();
    for (const auto& f : j.at("failures")) {
        m.failures.push_back({f.at("instance_id").get<std::string>(),
                              f.at("error").get<std::string>()});
    }
    m.config = j.at("config");
    return m;
}

void write_run_artifact(const RunArtifact& artifact,
                        const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    }
    write_file_atomic(dir / "manifest.json",
                      run_manifest_to_json(artifact.manifest).dump(2) + "\n");

    std::string predictions, transcripts;
    for (const auto& p : artifact.predictions) {
        predictions += prediction_to_json(p).dump();
        predictions += '\n';
        transcripts += transcripts_to_json(p).dump();
        transcripts += '\n';
    }
    write_file_atomic(dir / "predictions.jsonl", predictions);
    write_file_atomic(dir / "transcripts.jsonl", transcripts);
}

RunArtifact load_run_artifact(const std::filesystem::path& dir) {
    RunArtifact artifact;
    try {
        artifact.manifest =
            run_manifest_from_json(nlohmann::json::parse(read_file(dir / "manifest.json")));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaViolation,
                    (dir / "manifest.json").string() + ": " + e.what());
    }

    std::map<std::string, std::vector<LabeledConversation>> transcripts;
    {
        std::istringstream lines(read_file(dir / "transcripts.jsonl"));
        std::string line;
        int line_no = 0;
        while (std::getline(lines, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                transcripts[j.at("instance_id").get<std::string>()] =
                    transcripts_from_json(j);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::SchemaViolation,
                            (dir / "transcripts.jsonl").string() + ":" +
                                std::to_string(line_no) + ": " + e.what());
            }
        }
    }

    std::istringstream lines(read_file(dir / "predictions.jsonl"));
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            PredictionRecord pred = prediction_from_json(nlohmann::json::parse(line));
            const auto found = transcripts.find(pred.instance_id);
            if (found != transcripts.end()) pred.transcripts = found->second;
            artifact.predictions.push_back(std::move(pred));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::SchemaViolation,
                        (dir / "predictions.jsonl").string() + ":" +
                            std::to_string(line_no) + ": " + e.what());
        }
    }
    return artifact;
}

std::optional<std::string> find_isolation_violation(
    const std::vector<LabeledConversation>& transcripts) {
    constexpr std::size_t kGram = 20;

    struct PremiseConv {
        const LabeledConversation* conv;
        std::string prompts;  // user/system contents, NUL-separated
        std::vector<const std::string*> responses;
    };
    std::vector<PremiseConv> premises;
    for (const auto& t : transcripts) {
        if (t.label.rfind("premise", 0) != 0) continue;
        PremiseConv pc{&t, "", {}};
        for (const auto& m : t.messages) {
            if (m.role == Role::Assistant) {
                pc.responses.push_back(&m.content);
            } else {
                pc.prompts += m.content;
                pc.prompts += '\0';
            }
        }
        premises.push_back(std::move(pc));
    }

    for (const auto& host : premises) {
        std::unordered_set<std::uint64_t> grams;
        if (host.prompts.size() >= kGram) {
            for (std::size_t i = 0; i + kGram <= host.prompts.size(); ++i) {
                grams.insert(fnv1a64({host.prompts.data() + i, kGram}));
            }
        }
        for (const auto& other : premises) {
            if (&other == &host) continue;
            for (const std::string* response : other.responses) {
                if (response->size() < kGram) continue;
                for (std::size_t i = 0; i + kGram <= response->size(); ++i) {
                    const std::string_view gram(response->data() + i, kGram);
                    if (grams.count(fnv1a64(gram)) != 0 &&
                        host.prompts.find(gram) != std::string::npos) {
                        return host.conv->label + " prompt contains " +
                               std::to_string(kGram) + " characters of " +
                               other.conv->label + " response: \"" +
                               std::string(gram) + "\"";
                    }
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace rcr
