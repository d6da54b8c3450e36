#include "rcr/run_config.hpp"

#include <memory>
#include <utility>

#include "rcr/cache.hpp"
#include "rcr/dataset.hpp"
#include "rcr/error.hpp"
#include "rcr/prompts.hpp"
#include "rcr/sha256.hpp"
#include "rcr/util.hpp"

namespace rcr {

void RunConfig::validate() const {
    if (dataset_path.empty()) {
        throw Error(ErrorKind::InvalidArgument, "dataset path must not be empty");
    }
    if (parallelism < 1) {
        throw Error(ErrorKind::InvalidArgument, "parallelism must be >= 1");
    }
    if (failure_threshold < 0.0 || failure_threshold > 1.0) {
        throw Error(ErrorKind::InvalidArgument,
                    "failure threshold must be within [0, 1]");
    }
    if (correction_regenerate && !correction_enabled) {
        throw Error(ErrorKind::InvalidArgument,
                    "correction.regenerate requires correction.enabled");
    }
    if (scripted_path.empty()) rcr::validate(backend);
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["method"] = std::string(to_string(cfg.method));
    j["seed"] = cfg.seed;
    j["dataset"] = cfg.dataset_path;
    j["backend"] = backend_config_to_json(cfg.backend);
    j["scripted"] = cfg.scripted_path;
    j["template_path"] = cfg.template_path;
    j["parser_policy"] = std::string(to_string(cfg.parser_policy));
    j["correction"] = {{"enabled", cfg.correction_enabled},
                       {"regenerate", cfg.correction_regenerate}};
    j["render"] = {{"enumerate_negation", cfg.enumerate_negation},
                   {"inject_aspect", cfg.inject_aspect}};
    j["fixed_premise"] = cfg.fixed_premise
                             ? nlohmann::ordered_json(std::string(to_string(*cfg.fixed_premise)))
                             : nlohmann::ordered_json(nullptr);
    j["parallelism"] = cfg.parallelism;
    j["output_dir"] = cfg.output_dir;
    j["cache_dir"] = cfg.cache_dir;
    j["fail_fast"] = cfg.fail_fast;
    j["failure_threshold"] = cfg.failure_threshold;
    return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    try {
        cfg.method = method_from_string(j.at("method").get<std::string>());
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.dataset_path = j.at("dataset").get<std::string>();
        if (j.contains("backend") && !j.at("backend").is_null()) {
            cfg.backend = backend_config_from_json(j.at("backend"));
        }
        cfg.scripted_path = j.value("scripted", std::string{});
        cfg.template_path = j.value("template_path", std::string{});
        cfg.parser_policy =
            fallback_policy_from_string(j.value("parser_policy", std::string{"retry"}));
        if (j.contains("correction")) {
            const auto& c = j.at("correction");
            cfg.correction_enabled = c.value("enabled", false);
            cfg.correction_regenerate = c.value("regenerate", false);
        }
        if (j.contains("render")) {
            const auto& r = j.at("render");
            cfg.enumerate_negation = r.value("enumerate_negation", false);
            cfg.inject_aspect = r.value("inject_aspect", false);
        }
        if (j.contains("fixed_premise") && !j.at("fixed_premise").is_null()) {
            cfg.fixed_premise =
                polarity_from_string(j.at("fixed_premise").get<std::string>());
        }
        cfg.parallelism = j.value("parallelism", 1);
        cfg.output_dir = j.value("output_dir", std::string{});
        cfg.cache_dir = j.value("cache_dir", std::string{});
        cfg.fail_fast = j.value("fail_fast", false);
        cfg.failure_threshold = j.value("failure_threshold", 0.1);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaViolation,
                    std::string("bad run config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, file.string() + ": " + e.what());
    }
    return run_config_from_json(j);
}

nlohmann::ordered_json run_config_manifest_json(const RunConfig& cfg) {
    nlohmann::ordered_json j = run_config_to_json(cfg);
    j.erase("parallelism");
    j.erase("output_dir");
    j.erase("cache_dir");
    j.erase("fail_fast");
    j.erase("failure_threshold");
    return j;
}

RunConfig run_config_from_manifest(const std::filesystem::path& file) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(file));
        if (!j.contains("config") || !j.at("config").is_object()) {
            throw Error(ErrorKind::SchemaViolation,
                        file.string() + ": manifest has no embedded config");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, file.string() + ": " + e.what());
    }
    return run_config_from_json(j.at("config"));
}

RunArtifact execute_run(const RunConfig& cfg) {
    cfg.validate();

    TemplateSet templates = cfg.template_path.empty()
                                ? TemplateSet::builtin()
                                : TemplateSet::load_file(cfg.template_path);

    std::filesystem::path dataset_file = cfg.dataset_path;
    if (std::filesystem::is_directory(dataset_file)) {
        dataset_file /= "instances.jsonl";
    }
    const std::vector<SentenceInstance> instances = load_normalized(dataset_file);
    const std::string dataset_hash = sha256_file_hex(dataset_file);

    std::unique_ptr<Backend> backend;
    if (!cfg.scripted_path.empty()) {
        backend = std::make_unique<ScriptedBackend>(
            ScriptedBackend::load(cfg.scripted_path));
    } else {
        backend = std::make_unique<HttpBackend>(cfg.backend);
    }

    std::optional<ResponseCache> cache;
    if (!cfg.cache_dir.empty()) cache.emplace(cfg.cache_dir);

    PipelineConfig pipeline;
    pipeline.templates = std::move(templates);
    pipeline.render = RenderOptions{cfg.enumerate_negation, cfg.inject_aspect};
    pipeline.policy = cfg.parser_policy;
    pipeline.correction_enabled = cfg.correction_enabled;
    pipeline.correction_regenerate = cfg.correction_regenerate;
    pipeline.fixed_premise = cfg.fixed_premise;

    RunOptions opts;
    opts.fail_fast = cfg.fail_fast;
    opts.failure_threshold = cfg.failure_threshold;
    opts.deterministic_artifact = backend->deterministic();
    opts.config_json = run_config_manifest_json(cfg);
    opts.dataset_path = cfg.dataset_path;
    opts.dataset_hash = dataset_hash;

    const BackendHandle handle{*backend, cfg.backend,
                               cache ? &*cache : nullptr};
    RunArtifact artifact = run_dataset(instances, cfg.method, handle, pipeline,
                                       cfg.seed, cfg.parallelism, opts);
    if (!cfg.output_dir.empty()) write_run_artifact(artifact, cfg.output_dir);
    return artifact;
}

}  // namespace rcr
