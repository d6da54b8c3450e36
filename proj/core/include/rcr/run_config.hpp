#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rcr/backend.hpp"
#include "rcr/domain.hpp"
#include "rcr/label_parser.hpp"
#include "rcr/pipelines.hpp"
#include "rcr/records.hpp"

namespace rcr {

// Everything needed to execute a run. Serialized to JSON config files and,
// minus execution knobs, into run manifests.
struct RunConfig {
    Method method = Method::Drcr;
    BackendConfig backend;
    std::string scripted_path;  // non-empty selects the replay backend
    std::string template_path;  // empty keeps the builtin templates
    std::uint64_t seed = 0;
    int parallelism = 1;
    bool correction_enabled = false;
    bool correction_regenerate = false;
    FallbackPolicy parser_policy = FallbackPolicy::Retry;
    bool enumerate_negation = false;
    bool inject_aspect = false;
    std::optional<Polarity> fixed_premise;
    std::string dataset_path;  // instances.jsonl or a directory holding one
    std::string output_dir;    // empty skips writing the artifact
    std::string cache_dir;     // empty disables the response cache
    bool fail_fast = false;
    double failure_threshold = 0.1;

    void validate() const;
};

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& file);

// The result-affecting subset embedded in run manifests. Execution knobs
// (parallelism, output directory, cache location, failure handling) do not
// change what a run produces, so they are left out to keep artifact bytes
// independent of them.
nlohmann::ordered_json run_config_manifest_json(const RunConfig& cfg);

// Rebuilds a config from a previously written manifest.json so the run can
// be re-executed as recorded.
RunConfig run_config_from_manifest(const std::filesystem::path& file);

// Loads the dataset, builds the backend and cache, runs the pipeline, and
// writes the artifact to cfg.output_dir when set.
RunArtifact execute_run(const RunConfig& cfg);

}  // namespace rcr
