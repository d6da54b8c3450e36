#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcr/backend.hpp"
#include "rcr/cache.hpp"
#include "rcr/domain.hpp"
#include "rcr/label_parser.hpp"
#include "rcr/prompts.hpp"
#include "rcr/records.hpp"

namespace rcr {

// Completion source for pipelines: a backend, its config (for cache keys),
// and an optional response cache.
struct BackendHandle {
    Backend& backend;
    const BackendConfig& config;
    ResponseCache* cache = nullptr;
};

Completion pipeline_complete(const BackendHandle& be, const Conversation& conv);

struct PipelineConfig {
    TemplateSet templates = TemplateSet::builtin();
    RenderOptions render;
    FallbackPolicy policy = FallbackPolicy::Retry;
    bool correction_enabled = false;
    bool correction_regenerate = false;
    // Overrides the sampled hypothesis with a fixed one (the worked examples
    // always open with "positive"; sampling is the default).
    std::optional<Polarity> fixed_premise;
};

PredictionRecord run_direct(const SentenceInstance& x, const BackendHandle& be,
                            const PipelineConfig& cfg);

// Three completions in one growing conversation: aspect, implicit opinion,
// polarity. Prior answers enter later hops as assistant turns.
PredictionRecord run_thor(const SentenceInstance& x, const BackendHandle& be,
                          const PipelineConfig& cfg);

// Premise conversation for the sampled hypothesis, a second isolated one for
// its negation, then a fresh contrast conversation over both records.
PredictionRecord run_drcr(const SentenceInstance& x, const BackendHandle& be,
                          const PipelineConfig& cfg, std::uint64_t seed);

// Three isolated premise conversations (positive, negative, neutral in that
// order), then a contrast conversation over all three records.
PredictionRecord run_trcr(const SentenceInstance& x, const BackendHandle& be,
                          const PipelineConfig& cfg);

// Re-infers the polarity from the record's own aspect answer and rationale
// and marks whether it matches the premise. When regeneration is enabled and
// the check fails, the premise prompt is re-issued once and the regenerated
// record is kept, with the original verdict attached and the retry visible
// in the transcripts.
ReasoningRecord run_correction_check(const SentenceInstance& x,
                                     const ReasoningRecord& record, bool isolate,
                                     const BackendHandle& be,
                                     const PipelineConfig& cfg,
                                     std::vector<LabeledConversation>& transcripts,
                                     const std::string& step_label);

PredictionRecord run_instance(Method method, const SentenceInstance& x,
                              const BackendHandle& be, const PipelineConfig& cfg,
                              std::uint64_t seed);

struct InstanceFailure {
    std::string instance_id;
    std::string error;
};

struct RunManifest {
    std::string method;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string template_hash;
    std::string dataset_path;
    std::string dataset_hash;
    std::string started_at;
    std::string finished_at;
    int instance_count = 0;
    int prediction_count = 0;
    std::vector<InstanceFailure> failures;
    // full credential-free run configuration; enough to re-execute the run
    nlohmann::ordered_json config;
};

nlohmann::ordered_json run_manifest_to_json(const RunManifest& manifest);
RunManifest run_manifest_from_json(const nlohmann::json& j);

struct RunArtifact {
    RunManifest manifest;
    std::vector<PredictionRecord> predictions;  // sorted by instance_id
};

struct RunOptions {
    bool fail_fast = false;
    // fraction of instances allowed to fail before the whole run errors
    double failure_threshold = 0.1;
    // zero wall times and pin timestamps to the epoch, so replayed runs are
    // byte-identical
    bool deterministic_artifact = false;
    nlohmann::ordered_json config_json;
    std::string dataset_path;
    std::string dataset_hash;
};

// Runs the chosen pipeline over all instances with at most `parallelism`
// concurrent instances. Per-instance failures are recorded and skipped
// unless fail_fast is set; the run errors when failures exceed the
// threshold. Predictions and failures are ordered by instance_id, never by
// completion order.
RunArtifact run_dataset(const std::vector<SentenceInstance>& instances,
                        Method method, const BackendHandle& be,
                        const PipelineConfig& cfg, std::uint64_t seed,
                        int parallelism, const RunOptions& opts = {});

// manifest.json + predictions.jsonl + transcripts.jsonl in dir.
void write_run_artifact(const RunArtifact& artifact,
                        const std::filesystem::path& dir);
RunArtifact load_run_artifact(const std::filesystem::path& dir);

// Scans one instance's transcripts for a prompt of any premise conversation
// containing a 20+ character substring of another premise conversation's
// response. Empty result means the conversations stayed isolated.
std::optional<std::string> find_isolation_violation(
    const std::vector<LabeledConversation>& transcripts);

}  // namespace rcr
