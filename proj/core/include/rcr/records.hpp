#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcr/domain.hpp"
#include "rcr/prompts.hpp"

namespace rcr {

enum class Method { Direct, Thor, Drcr, Trcr };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

// Outcome of the inference-correction probe: the polarity re-inferred from a
// record's own aspect answer and rationale, and whether it matches the
// record's premise. re_inferred is empty when the probe answer was
// unparseable (consistent is then false).
struct CorrectionResult {
    std::optional<Polarity> re_inferred;
    bool consistent = false;
    bool regenerated = false;
};

// One premise conversation's distilled result. For the three-hop baseline
// there is no premise; each hop still produces a record so transcripts and
// artifacts stay uniform across methods.
struct ReasoningRecord {
    std::optional<Premise> premise;
    std::string aspect_answer;
    std::string rationale;
    std::string raw_response;
    std::optional<CorrectionResult> correction;
};

// A full conversation as sent and answered, tagged with the pipeline step
// that produced it (e.g. "premise-1", "contrast", "thor").
struct LabeledConversation {
    std::string label;
    Conversation messages;
};

struct PredictionRecord {
    std::string instance_id;
    Method method = Method::Direct;
    std::uint64_t seed = 0;
    std::vector<ReasoningRecord> records;
    std::optional<std::string> contrast_raw;
    // Concrete under every fallback policy except count-wrong, whose sentinel
    // (empty) the evaluator scores as wrong for any gold label.
    std::optional<Polarity> final_polarity;
    bool fallback_used = false;
    std::string parse_rule;
    std::vector<LabeledConversation> transcripts;
    double wall_time_ms = 0.0;
};

// Splits a premise response on the leading enumerators "1)" and "2)" into
// (aspect answer, rationale). Without enumerators the whole response is the
// rationale and the first sentence stands in as the aspect answer.
std::pair<std::string, std::string> split_premise_response(std::string_view raw);

nlohmann::json conversation_to_json(const Conversation& conv);
Conversation conversation_from_json(const nlohmann::json& j);

nlohmann::ordered_json prediction_to_json(const PredictionRecord& rec);
PredictionRecord prediction_from_json(const nlohmann::json& j);

// Transcript line for transcripts.jsonl; predictions.jsonl carries everything
// else. load side re-attaches conversations to records by instance_id.
nlohmann::ordered_json transcripts_to_json(const PredictionRecord& rec);
std::vector<LabeledConversation> transcripts_from_json(const nlohmann::json& j);

}  // namespace rcr
