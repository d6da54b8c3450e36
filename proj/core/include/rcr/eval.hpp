#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcr/domain.hpp"
#include "rcr/records.hpp"

namespace rcr {

int polarity_index(Polarity p);  // fixed order Positive, Negative, Neutral

// Gold on rows, predicted on columns. Predictions absent under the
// count-wrong policy land in `invalid`, bucketed by gold class, so they
// deny recall credit without crediting any predicted class.
struct ConfusionMatrix {
    std::array<std::array<long long, 3>, 3> counts{};
    std::array<long long, 3> invalid{};

    long long total() const;
};

using GoldPred = std::pair<Polarity, std::optional<Polarity>>;

ConfusionMatrix confusion_matrix(const std::vector<GoldPred>& pairs);

// Unweighted mean of per-class F1. A class appearing in neither gold nor
// predictions is excluded from the mean; one that appears but earns no true
// positives contributes 0. Throws on an empty matrix.
double macro_f1(const ConfusionMatrix& cm);

struct SliceResult {
    std::optional<double> macro_f1;  // empty when the slice holds no instances
    ConfusionMatrix confusion;
    long long n = 0;
};

struct EvalReport {
    std::string method;
    std::string run_manifest_hash;
    std::string metric;
    std::map<std::string, SliceResult> slices;  // "ALL", "ISA", "ESA"
};

// Scores predictions against gold labels and splits by the implicit flag
// (ISA = implicit, ESA = explicit). Every prediction must resolve to a known
// instance, one prediction per instance.
EvalReport slice_report(const std::vector<PredictionRecord>& predictions,
                        const std::vector<SentenceInstance>& dataset,
                        std::string run_manifest_hash);

nlohmann::ordered_json eval_report_to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);
std::string render_eval_report(const EvalReport& report);

// Averaged two-dataset improvement [(a1-b1) + (a2-b2)] / 2 over percent
// scores. Inputs are snapped to integer hundredths first so the published
// two-decimal scores subtract without floating-point residue.
double improvement_delta(std::pair<double, double> a, std::pair<double, double> b);

double round_half_up_2dp(double x);
std::string format_2dp(double x);

// Percent scores for one method on the two benchmark domains, as produced
// by the report command and consumed by the delta command.
struct MethodScores {
    std::string label;
    std::string model;
    std::string method;
    // slice key ("all", "isa", "esa") -> percent score
    std::map<std::string, double> laptop;
    std::map<std::string, double> restaurant;
};

nlohmann::ordered_json method_scores_to_json(const MethodScores& scores);
MethodScores method_scores_from_json(const nlohmann::json& j);

// Aligned text table, one row per MethodScores, Laptop/Restaurant ALL and
// ISA columns.
std::string render_score_rows(const std::vector<MethodScores>& rows);

}  // namespace rcr
