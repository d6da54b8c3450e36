#include "rcr/reference_scores.hpp"

#include "rcr/error.hpp"

namespace rcr {

std::string_view to_string(Setting s) {
    return s == Setting::ZeroShot ? "zero-shot" : "fine-tuned";
}

Setting setting_from_string(std::string_view s) {
    if (s == "zero-shot") return Setting::ZeroShot;
    if (s == "fine-tuned") return Setting::FineTuned;
    throw Error(ErrorKind::InvalidArgument,
                "unknown setting \"" + std::string(s) + "\"");
}

const std::vector<ReferenceRow>& reference_table(Setting setting) {
    static const std::vector<ReferenceRow> zero_shot = {
        {"flan-t5-base", "thor", 51.06, 27.55, 53.32, 36.36},
        {"flan-t5-base", "drcr", 55.29, 31.83, 57.94, 39.25},
        {"flan-t5-base", "trcr", 55.98, 32.64, 58.31, 40.03},
        {"flan-t5-large", "thor", 52.08, 32.16, 55.02, 38.77},
        {"flan-t5-large", "drcr", 57.06, 37.14, 59.63, 42.36},
        {"flan-t5-large", "trcr", 58.43, 38.89, 61.13, 43.85},
        {"flan-t5-xxl", "thor", 56.57, 39.34, 62.75, 44.16},
        {"flan-t5-xxl", "drcr", 62.26, 44.42, 65.34, 49.27},
        {"flan-t5-xxl", "trcr", 64.55, 45.87, 67.29, 50.97},
        {"gpt-3.5", "thor", 71.43, 68.81, 76.76, 71.90},
        {"gpt-3.5", "drcr", 76.32, 72.13, 80.73, 75.68},
        {"gpt-3.5", "trcr", 77.65, 73.41, 81.74, 76.82},
        {"bert-spc", "", 21.76, 19.48, 25.34, 17.71},
        {"bert-asp-scapt", "", 30.02, 25.49, 25.77, 13.70},
    };
    static const std::vector<ReferenceRow> fine_tuned = {
        {"flan-t5-base", "thor", 73.45, 63.24, 77.68, 68.18},
        {"flan-t5-base", "drcr", 75.14, 65.75, 79.73, 70.86},
        {"flan-t5-base", "trcr", 75.83, 65.84, 80.95, 71.51},
        {"flan-t5-large", "thor", 74.80, 64.56, 79.02, 69.76},
        {"flan-t5-large", "drcr", 76.48, 66.35, 80.55, 71.48},
        {"flan-t5-large", "trcr", 77.15, 67.68, 81.59, 72.02},
        {"flan-t5-xxl", "thor", 79.89, 77.32, 83.25, 74.53},
        {"flan-t5-xxl", "drcr", 82.91, 79.64, 85.19, 77.08},
        {"flan-t5-xxl", "trcr", 83.29, 80.44, 85.81, 78.34},
        {"gpt-3.5", "thor", 78.11, 75.93, 82.72, 74.79},
        {"gpt-3.5", "drcr", 79.26, 77.06, 85.88, 76.95},
        {"gpt-3.5", "trcr", 79.96, 78.51, 86.25, 77.27},
        {"bert-isaiv", "", 77.25, 78.29, 81.40, 69.66},
        {"bert-asp-scapt", "", 79.15, 77.59, 83.79, 72.28},
    };
    return setting == Setting::ZeroShot ? zero_shot : fine_tuned;
}

std::optional<double> reference_score(Setting setting, std::string_view model,
                                      std::string_view method,
                                      std::string_view dataset,
                                      std::string_view slice) {
    for (const auto& row : reference_table(setting)) {
        if (row.model != model || row.method != method) continue;
        if (dataset == "laptop") {
            if (slice == "all") return row.laptop_all;
            if (slice == "isa") return row.laptop_isa;
        } else if (dataset == "restaurant") {
            if (slice == "all") return row.restaurant_all;
            if (slice == "isa") return row.restaurant_isa;
        }
        return std::nullopt;
    }
    return std::nullopt;
}

namespace {

MethodScores to_method_scores(Setting setting, const ReferenceRow& row) {
    MethodScores scores;
    scores.label = std::string("reference-") + std::string(to_string(setting));
    scores.model = row.model;
    scores.method = row.method;
    scores.laptop = {{"all", row.laptop_all}, {"isa", row.laptop_isa}};
    scores.restaurant = {{"all", row.restaurant_all}, {"isa", row.restaurant_isa}};
    return scores;
}

}  // namespace

std::optional<MethodScores> reference_method_scores(Setting setting,
                                                    std::string_view model,
                                                    std::string_view method) {
    for (const auto& row : reference_table(setting)) {
        if (row.model == model && row.method == method) {
            return to_method_scores(setting, row);
        }
    }
    return std::nullopt;
}

std::vector<MethodScores> reference_as_rows(Setting setting) {
    std::vector<MethodScores> rows;
    for (const auto& row : reference_table(setting)) {
        rows.push_back(to_method_scores(setting, row));
    }
    return rows;
}

}  // namespace rcr
