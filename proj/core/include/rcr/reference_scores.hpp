#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcr/eval.hpp"

namespace rcr {

enum class Setting { ZeroShot, FineTuned };

std::string_view to_string(Setting s);
Setting setting_from_string(std::string_view s);

// One published result row: a model/method pair with its four percent
// scores. Baseline rows (the BERT variants) carry an empty method.
struct ReferenceRow {
    std::string model;
    std::string method;
    double laptop_all = 0.0;
    double laptop_isa = 0.0;
    double restaurant_all = 0.0;
    double restaurant_isa = 0.0;
};

// The published comparison tables, as labeled constants for side-by-side
// report rendering. Reference only; never asserted against live runs.
const std::vector<ReferenceRow>& reference_table(Setting setting);

std::optional<double> reference_score(Setting setting, std::string_view model,
                                      std::string_view method,
                                      std::string_view dataset,
                                      std::string_view slice);

// Finds a row and repackages it as MethodScores (ALL and ISA slices).
std::optional<MethodScores> reference_method_scores(Setting setting,
                                                    std::string_view model,
                                                    std::string_view method);

std::vector<MethodScores> reference_as_rows(Setting setting);

}  // namespace rcr
