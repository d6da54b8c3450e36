#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "rcr/domain.hpp"

namespace rcr {

enum class FallbackPolicy { NeutralDefault, CountWrong, Retry };

std::string_view to_string(FallbackPolicy p);
FallbackPolicy fallback_policy_from_string(std::string_view s);

struct ParseOutcome {
    std::optional<Polarity> polarity;  // empty when no usable keyword was found
    // Half-open [begin, end) character range of the winning keyword.
    std::optional<std::pair<std::size_t, std::size_t>> matched_span;
    std::string rule_fired;
};

// Case-insensitive scan for "positive" / "negative" / "neutral". An
// occurrence whose 4 preceding non-whitespace characters carry "non" or
// "not" is treated as negated and skipped; the last surviving occurrence
// wins. Heuristic, so the fired rule travels with the outcome for auditing.
ParseOutcome extract_polarity(std::string_view text);

struct Resolution {
    bool retry = false;               // re-ask once with a clarification turn
    std::optional<Polarity> label;    // empty = scored as wrong for any gold
};

// Applies the fallback policy. Parsed outcomes pass through unchanged;
// Retry resolutions that stay unparseable fall back to Neutral.
Resolution resolve_unparseable(const ParseOutcome& outcome, FallbackPolicy policy);

}  // namespace rcr
