#include "rcr/label_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "rcr/error.hpp"
#include "rcr/util.hpp"

namespace rcr {

std::string_view to_string(FallbackPolicy p) {
    switch (p) {
        case FallbackPolicy::NeutralDefault: return "neutral-default";
        case FallbackPolicy::CountWrong: return "count-wrong";
        case FallbackPolicy::Retry: return "retry";
    }
    return "retry";
}

FallbackPolicy fallback_policy_from_string(std::string_view s) {
    if (s == "neutral-default") return FallbackPolicy::NeutralDefault;
    if (s == "count-wrong") return FallbackPolicy::CountWrong;
    if (s == "retry") return FallbackPolicy::Retry;
    throw Error(ErrorKind::InvalidArgument,
                "unknown fallback policy \"" + std::string(s) + "\"");
}

namespace {

// Up to 4 non-whitespace characters immediately before `pos`, in text order.
std::string window_before(std::string_view lower, std::size_t pos) {
    std::string window;
    for (std::size_t i = pos; i > 0 && window.size() < 4;) {
        --i;
        if (!std::isspace(static_cast<unsigned char>(lower[i]))) {
            window += lower[i];
        }
    }
    std::reverse(window.begin(), window.end());
    return window;
}

bool negated(std::string_view window) {
    for (std::string_view neg : {"non", "not"}) {
        if (window.size() >= 3 && window.substr(window.size() - 3) == neg) return true;
        if (window.substr(0, 3) == neg) return true;
    }
    return false;
}

}  // namespace

ParseOutcome extract_polarity(std::string_view text) {
    static constexpr std::array<std::pair<std::string_view, Polarity>, 3> kKeywords = {{
        {"positive", Polarity::Positive},
        {"negative", Polarity::Negative},
        {"neutral", Polarity::Neutral},
    }};

    const std::string lower = to_lower(text);
    ParseOutcome outcome;
    outcome.rule_fired = "no-keyword";

    std::size_t best_pos = 0;
    bool found = false;
    for (const auto& [keyword, polarity] : kKeywords) {
        for (std::size_t pos = lower.find(keyword); pos != std::string::npos;
             pos = lower.find(keyword, pos + 1)) {
            if (negated(window_before(lower, pos))) continue;
            if (!found || pos > best_pos) {
                found = true;
                best_pos = pos;
                outcome.polarity = polarity;
                outcome.matched_span = {pos, pos + keyword.size()};
            }
        }
    }
    if (found) outcome.rule_fired = "last-keyword";
    return outcome;
}

Resolution resolve_unparseable(const ParseOutcome& outcome, FallbackPolicy policy) {
    if (outcome.polarity) return {false, outcome.polarity};
    switch (policy) {
        case FallbackPolicy::NeutralDefault: return {false, Polarity::Neutral};
        case FallbackPolicy::CountWrong: return {false, std::nullopt};
        case FallbackPolicy::Retry: return {true, std::nullopt};
    }
    return {false, Polarity::Neutral};
}

}  // namespace rcr
