#include <fstream>
#include <optional>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "rcr/error.hpp"
#include "rcr/label_parser.hpp"

#include "test_support.hpp"

using namespace rcr;

TEST_CASE("fallback policy names round-trip and reject unknowns") {
    for (FallbackPolicy p : {FallbackPolicy::NeutralDefault, FallbackPolicy::CountWrong,
                             FallbackPolicy::Retry}) {
        CHECK(fallback_policy_from_string(to_string(p)) == p);
    }
    CHECK(to_string(FallbackPolicy::NeutralDefault) == "neutral-default");
    CHECK_THROWS_AS(fallback_policy_from_string("ignore"), Error);
}

TEST_CASE("the parser corpus fixture holds, line by line") {
    std::ifstream in(test::fixture_dir() / "parser_corpus.jsonl");
    REQUIRE(in.good());
    std::string line;
    int entries = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++entries;
        const auto j = nlohmann::json::parse(line);
        const std::string text = j.at("text").get<std::string>();
        CAPTURE(text);

        const ParseOutcome outcome = extract_polarity(text);
        CHECK(outcome.rule_fired == j.at("rule").get<std::string>());
        if (j.at("expected").is_null()) {
            CHECK_FALSE(outcome.polarity.has_value());
            CHECK_FALSE(outcome.matched_span.has_value());
        } else {
            REQUIRE(outcome.polarity.has_value());
            CHECK(to_string(*outcome.polarity) == j.at("expected").get<std::string>());
            CHECK(outcome.matched_span.has_value());
        }
    }
    CHECK(entries >= 20);
}

TEST_CASE("the matched span points at the winning keyword") {
    const auto lone = extract_polarity("positive");
    REQUIRE(lone.matched_span.has_value());
    CHECK(lone.matched_span->first == 0);
    CHECK(lone.matched_span->second == 8);

    const auto offset = extract_polarity("a positive note");
    REQUIRE(offset.matched_span.has_value());
    CHECK(offset.matched_span->first == 2);
    CHECK(offset.matched_span->second == 10);

    const std::string text = "positive at first, neutral on reflection";
    const auto last = extract_polarity(text);
    REQUIRE(last.polarity.has_value());
    CHECK(*last.polarity == Polarity::Neutral);
    REQUIRE(last.matched_span.has_value());
    CHECK(text.substr(last.matched_span->first,
                      last.matched_span->second - last.matched_span->first) ==
          "neutral");
}

TEST_CASE("matching is case-insensitive but spans index the original text") {
    const std::string text = "Verdict: NEGATIVE";
    const auto outcome = extract_polarity(text);
    REQUIRE(outcome.polarity.has_value());
    CHECK(*outcome.polarity == Polarity::Negative);
    REQUIRE(outcome.matched_span.has_value());
    CHECK(text.substr(outcome.matched_span->first,
                      outcome.matched_span->second - outcome.matched_span->first) ==
          "NEGATIVE");
}

TEST_CASE("a negation survives intervening whitespace inside the window") {
    CHECK_FALSE(extract_polarity("not  positive").polarity.has_value());
    CHECK_FALSE(extract_polarity("non\tneutral").polarity.has_value());
}

TEST_CASE("a negated occurrence loses to a later clean one") {
    const auto outcome = extract_polarity("not positive, but the tone is positive");
    REQUIRE(outcome.polarity.has_value());
    CHECK(*outcome.polarity == Polarity::Positive);
}

TEST_CASE("parsed outcomes pass through every policy unchanged") {
    const ParseOutcome parsed = extract_polarity("clearly negative");
    for (FallbackPolicy p : {FallbackPolicy::NeutralDefault, FallbackPolicy::CountWrong,
                             FallbackPolicy::Retry}) {
        const Resolution r = resolve_unparseable(parsed, p);
        CHECK_FALSE(r.retry);
        CHECK(r.label == Polarity::Negative);
    }
}

TEST_CASE("unparseable outcomes resolve per policy") {
    const ParseOutcome empty = extract_polarity("no verdict here");
    REQUIRE_FALSE(empty.polarity.has_value());

    const Resolution d = resolve_unparseable(empty, FallbackPolicy::NeutralDefault);
    CHECK_FALSE(d.retry);
    CHECK(d.label == Polarity::Neutral);

    const Resolution w = resolve_unparseable(empty, FallbackPolicy::CountWrong);
    CHECK_FALSE(w.retry);
    CHECK_FALSE(w.label.has_value());

    const Resolution r = resolve_unparseable(empty, FallbackPolicy::Retry);
    CHECK(r.retry);
    CHECK_FALSE(r.label.has_value());
}
