#include <string>

#include <doctest.h>

#include "rcr/domain.hpp"
#include "rcr/error.hpp"
#include "rcr/records.hpp"

using namespace rcr;

namespace {

PredictionRecord full_prediction() {
    PredictionRecord rec;
    rec.instance_id = "lap-9#1";
    rec.method = Method::Drcr;
    rec.seed = 7;

    ReasoningRecord r1;
    r1.premise = asserted(Polarity::Positive);
    r1.aspect_answer = "The hinge.";
    r1.rationale = "A stiff hinge reads as sturdy build quality.";
    r1.raw_response = "1) The hinge. 2) A stiff hinge reads as sturdy build quality.";
    r1.correction = CorrectionResult{Polarity::Positive, true, false};

    ReasoningRecord r2;
    r2.premise = negate_premise(asserted(Polarity::Positive));
    r2.aspect_answer = "The hinge.";
    r2.rationale = "A hinge that loosens over time would disappoint.";
    r2.raw_response = "1) The hinge. 2) A hinge that loosens over time would disappoint.";
    r2.correction = CorrectionResult{std::nullopt, false, true};

    rec.records = {r1, r2};
    rec.contrast_raw = "The first inference fits; the polarity is positive.";
    rec.final_polarity = Polarity::Positive;
    rec.fallback_used = false;
    rec.parse_rule = "last-keyword";
    rec.transcripts = {{"premise-1", {user_msg("q1"), assistant_msg("a1")}},
                       {"contrast", {user_msg("q2"), assistant_msg("a2")}}};
    rec.wall_time_ms = 12.5;
    return rec;
}

bool same_record(const ReasoningRecord& a, const ReasoningRecord& b) {
    if (a.premise.has_value() != b.premise.has_value()) return false;
    if (a.premise && !(*a.premise == *b.premise)) return false;
    if (a.aspect_answer != b.aspect_answer) return false;
    if (a.rationale != b.rationale) return false;
    if (a.raw_response != b.raw_response) return false;
    if (a.correction.has_value() != b.correction.has_value()) return false;
    if (a.correction) {
        if (a.correction->re_inferred != b.correction->re_inferred) return false;
        if (a.correction->consistent != b.correction->consistent) return false;
        if (a.correction->regenerated != b.correction->regenerated) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("method names round-trip and reject unknowns") {
    for (Method m : {Method::Direct, Method::Thor, Method::Drcr, Method::Trcr}) {
        CHECK(method_from_string(to_string(m)) == m);
    }
    CHECK(to_string(Method::Drcr) == "drcr");
    CHECK_THROWS_AS(method_from_string("cot"), Error);
}

TEST_CASE("premise responses split on the numbered enumerators") {
    const auto [aspect, rationale] = split_premise_response(
        "1) The battery. 2) Long battery life carries the praise.");
    CHECK(aspect == "The battery.");
    CHECK(rationale == "Long battery life carries the praise.");
}

TEST_CASE("split tolerates prose around the enumerators") {
    const auto [aspect, rationale] = split_premise_response(
        "Sure. 1) The keyboard, clearly. 2) Typing feel decides the verdict here.");
    CHECK(aspect == "The keyboard, clearly.");
    CHECK(rationale == "Typing feel decides the verdict here.");
}

TEST_CASE("responses without enumerators fall back to the first sentence") {
    const auto [aspect, rationale] = split_premise_response(
        "The fan noise dominates. Everything else is secondary.");
    CHECK(aspect == "The fan noise dominates");
    CHECK(rationale == "The fan noise dominates. Everything else is secondary.");
}

TEST_CASE("a lone sentence without punctuation stands in for both parts") {
    const auto [aspect, rationale] = split_premise_response("just the fan");
    CHECK(aspect == "just the fan");
    CHECK(rationale == "just the fan");
}

TEST_CASE("a leading enumerator without a second one falls back whole") {
    const auto [aspect, rationale] =
        split_premise_response("1) The fan is the aspect, nothing more to add");
    CHECK(aspect == "1) The fan is the aspect, nothing more to add");
    CHECK(rationale == "1) The fan is the aspect, nothing more to add");
}

TEST_CASE("conversations round-trip through JSON with roles intact") {
    Conversation conv{PromptMessage{Role::System, "setup"}, user_msg("ask"),
                      assistant_msg("answer")};
    const Conversation back = conversation_from_json(conversation_to_json(conv));
    REQUIRE(back.size() == 3);
    CHECK(back[0] == conv[0]);
    CHECK(back[1] == conv[1]);
    CHECK(back[2] == conv[2]);

    nlohmann::json bad = nlohmann::json::array();
    bad.push_back({{"role", "narrator"}, {"content", "x"}});
    CHECK_THROWS_AS(conversation_from_json(bad), Error);
}

TEST_CASE("predictions round-trip through JSON with every optional populated") {
    const PredictionRecord rec = full_prediction();
    const PredictionRecord back = prediction_from_json(prediction_to_json(rec));

    CHECK(back.instance_id == rec.instance_id);
    CHECK(back.method == rec.method);
    CHECK(back.seed == rec.seed);
    REQUIRE(back.records.size() == 2);
    CHECK(same_record(back.records[0], rec.records[0]));
    CHECK(same_record(back.records[1], rec.records[1]));
    CHECK(back.contrast_raw == rec.contrast_raw);
    CHECK(back.final_polarity == rec.final_polarity);
    CHECK(back.fallback_used == rec.fallback_used);
    CHECK(back.parse_rule == rec.parse_rule);
    CHECK(back.wall_time_ms == rec.wall_time_ms);
    CHECK(back.transcripts.empty());
}

TEST_CASE("predictions serialize absent optionals as nulls and read them back") {
    PredictionRecord rec;
    rec.instance_id = "r-3#0";
    rec.method = Method::Direct;
    rec.parse_rule = "no-keyword";
    rec.fallback_used = true;

    ReasoningRecord bare;
    bare.aspect_answer = "The menu.";
    bare.rationale = "Listing tea varieties states a fact.";
    bare.raw_response = bare.rationale;
    rec.records = {bare};

    const auto j = prediction_to_json(rec);
    CHECK(j["contrast_raw"].is_null());
    CHECK(j["final_polarity"].is_null());
    CHECK(j["records"][0]["premise"].is_null());
    CHECK(j["records"][0]["correction"].is_null());

    const PredictionRecord back = prediction_from_json(j);
    CHECK_FALSE(back.contrast_raw.has_value());
    CHECK_FALSE(back.final_polarity.has_value());
    REQUIRE(back.records.size() == 1);
    CHECK_FALSE(back.records[0].premise.has_value());
    CHECK_FALSE(back.records[0].correction.has_value());
}

TEST_CASE("transcript lines carry the instance id and labeled conversations") {
    const PredictionRecord rec = full_prediction();
    const auto j = transcripts_to_json(rec);
    CHECK(j["instance_id"] == "lap-9#1");
    REQUIRE(j["conversations"].size() == 2);
    CHECK(j["conversations"][0]["label"] == "premise-1");

    const auto back = transcripts_from_json(j);
    REQUIRE(back.size() == 2);
    CHECK(back[0].label == "premise-1");
    CHECK(back[0].messages == rec.transcripts[0].messages);
    CHECK(back[1].label == "contrast");
}
