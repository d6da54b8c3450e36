#include "rcr/records.hpp"

#include "rcr/error.hpp"
#include "rcr/util.hpp"

namespace rcr {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::Direct: return "direct";
        case Method::Thor: return "thor";
        case Method::Drcr: return "drcr";
        case Method::Trcr: return "trcr";
    }
    return "direct";
}

Method method_from_string(std::string_view s) {
    if (s == "direct") return Method::Direct;
    if (s == "thor") return Method::Thor;
    if (s == "drcr") return Method::Drcr;
    if (s == "trcr") return Method::Trcr;
    throw Error(ErrorKind::InvalidArgument,
                "unknown method \"" + std::string(s) + "\"");
}

namespace {

std::string first_sentence(std::string_view text) {
    const auto end = text.find_first_of(".!?");
    return trim(end == std::string_view::npos ? text : text.substr(0, end));
}

}  // namespace

std::pair<std::string, std::string> split_premise_response(std::string_view raw) {
    const auto one = raw.find("1)");
    if (one != std::string_view::npos) {
        const auto two = raw.find("2)", one + 2);
        if (two != std::string_view::npos) {
            return {trim(raw.substr(one + 2, two - one - 2)),
                    trim(raw.substr(two + 2))};
        }
    }
    return {first_sentence(raw), trim(raw)};
}

nlohmann::json conversation_to_json(const Conversation& conv) {
    auto arr = nlohmann::json::array();
    for (const auto& m : conv) {
        arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return arr;
}

Conversation conversation_from_json(const nlohmann::json& j) {
    Conversation conv;
    for (const auto& m : j) {
        const auto role = m.at("role").get<std::string>();
        PromptMessage msg;
        if (role == "system") {
            msg.role = Role::System;
        } else if (role == "user") {
            msg.role = Role::User;
        } else if (role == "assistant") {
            msg.role = Role::Assistant;
        } else {
            throw Error(ErrorKind::SchemaViolation, "unknown role \"" + role + "\"");
        }
        msg.content = m.at("content").get<std::string>();
        conv.push_back(std::move(msg));
    }
    return conv;
}

namespace {

nlohmann::ordered_json record_to_json(const ReasoningRecord& rec) {
    nlohmann::ordered_json j;
    j["premise"] = rec.premise ? nlohmann::json(premise_to_json(*rec.premise))
                               : nlohmann::json(nullptr);
    j["aspect_answer"] = rec.aspect_answer;
    j["rationale"] = rec.rationale;
    j["raw_response"] = rec.raw_response;
    if (rec.correction) {
        j["correction"] = {
            {"re_inferred", rec.correction->re_inferred
                                ? nlohmann::json(to_string(*rec.correction->re_inferred))
                                : nlohmann::json(nullptr)},
            {"consistent", rec.correction->consistent},
            {"regenerated", rec.correction->regenerated},
        };
    } else {
        j["correction"] = nullptr;
    }
    return j;
}

ReasoningRecord record_from_json(const nlohmann::json& j) {
    ReasoningRecord rec;
    if (!j.at("premise").is_null()) rec.premise = premise_from_json(j.at("premise"));
    rec.aspect_answer = j.at("aspect_answer").get<std::string>();
    rec.rationale = j.at("rationale").get<std::string>();
    rec.raw_response = j.at("raw_response").get<std::string>();
    if (!j.at("correction").is_null()) {
        const auto& c = j.at("correction");
        CorrectionResult cr;
        if (!c.at("re_inferred").is_null()) {
            cr.re_inferred = polarity_from_string(c.at("re_inferred").get<std::string>());
        }
        cr.consistent = c.at("consistent").get<bool>();
        cr.regenerated = c.value("regenerated", false);
        rec.correction = cr;
    }
    return rec;
}

}  // namespace

nlohmann::ordered_json prediction_to_json(const PredictionRecord& rec) {
    nlohmann::ordered_json j;
    j["instance_id"] = rec.instance_id;
    j["method"] = to_string(rec.method);
    j["seed"] = rec.seed;
    auto records = nlohmann::ordered_json::array();
    for (const auto& r : rec.records) records.push_back(record_to_json(r));
    j["records"] = std::move(records);
    j["contrast_raw"] =
        rec.contrast_raw ? nlohmann::json(*rec.contrast_raw) : nlohmann::json(nullptr);
    j["final_polarity"] = rec.final_polarity
                              ? nlohmann::json(to_string(*rec.final_polarity))
                              : nlohmann::json(nullptr);
    j["fallback_used"] = rec.fallback_used;
    j["parse_rule"] = rec.parse_rule;
    j["wall_time_ms"] = rec.wall_time_ms;
    return j;
}

PredictionRecord prediction_from_json(const nlohmann::json& j) {
    PredictionRecord rec;
    rec.instance_id = j.at("instance_id").get<std::string>();
    rec.method = method_from_string(j.at("method").get<std::string>());
    rec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& r : j.at("records")) rec.records.push_back(record_from_json(r));
    if (!j.at("contrast_raw").is_null()) {
        rec.contrast_raw = j.at("contrast_raw").get<std::string>();
    }
    if (!j.at("final_polarity").is_null()) {
        rec.final_polarity = polarity_from_string(j.at("final_polarity").get<std::string>());
    }
    rec.fallback_used = j.at("fallback_used").get<bool>();
    rec.parse_rule = j.at("parse_rule").get<std::string>();
    rec.wall_time_ms = j.at("wall_time_ms").get<double>();
    return rec;
}

nlohmann::ordered_json transcripts_to_json(const PredictionRecord& rec) {
    nlohmann::ordered_json j;
    j["instance_id"] = rec.instance_id;
    auto convs = nlohmann::ordered_json::array();
    for (const auto& t : rec.transcripts) {
        convs.push_back({{"label", t.label}, {"messages", conversation_to_json(t.messages)}});
    }
    j["conversations"] = std::move(convs);
    return j;
}

std::vector<LabeledConversation> transcripts_from_json(const nlohmann::json& j) {
    std::vector<LabeledConversation> out;
    for (const auto& c : j.at("conversations")) {
        out.push_back({c.at("label").get<std::string>(),
                       conversation_from_json(c.at("messages"))});
    }
    return out;
}

}  // namespace rcr
