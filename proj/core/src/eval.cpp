#include "rcr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "rcr/error.hpp"

namespace rcr {

int polarity_index(Polarity p) {
    switch (p) {
        case Polarity::Positive: return 0;
        case Polarity::Negative: return 1;
        case Polarity::Neutral: return 2;
    }
    return 2;
}

long long ConfusionMatrix::total() const {
    long long sum = 0;
    for (const auto& row : counts) {
        for (long long c : row) sum += c;
    }
    for (long long c : invalid) sum += c;
    return sum;
}

ConfusionMatrix confusion_matrix(const std::vector<GoldPred>& pairs) {
    ConfusionMatrix cm;
    for (const auto& [gold, pred] : pairs) {
        if (pred) {
            ++cm.counts[polarity_index(gold)][polarity_index(*pred)];
        } else {
            ++cm.invalid[polarity_index(gold)];
        }
    }
    return cm;
}

double macro_f1(const ConfusionMatrix& cm) {
    if (cm.total() == 0) {
        throw Error(ErrorKind::EmptyMatrix, "macro-F1 over an empty matrix");
    }
    double sum = 0.0;
    int included = 0;
    for (int c = 0; c < 3; ++c) {
        long long in_gold = cm.invalid[c];
        long long in_pred = 0;
        for (int k = 0; k < 3; ++k) {
            in_gold += cm.counts[c][k];
            in_pred += cm.counts[k][c];
        }
        if (in_gold == 0 && in_pred == 0) continue;
        ++included;
        const long long tp = cm.counts[c][c];
        // 2PR/(P+R) == 2tp / ((tp+fn) + (tp+fp)); zero tp contributes zero
        sum += in_gold + in_pred > 0
                   ? 2.0 * static_cast<double>(tp) / static_cast<double>(in_gold + in_pred)
                   : 0.0;
    }
    return sum / included;
}

EvalReport slice_report(const std::vector<PredictionRecord>& predictions,
                        const std::vector<SentenceInstance>& dataset,
                        std::string run_manifest_hash) {
    std::map<std::string, const SentenceInstance*> by_id;
    for (const auto& x : dataset) by_id[x.id] = &x;

    std::vector<GoldPred> all, isa, esa;
    std::set<std::string> seen;
    std::string method;
    for (const auto& pred : predictions) {
        const auto found = by_id.find(pred.instance_id);
        if (found == by_id.end()) {
            throw Error(ErrorKind::UnknownInstance,
                        "prediction for unknown instance " + pred.instance_id);
        }
        if (!seen.insert(pred.instance_id).second) {
            throw Error(ErrorKind::DuplicatePrediction,
                        "multiple predictions for instance " + pred.instance_id);
        }
        if (method.empty()) method = std::string(to_string(pred.method));
        const GoldPred pair{found->second->gold_polarity, pred.final_polarity};
        all.push_back(pair);
        (found->second->implicit ? isa : esa).push_back(pair);
    }

    EvalReport report;
    report.method = method;
    report.run_manifest_hash = std::move(run_manifest_hash);
    report.metric = "macro-F1 (unweighted mean of per-class F1)";
    const std::pair<const char*, const std::vector<GoldPred>*> partitions[] = {
        {"ALL", &all}, {"ISA", &isa}, {"ESA", &esa}};
    for (const auto& [name, pairs] : partitions) {
        SliceResult slice;
        slice.n = static_cast<long long>(pairs->size());
        slice.confusion = confusion_matrix(*pairs);
        if (slice.n > 0) slice.macro_f1 = macro_f1(slice.confusion);
        report.slices[name] = slice;
    }
    return report;
}

namespace {

nlohmann::ordered_json confusion_to_json(const ConfusionMatrix& cm) {
    nlohmann::ordered_json j;
    auto matrix = nlohmann::ordered_json::array();
    for (const auto& row : cm.counts) {
        matrix.push_back(std::vector<long long>(row.begin(), row.end()));
    }
    j["matrix"] = std::move(matrix);
    j["invalid"] = std::vector<long long>(cm.invalid.begin(), cm.invalid.end());
    return j;
}

ConfusionMatrix confusion_from_json(const nlohmann::json& j) {
    ConfusionMatrix cm;
    const auto& matrix = j.at("matrix");
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) cm.counts[r][c] = matrix.at(r).at(c).get<long long>();
    }
    for (int c = 0; c < 3; ++c) cm.invalid[c] = j.at("invalid").at(c).get<long long>();
    return cm;
}

}  // namespace

nlohmann::ordered_json eval_report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["method"] = report.method;
    j["run_manifest_hash"] = report.run_manifest_hash;
    j["metric"] = report.metric;
    nlohmann::ordered_json slices;
    for (const char* name : {"ALL", "ISA", "ESA"}) {
        const auto& slice = report.slices.at(name);
        nlohmann::ordered_json s;
        s["n"] = slice.n;
        s["macro_f1"] = slice.macro_f1 ? nlohmann::json(*slice.macro_f1)
                                       : nlohmann::json(nullptr);
        s["confusion"] = confusion_to_json(slice.confusion);
        slices[name] = std::move(s);
    }
    j["slices"] = std::move(slices);
    return j;
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
    EvalReport report;
    report.method = j.at("method").get<std::string>();
    report.run_manifest_hash = j.at("run_manifest_hash").get<std::string>();
    report.metric = j.at("metric").get<std::string>();
    for (const char* name : {"ALL", "ISA", "ESA"}) {
        const auto& s = j.at("slices").at(name);
        SliceResult slice;
        slice.n = s.at("n").get<long long>();
        if (!s.at("macro_f1").is_null()) slice.macro_f1 = s.at("macro_f1").get<double>();
        slice.confusion = confusion_from_json(s.at("confusion"));
        report.slices[name] = slice;
    }
    return report;
}

std::string render_eval_report(const EvalReport& report) {
    std::ostringstream out;
    out << "method: " << report.method << "\n";
    out << "metric: " << report.metric << "\n";
    out << "slice     n  macro-F1\n";
    for (const char* name : {"ALL", "ISA", "ESA"}) {
        const auto& slice = report.slices.at(name);
        char line[64];
        if (slice.macro_f1) {
            std::snprintf(line, sizeof line, "%-5s %5lld  %s\n", name, slice.n,
                          format_2dp(*slice.macro_f1 * 100.0).c_str());
        } else {
            std::snprintf(line, sizeof line, "%-5s %5lld  n/a\n", name, slice.n);
        }
        out << line;
    }
    out << "confusion (gold rows x predicted columns, order P/N/Neu; last column = no prediction)\n";
    for (const char* name : {"ALL", "ISA", "ESA"}) {
        const auto& cm = report.slices.at(name).confusion;
        out << name << ":";
        for (int r = 0; r < 3; ++r) {
            out << " [";
            for (int c = 0; c < 3; ++c) out << (c ? " " : "") << cm.counts[r][c];
            out << " | " << cm.invalid[r] << "]";
        }
        out << "\n";
    }
    return out.str();
}

double improvement_delta(std::pair<double, double> a, std::pair<double, double> b) {
    const long long a1 = std::llround(a.first * 100.0);
    const long long a2 = std::llround(a.second * 100.0);
    const long long b1 = std::llround(b.first * 100.0);
    const long long b2 = std::llround(b.second * 100.0);
    return static_cast<double>((a1 - b1) + (a2 - b2)) / 200.0;
}

double round_half_up_2dp(double x) {
    return std::floor(x * 100.0 + 0.5) / 100.0;
}

std::string format_2dp(double x) {
    const long long hundredths = static_cast<long long>(std::floor(x * 100.0 + 0.5));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", hundredths < 0 ? "-" : "",
                  std::llabs(hundredths) / 100, std::llabs(hundredths) % 100);
    return buf;
}

namespace {

nlohmann::ordered_json domain_scores_to_json(const std::map<std::string, double>& scores) {
    nlohmann::ordered_json j;
    for (const char* slice : {"all", "isa", "esa"}) {
        const auto it = scores.find(slice);
        j[slice] = it != scores.end() ? nlohmann::json(it->second)
                                      : nlohmann::json(nullptr);
    }
    return j;
}

std::map<std::string, double> domain_scores_from_json(const nlohmann::json& j) {
    std::map<std::string, double> scores;
    for (const auto& [slice, value] : j.items()) {
        if (!value.is_null()) scores[slice] = value.get<double>();
    }
    return scores;
}

}  // namespace

nlohmann::ordered_json method_scores_to_json(const MethodScores& scores) {
    nlohmann::ordered_json j;
    j["label"] = scores.label;
    j["model"] = scores.model;
    j["method"] = scores.method;
    j["scores"] = {{"laptop", domain_scores_to_json(scores.laptop)},
                   {"restaurant", domain_scores_to_json(scores.restaurant)}};
    return j;
}

MethodScores method_scores_from_json(const nlohmann::json& j) {
    MethodScores scores;
    scores.label = j.at("label").get<std::string>();
    scores.model = j.at("model").get<std::string>();
    scores.method = j.at("method").get<std::string>();
    scores.laptop = domain_scores_from_json(j.at("scores").at("laptop"));
    scores.restaurant = domain_scores_from_json(j.at("scores").at("restaurant"));
    return scores;
}

std::string render_score_rows(const std::vector<MethodScores>& rows) {
    auto cell = [](const std::map<std::string, double>& scores, const char* slice) {
        const auto it = scores.find(slice);
        return it != scores.end() ? format_2dp(it->second) : std::string("-");
    };

    std::size_t label_w = 5, model_w = 5, method_w = 6;
    for (const auto& row : rows) {
        label_w = std::max(label_w, row.label.size());
        model_w = std::max(model_w, row.model.size());
        method_w = std::max(method_w, row.method.size());
    }

    std::ostringstream out;
    char header[256];
    std::snprintf(header, sizeof header,
                  "%-*s %-*s %-*s %9s %9s %9s %9s\n", static_cast<int>(label_w),
                  "label", static_cast<int>(model_w), "model",
                  static_cast<int>(method_w), "method", "lap-ALL", "lap-ISA",
                  "rest-ALL", "rest-ISA");
    out << header;
    for (const auto& row : rows) {
        char line[256];
        std::snprintf(line, sizeof line, "%-*s %-*s %-*s %9s %9s %9s %9s\n",
                      static_cast<int>(label_w), row.label.c_str(),
                      static_cast<int>(model_w), row.model.c_str(),
                      static_cast<int>(method_w), row.method.c_str(),
                      cell(row.laptop, "all").c_str(), cell(row.laptop, "isa").c_str(),
                      cell(row.restaurant, "all").c_str(),
                      cell(row.restaurant, "isa").c_str());
        out << line;
    }
    return out.str();
}

}  // namespace rcr
