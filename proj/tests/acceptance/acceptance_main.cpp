// Checks the project's promised behaviors end to end and prints one PASS or
// FAIL line per criterion. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcr/backend.hpp"
#include "rcr/dataset.hpp"
#include "rcr/domain.hpp"
#include "rcr/error.hpp"
#include "rcr/eval.hpp"
#include "rcr/label_parser.hpp"
#include "rcr/pipelines.hpp"
#include "rcr/prompts.hpp"
#include "rcr/records.hpp"
#include "rcr/reference_scores.hpp"
#include "rcr/util.hpp"

#include "test_support.hpp"

using namespace rcr;

namespace {

int failures = 0;

void criterion(int n, const std::string& description,
               const std::function<void()>& body) {
    try {
        body();
        std::cout << "PASS criterion " << n << ": " << description << "\n";
    } catch (const std::exception& e) {
        ++failures;
        std::cout << "FAIL criterion " << n << ": " << description << " ("
                  << e.what() << ")\n";
    }
}

void require(bool condition, const std::string& detail) {
    if (!condition) throw std::runtime_error(detail);
}

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
        .count();
}

const BackendConfig& backend_config() {
    static BackendConfig cfg;
    return cfg;
}

// Scripted responses plus a per-prompt call counter, to pin down how often a
// step was re-issued.
class CountingScripted : public Backend {
public:
    explicit CountingScripted(std::map<std::string, std::string> responses)
        : responses_(std::move(responses)) {}

    Completion complete(const Conversation& conv) override {
        validate_conversation(conv);
        const std::string hash = prompt_hash(conv);
        const auto found = responses_.find(hash);
        if (found == responses_.end()) {
            throw Error(ErrorKind::MalformedResponse,
                        "no scripted response for prompt " + hash)
                .with_prompt_hash(hash);
        }
        ++calls_[hash];
        Completion c;
        c.text = found->second;
        c.prompt_hash = hash;
        return c;
    }
    bool deterministic() const override { return true; }

    int calls(const Conversation& conv) const {
        const auto found = calls_.find(prompt_hash(conv));
        return found == calls_.end() ? 0 : found->second;
    }

private:
    std::map<std::string, std::string> responses_;
    std::map<std::string, int> calls_;
};

void check_published_deltas() {
    const auto start = std::chrono::steady_clock::now();
    struct Case {
        Setting setting;
        const char* model;
        const char* improved;
        const char* baseline;
        double target;
        const char* rendered;
    };
    const Case cases[] = {
        {Setting::ZeroShot, "flan-t5-base", "drcr", "thor", 3.59, "3.59"},
        {Setting::ZeroShot, "flan-t5-large", "drcr", "thor", 4.29, "4.29"},
        {Setting::ZeroShot, "flan-t5-xxl", "drcr", "thor", 5.10, "5.10"},
        {Setting::ZeroShot, "flan-t5-large", "trcr", "drcr", 1.62, "1.62"},
        {Setting::FineTuned, "flan-t5-xxl", "drcr", "thor", 2.44, "2.44"},
        {Setting::FineTuned, "flan-t5-xxl", "trcr", "drcr", 1.03, "1.03"},
    };
    for (const auto& c : cases) {
        const auto score = [&](const char* method, const char* dataset) {
            const auto value =
                reference_score(c.setting, c.model, method, dataset, "isa");
            require(value.has_value(),
                    std::string("missing reference score for ") + c.model);
            return *value;
        };
        const double raw = improvement_delta(
            {score(c.improved, "laptop"), score(c.improved, "restaurant")},
            {score(c.baseline, "laptop"), score(c.baseline, "restaurant")});
        std::ostringstream label;
        label << c.model << " " << c.improved << "-" << c.baseline;
        require(std::fabs(raw - c.target) <= 0.005 + 1e-12,
                label.str() + " delta " + std::to_string(raw) + " vs " +
                    c.rendered);
        require(format_2dp(raw) == c.rendered,
                label.str() + " renders as " + format_2dp(raw));
    }
    require(elapsed_seconds(start) < 1.0, "delta check exceeded 1 s");
}

void check_scripted_determinism() {
    const auto start = std::chrono::steady_clock::now();
    const auto instances = load_normalized(test::e2e_dir() / "instances.jsonl");
    ScriptedBackend backend = ScriptedBackend::load(test::e2e_dir() / "script.jsonl");
    const BackendHandle be{backend, backend_config()};
    const PipelineConfig cfg;
    const auto expected = nlohmann::json::parse(
        read_file(test::e2e_dir() / "expected_labels.json"));
    const std::uint64_t seed = expected.at("seed").get<std::uint64_t>();

    require(instances.size() == 6, "fixture must hold 6 instances");
    int implicit = 0;
    std::map<Polarity, int> per_class;
    for (const auto& x : instances) {
        implicit += x.implicit ? 1 : 0;
        ++per_class[x.gold_polarity];
    }
    require(implicit > 0 && implicit < 6, "fixture must mix implicit and explicit");
    for (const auto& [polarity, count] : per_class) {
        require(count == 2, std::string("fixture must hold 2 ") +
                                std::string(to_string(polarity)) + " instances");
    }

    for (const char* method_name : {"direct", "thor", "drcr", "trcr"}) {
        const Method method = method_from_string(method_name);
        const auto& labels = expected.at("labels").at(method_name);
        for (const auto& x : instances) {
            const PredictionRecord pred = run_instance(method, x, be, cfg, seed);
            require(pred.final_polarity.has_value(),
                    x.id + " produced no label under " + method_name);
            const std::string want = labels.at(x.id).get<std::string>();
            require(std::string(to_string(*pred.final_polarity)) == want,
                    x.id + " under " + method_name + " expected " + want +
                        ", got " + std::string(to_string(*pred.final_polarity)));
        }
    }

    RunOptions opts;
    opts.deterministic_artifact = true;
    opts.dataset_path = "e2e/instances.jsonl";
    for (const Method method : {Method::Drcr, Method::Trcr}) {
        std::vector<std::string> dumps;
        for (const int parallelism : {1, 1, 1, 4}) {
            const RunArtifact artifact =
                run_dataset(instances, method, be, cfg, seed, parallelism, opts);
            std::string dump = run_manifest_to_json(artifact.manifest).dump();
            for (const auto& p : artifact.predictions) {
                dump += prediction_to_json(p).dump();
                dump += transcripts_to_json(p).dump();
            }
            dumps.push_back(std::move(dump));
        }
        for (std::size_t i = 1; i < dumps.size(); ++i) {
            require(dumps[i] == dumps[0],
                    "artifact bytes diverged across repeats or parallelism");
        }
    }
    require(elapsed_seconds(start) < 5.0, "scripted runs exceeded 5 s");
}

void check_isolation() {
    const auto instances = load_normalized(test::e2e_dir() / "instances.jsonl");
    ScriptedBackend backend = ScriptedBackend::load(test::e2e_dir() / "script.jsonl");
    const BackendHandle be{backend, backend_config()};
    const PipelineConfig cfg;

    for (const auto& x : instances) {
        for (const Method method : {Method::Drcr, Method::Trcr}) {
            const PredictionRecord pred = run_instance(method, x, be, cfg, 7);
            const auto violation = find_isolation_violation(pred.transcripts);
            require(!violation.has_value(), x.id + ": " + violation.value_or(""));
        }
    }
}

double brute_force_macro_f1(const std::vector<GoldPred>& pairs) {
    double sum = 0.0;
    int included = 0;
    for (const Polarity c : kAllPolarities) {
        long long tp = 0, in_gold = 0, in_pred = 0;
        for (const auto& [gold, pred] : pairs) {
            if (gold == c) ++in_gold;
            if (pred && *pred == c) {
                ++in_pred;
                if (gold == c) ++tp;
            }
        }
        if (in_gold == 0 && in_pred == 0) continue;
        ++included;
        const double precision = in_pred == 0 ? 0.0 : double(tp) / double(in_pred);
        const double recall = in_gold == 0 ? 0.0 : double(tp) / double(in_gold);
        sum += precision + recall == 0.0
                   ? 0.0
                   : 2.0 * precision * recall / (precision + recall);
    }
    return included == 0 ? 0.0 : sum / included;
}

void check_metric_oracle() {
    std::mt19937 gen(12345);
    std::uniform_int_distribution<int> size_dist(1, 30);
    std::uniform_int_distribution<int> class_dist(0, 2);
    std::uniform_real_distribution<double> invalid_dist(0.0, 1.0);

    std::vector<std::vector<GoldPred>> sets;
    for (int round = 0; round < 1000; ++round) {
        std::vector<GoldPred> pairs;
        const int n = size_dist(gen);
        for (int i = 0; i < n; ++i) {
            const Polarity gold = kAllPolarities[class_dist(gen)];
            std::optional<Polarity> pred;
            if (invalid_dist(gen) >= 0.15) pred = kAllPolarities[class_dist(gen)];
            pairs.emplace_back(gold, pred);
        }
        sets.push_back(std::move(pairs));
    }
    sets.push_back({{Polarity::Positive, Polarity::Positive},
                    {Polarity::Positive, Polarity::Positive}});
    sets.push_back({{Polarity::Positive, Polarity::Negative},
                    {Polarity::Negative, Polarity::Neutral},
                    {Polarity::Neutral, Polarity::Positive}});
    sets.push_back({{Polarity::Positive, Polarity::Neutral},
                    {Polarity::Negative, Polarity::Neutral},
                    {Polarity::Neutral, Polarity::Neutral}});
    sets.push_back({{Polarity::Positive, std::nullopt},
                    {Polarity::Negative, std::nullopt}});

    for (std::size_t i = 0; i < sets.size(); ++i) {
        const double fast = macro_f1(confusion_matrix(sets[i]));
        const double slow = brute_force_macro_f1(sets[i]);
        require(std::fabs(fast - slow) <= 1e-12,
                "set " + std::to_string(i) + ": " + std::to_string(fast) +
                    " vs " + std::to_string(slow));
    }
}

void check_sampler_uniformity() {
    const std::uint64_t seed = 42;
    const int draws = 30000;
    std::map<Polarity, int> counts;
    std::string sequence;
    for (int i = 0; i < draws; ++i) {
        const Premise p = sample_hypothesis(seed, "id-" + std::to_string(i));
        ++counts[p.polarity];
        sequence += to_string(p.polarity);
        sequence += ',';
    }
    const int low = static_cast<int>((1.0 / 3.0 - 0.01) * draws);
    const int high = static_cast<int>((1.0 / 3.0 + 0.01) * draws) + 1;
    for (const Polarity c : kAllPolarities) {
        require(counts[c] >= low && counts[c] <= high,
                std::string(to_string(c)) + " drawn " +
                    std::to_string(counts[c]) + " times, outside [" +
                    std::to_string(low) + ", " + std::to_string(high) + "]");
    }

    std::string replay;
    for (int i = 0; i < draws; ++i) {
        replay += to_string(sample_hypothesis(seed, "id-" + std::to_string(i)).polarity);
        replay += ',';
    }
    require(replay == sequence, "draw sequence not reproducible from the seed");
}

void check_parser_corpus() {
    std::istringstream in(read_file(test::fixture_dir() / "parser_corpus.jsonl"));
    std::string line;
    int entries = 0;
    bool negative_conclusion = false, neutral_conclusion = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++entries;
        const auto j = nlohmann::json::parse(line);
        const std::string text = j.at("text").get<std::string>();
        const ParseOutcome outcome = extract_polarity(text);
        require(outcome.rule_fired == j.at("rule").get<std::string>(),
                text + ": rule " + outcome.rule_fired);
        if (j.at("expected").is_null()) {
            require(!outcome.polarity.has_value(), text + ": expected no label");
        } else {
            require(outcome.polarity.has_value(), text + ": expected a label");
            const std::string want = j.at("expected").get<std::string>();
            require(std::string(to_string(*outcome.polarity)) == want,
                    text + ": expected " + want);
            if (text.find("should be classified as negative") != std::string::npos &&
                want == "negative") {
                negative_conclusion = true;
            }
            if (text.find("sentence is neutral") != std::string::npos &&
                want == "neutral") {
                neutral_conclusion = true;
            }
        }
    }
    require(entries >= 20, "corpus holds only " + std::to_string(entries));
    require(negative_conclusion && neutral_conclusion,
            "corpus is missing a worked conclusion sentence");
}

void check_ingestion_integrity() {
    test::TempDir dir;
    const DatasetManifest manifest = ingest_dataset(
        test::fixture_dir() / "semeval_sample.xml",
        test::fixture_dir() / "semeval_annotations.jsonl", dir / "ds",
        "semeval-sample", DomainTag::Laptop, Split::Test);

    require(manifest.counts.total == 6, "expected 6 instances");
    require(manifest.counts.implicit_count == 2, "expected 2 implicit");
    require(manifest.counts.explicit_count == 4, "expected 4 explicit");
    require(manifest.counts.positive == 2 && manifest.counts.negative == 2 &&
                manifest.counts.neutral == 2,
            "expected 2 instances per polarity");
    require(manifest.counts.implicit_count + manifest.counts.explicit_count ==
                manifest.counts.total,
            "implicit + explicit must equal total");
    require(manifest.counts.positive + manifest.counts.negative +
                    manifest.counts.neutral ==
                manifest.counts.total,
            "per-polarity counts must sum to total");
    require(manifest.dropped_conflicts == 1, "expected 1 dropped conflict");
    require(manifest.merge.unmatched_keys ==
                std::vector<std::string>{"999/ghost/0"},
            "expected one unmatched annotation key");
    validate(manifest);

    const auto loaded = load_normalized(dir / "ds" / "instances.jsonl");
    require(loaded.size() == 6, "normalized file lost instances");
    save_normalized(loaded, dir / "resaved.jsonl");
    const auto reloaded = load_normalized(dir / "resaved.jsonl");
    require(reloaded.size() == loaded.size(), "re-save lost instances");
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        require(reloaded[i].id == loaded[i].id &&
                    reloaded[i].text == loaded[i].text &&
                    reloaded[i].aspect_term == loaded[i].aspect_term &&
                    reloaded[i].gold_polarity == loaded[i].gold_polarity &&
                    reloaded[i].implicit == loaded[i].implicit &&
                    reloaded[i].domain_tag == loaded[i].domain_tag &&
                    reloaded[i].split == loaded[i].split,
                loaded[i].id + " changed across save/load");
    }

    const DatasetManifest reread = manifest_from_json(
        nlohmann::json::parse(read_file(dir / "ds" / "manifest.json")));
    validate(reread);
    require(reread.counts.total == manifest.counts.total &&
                reread.dropped_conflicts == manifest.dropped_conflicts,
            "manifest changed across save/load");
}

void check_correction_semantics() {
    const auto fixture = nlohmann::json::parse(
        read_file(test::fixture_dir() / "correction_cases.json"));
    const SentenceInstance x = test::make_instance(
        "corr#0", "The table wobbles badly.", Polarity::Negative);
    PipelineConfig cfg;
    cfg.correction_enabled = true;

    for (const auto& c : fixture.at("cases")) {
        const Premise premise = premise_from_json(c.at("premise"));
        ReasoningRecord record;
        record.premise = premise;
        record.aspect_answer = "The table.";
        record.rationale = "A wobble undermines daily use.";
        record.raw_response = "1) The table. 2) A wobble undermines daily use.";

        std::map<std::string, std::string> responses{
            {prompt_hash(render_correction_prompt(cfg.templates, record)),
             c.at("response").get<std::string>()}};
        CountingScripted backend(std::move(responses));
        const BackendHandle be{backend, backend_config()};
        std::vector<LabeledConversation> transcripts;
        const ReasoningRecord out =
            run_correction_check(x, record, false, be, cfg, transcripts, "1");

        require(out.correction.has_value(), "correction verdict missing");
        const bool expect_consistent = c.at("consistent").get<bool>();
        require(out.correction->consistent == expect_consistent,
                c.at("response").get<std::string>() + ": verdict mismatch");
        if (out.correction->re_inferred) {
            require(premise_matches(premise, *out.correction->re_inferred) ==
                        expect_consistent,
                    "verdict disagrees with the premise semantics");
        } else {
            require(!expect_consistent,
                    "unparseable probe answer must count as inconsistent");
        }
    }

    // Regeneration: exactly one re-issue when enabled and inconsistent.
    cfg.correction_regenerate = true;
    const Premise premise = asserted(Polarity::Positive);
    ReasoningRecord record;
    record.premise = premise;
    record.aspect_answer = "The table.";
    record.rationale = "A wobble undermines daily use.";
    record.raw_response = "1) The table. 2) A wobble undermines daily use.";
    const Conversation check_conv =
        render_correction_prompt(cfg.templates, record);
    const Conversation regen_conv =
        render_premise_prompt(cfg.templates, x, premise, true);

    CountingScripted backend({
        {prompt_hash(check_conv),
         "On review, the inference points to a negative reading."},
        {prompt_hash(regen_conv),
         "1) The table legs. 2) Uneven legs spoil the dining experience."},
    });
    const BackendHandle be{backend, backend_config()};
    std::vector<LabeledConversation> transcripts;
    const ReasoningRecord out =
        run_correction_check(x, record, true, be, cfg, transcripts, "1");
    require(!out.correction->consistent, "verdict should be inconsistent");
    require(out.correction->regenerated, "inconsistent record must regenerate");
    require(backend.calls(regen_conv) == 1,
            "regeneration must fire exactly once, fired " +
                std::to_string(backend.calls(regen_conv)) + " times");
    require(out.raw_response !=
                "1) The table. 2) A wobble undermines daily use.",
            "regenerated record kept the old response");

    ReasoningRecord consistent_record = record;
    consistent_record.premise = asserted(Polarity::Negative);
    CountingScripted quiet_backend(
        {{prompt_hash(render_correction_prompt(cfg.templates, consistent_record)),
          "On review, the inference points to a negative reading."}});
    const BackendHandle quiet{quiet_backend, backend_config()};
    std::vector<LabeledConversation> quiet_transcripts;
    const ReasoningRecord kept = run_correction_check(
        x, consistent_record, true, quiet, cfg, quiet_transcripts, "1");
    require(kept.correction->consistent, "verdict should be consistent");
    require(!kept.correction->regenerated, "consistent record must not regenerate");
    require(backend.calls(regen_conv) == 1, "no further regeneration expected");
}

}  // namespace

int main() {
    criterion(1, "published improvement deltas reproduce exactly",
              check_published_deltas);
    criterion(2, "scripted runs replay deterministically across repeats and "
                 "parallelism",
              check_scripted_determinism);
    criterion(3, "premise conversations never leak one another's responses",
              check_isolation);
    criterion(4, "macro-F1 matches an independent per-class computation",
              check_metric_oracle);
    criterion(5, "hypothesis sampling is uniform and reproducible",
              check_sampler_uniformity);
    criterion(6, "the label-extraction corpus parses to its expected outcomes",
              check_parser_corpus);
    criterion(7, "ingestion preserves counts and fields through save and load",
              check_ingestion_integrity);
    criterion(8, "correction verdicts follow the premise and regenerate once",
              check_correction_semantics);
    if (failures > 0) {
        std::cout << failures << " criteria failed\n";
    }
    return failures;
}
