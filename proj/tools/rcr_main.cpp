#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rcr/dataset.hpp"
#include "rcr/error.hpp"
#include "rcr/eval.hpp"
#include "rcr/pipelines.hpp"
#include "rcr/records.hpp"
#include "rcr/reference_scores.hpp"
#include "rcr/run_config.hpp"
#include "rcr/sha256.hpp"
#include "rcr/util.hpp"

namespace {

namespace fs = std::filesystem;

fs::path instances_file(const std::string& dataset_path) {
    fs::path p = dataset_path;
    if (fs::is_directory(p)) p /= "instances.jsonl";
    return p;
}

nlohmann::json parse_json_file(const fs::path& file) {
    try {
        return nlohmann::json::parse(rcr::read_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw rcr::Error(rcr::ErrorKind::SchemaViolation,
                         file.string() + ": " + e.what());
    }
}

int cmd_ingest(const std::string& xml, const std::string& annotations,
               const std::string& out_dir, std::string name,
               const std::string& domain, const std::string& split) {
    if (name.empty()) name = fs::path(xml).stem().string();
    const rcr::DatasetManifest manifest = rcr::ingest_dataset(
        xml, annotations, out_dir, name, rcr::domain_tag_from_string(domain),
        rcr::split_from_string(split));
    std::cout << "ingested " << manifest.counts.total << " instances ("
              << manifest.counts.implicit_count << " implicit, "
              << manifest.counts.explicit_count << " explicit) into " << out_dir
              << "\n";
    if (manifest.dropped_conflicts > 0) {
        std::cout << "dropped " << manifest.dropped_conflicts
                  << " conflict aspects\n";
    }
    if (!manifest.merge.unmatched_keys.empty()) {
        std::cout << manifest.merge.unmatched_keys.size()
                  << " annotation keys matched no instance\n";
    }
    return 0;
}

int cmd_eval(const std::string& run_dir, const std::string& dataset_path,
             const std::string& out_file) {
    const rcr::RunArtifact artifact = rcr::load_run_artifact(run_dir);
    const std::vector<rcr::SentenceInstance> instances =
        rcr::load_normalized(instances_file(dataset_path));
    const std::string manifest_hash =
        rcr::sha256_file_hex(fs::path(run_dir) / "manifest.json");
    const rcr::EvalReport report =
        rcr::slice_report(artifact.predictions, instances, manifest_hash);
    std::cout << rcr::render_eval_report(report);
    if (!out_file.empty()) {
        rcr::write_file_atomic(out_file,
                               rcr::eval_report_to_json(report).dump(2) + "\n");
        std::cout << "report written to " << out_file << "\n";
    }
    return 0;
}

// Scores one run's predictions per domain and folds them into the row for
// its (model, method) pair, so single-domain runs merge into one row.
void fold_run_into_rows(const std::string& run_dir,
                        std::vector<rcr::MethodScores>& rows) {
    const rcr::RunArtifact artifact = rcr::load_run_artifact(run_dir);
    const rcr::RunManifest& manifest = artifact.manifest;

    std::string model;
    if (manifest.config.is_object() && manifest.config.contains("backend")) {
        model = manifest.config["backend"].value("model_id", std::string{});
    }
    if (model.empty()) model = "unknown";

    const std::vector<rcr::SentenceInstance> instances =
        rcr::load_normalized(instances_file(manifest.dataset_path));
    std::map<std::string, const rcr::SentenceInstance*> by_id;
    for (const auto& x : instances) by_id[x.id] = &x;

    rcr::MethodScores* row = nullptr;
    for (auto& existing : rows) {
        if (existing.model == model && existing.method == manifest.method) {
            row = &existing;
            break;
        }
    }
    if (row == nullptr) {
        rows.push_back({"run", model, manifest.method, {}, {}});
        row = &rows.back();
    }

    const std::pair<rcr::DomainTag, std::map<std::string, double>*> domains[] = {
        {rcr::DomainTag::Laptop, &row->laptop},
        {rcr::DomainTag::Restaurant, &row->restaurant},
    };
    for (const auto& [tag, scores] : domains) {
        std::vector<rcr::SentenceInstance> subset;
        for (const auto& x : instances) {
            if (x.domain_tag == tag) subset.push_back(x);
        }
        if (subset.empty()) continue;
        std::vector<rcr::PredictionRecord> preds;
        for (const auto& p : artifact.predictions) {
            const auto found = by_id.find(p.instance_id);
            if (found != by_id.end() && found->second->domain_tag == tag) {
                preds.push_back(p);
            }
        }
        if (preds.empty()) continue;
        const rcr::EvalReport report =
            rcr::slice_report(preds, subset, manifest.config_hash);
        const std::pair<const char*, const char*> slices[] = {
            {"ALL", "all"}, {"ISA", "isa"}, {"ESA", "esa"}};
        for (const auto& [name, key] : slices) {
            const auto& slice = report.slices.at(name);
            if (slice.macro_f1) (*scores)[key] = *slice.macro_f1 * 100.0;
        }
    }
}

int cmd_report(const std::vector<std::string>& run_dirs, bool paper_ref,
               const std::string& setting, const std::string& out_file) {
    std::vector<rcr::MethodScores> rows;
    for (const auto& dir : run_dirs) fold_run_into_rows(dir, rows);

    if (paper_ref) {
        const std::vector<rcr::MethodScores> refs =
            rcr::reference_as_rows(rcr::setting_from_string(setting));
        std::vector<rcr::MethodScores> matched;
        for (const auto& ref : refs) {
            for (const auto& row : rows) {
                if (ref.model == row.model && ref.method == row.method) {
                    matched.push_back(ref);
                    break;
                }
            }
        }
        const auto& appended = matched.empty() ? refs : matched;
        rows.insert(rows.end(), appended.begin(), appended.end());
    }

    std::cout << rcr::render_score_rows(rows);
    if (!out_file.empty()) {
        auto j = nlohmann::ordered_json::array();
        for (const auto& row : rows) j.push_back(rcr::method_scores_to_json(row));
        rcr::write_file_atomic(out_file, j.dump(2) + "\n");
        std::cout << "scores written to " << out_file << "\n";
    }
    return 0;
}

double slice_score(const rcr::MethodScores& scores, const std::string& domain,
                   const std::string& slice, const std::string& file) {
    const auto& map = domain == "laptop" ? scores.laptop : scores.restaurant;
    const auto found = map.find(slice);
    if (found == map.end()) {
        throw rcr::Error(rcr::ErrorKind::InvalidArgument,
                         file + " has no " + domain + " " + slice + " score");
    }
    return found->second;
}

int cmd_delta(const std::string& a_file, const std::string& b_file,
              const std::string& slice) {
    const rcr::MethodScores a = rcr::method_scores_from_json(parse_json_file(a_file));
    const rcr::MethodScores b = rcr::method_scores_from_json(parse_json_file(b_file));
    const double delta = rcr::improvement_delta(
        {slice_score(a, "laptop", slice, a_file),
         slice_score(a, "restaurant", slice, a_file)},
        {slice_score(b, "laptop", slice, b_file),
         slice_score(b, "restaurant", slice, b_file)});
    std::cout << rcr::format_2dp(delta) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contrastive reasoning pipelines for implicit sentiment analysis"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    auto* ingest = app.add_subcommand(
        "ingest", "Convert a SemEval XML file into a normalized dataset");
    std::string in_xml, in_annotations, in_out, in_name;
    std::string in_domain = "other", in_split = "test";
    ingest->add_option("--xml", in_xml, "source XML file")->required();
    ingest->add_option("--annotations", in_annotations,
                       "implicit-label JSONL; omitted labels default to explicit");
    ingest->add_option("--out", in_out, "output dataset directory")->required();
    ingest->add_option("--name", in_name, "dataset name (default: XML stem)");
    ingest->add_option("--domain", in_domain, "laptop, restaurant, or other")
        ->check(CLI::IsMember({"laptop", "restaurant", "other"}));
    ingest->add_option("--split", in_split, "train or test")
        ->check(CLI::IsMember({"train", "test"}));

    auto* run = app.add_subcommand(
        "run", "Execute a pipeline over a dataset and write the run artifact");
    std::string r_config, r_manifest, r_method, r_backend, r_scripted, r_template;
    std::string r_dataset, r_out, r_cache, r_policy, r_premise;
    std::uint64_t r_seed = 0;
    int r_parallelism = 1;
    double r_threshold = 0.1;
    bool r_correction = false, r_regenerate = false, r_fail_fast = false;
    bool r_enum_negation = false, r_inject_aspect = false;
    run->add_option("--config", r_config, "run config JSON");
    run->add_option("--from-manifest", r_manifest,
                    "re-execute the run recorded in a manifest.json");
    run->add_option("--method", r_method, "direct, thor, drcr, or trcr")
        ->check(CLI::IsMember({"direct", "thor", "drcr", "trcr"}));
    run->add_option("--seed", r_seed, "hypothesis sampling seed");
    run->add_option("--parallelism", r_parallelism, "concurrent instances")
        ->check(CLI::PositiveNumber);
    run->add_option("--backend", r_backend, "override the backend endpoint URL");
    run->add_option("--scripted", r_scripted,
                    "scripted response JSONL replacing the live backend");
    run->add_flag("--correction", r_correction,
                  "re-evaluate each premise inference for consistency");
    run->add_flag("--regenerate", r_regenerate,
                  "regenerate inconsistent premise steps (implies --correction)");
    run->add_option("--template", r_template, "template overlay file");
    run->add_option("--dataset", r_dataset, "dataset directory or instances.jsonl");
    run->add_option("--out", r_out, "artifact output directory");
    run->add_option("--cache", r_cache, "response cache directory");
    run->add_option("--policy", r_policy, "unparseable-answer policy")
        ->check(CLI::IsMember({"neutral-default", "count-wrong", "retry"}));
    run->add_option("--fixed-premise", r_premise,
                    "assert this polarity instead of sampling")
        ->check(CLI::IsMember({"positive", "negative", "neutral"}));
    run->add_flag("--fail-fast", r_fail_fast, "abort on the first failure");
    run->add_option("--failure-threshold", r_threshold,
                    "tolerated failure fraction before the run errors")
        ->check(CLI::Range(0.0, 1.0));
    run->add_flag("--enumerate-negation", r_enum_negation,
                  "phrase negated premises as the two remaining polarities");
    run->add_flag("--inject-aspect", r_inject_aspect,
                  "append the gold aspect term to prompts");

    auto* eval = app.add_subcommand(
        "eval", "Score a run artifact against its dataset's gold labels");
    std::string e_run, e_dataset, e_out;
    eval->add_option("--run", e_run, "run artifact directory")->required();
    eval->add_option("--dataset", e_dataset, "dataset directory or instances.jsonl")
        ->required();
    eval->add_option("--out", e_out, "write the report as JSON");

    auto* report = app.add_subcommand(
        "report", "Tabulate run scores, optionally beside the published tables");
    std::vector<std::string> p_runs;
    bool p_paper_ref = false;
    std::string p_setting = "zero-shot", p_out;
    report->add_option("--runs", p_runs, "run artifact directories");
    report->add_flag("--paper-ref", p_paper_ref,
                     "include the published reference scores");
    report->add_option("--setting", p_setting, "zero-shot or fine-tuned")
        ->check(CLI::IsMember({"zero-shot", "fine-tuned"}));
    report->add_option("--out", p_out, "write the rows as JSON");

    auto* delta = app.add_subcommand(
        "delta", "Two-dataset average improvement between two score files");
    std::string d_a, d_b, d_slice = "isa";
    delta->add_option("--a", d_a, "improved method's scores JSON")->required();
    delta->add_option("--b", d_b, "baseline method's scores JSON")->required();
    delta->add_option("--slice", d_slice, "all, isa, or esa")
        ->check(CLI::IsMember({"all", "isa", "esa"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*ingest) {
            return cmd_ingest(in_xml, in_annotations, in_out, in_name, in_domain,
                              in_split);
        }
        if (*run) {
            if (r_config.empty() && r_manifest.empty()) {
                std::cerr << "run requires --config or --from-manifest\n";
                return 1;
            }
            rcr::RunConfig cfg = r_manifest.empty()
                                     ? rcr::load_run_config(r_config)
                                     : rcr::run_config_from_manifest(r_manifest);
            if (run->count("--method") > 0) {
                cfg.method = rcr::method_from_string(r_method);
            }
            if (run->count("--seed") > 0) cfg.seed = r_seed;
            if (run->count("--parallelism") > 0) cfg.parallelism = r_parallelism;
            if (run->count("--backend") > 0) cfg.backend.endpoint_url = r_backend;
            if (run->count("--scripted") > 0) cfg.scripted_path = r_scripted;
            if (r_correction) cfg.correction_enabled = true;
            if (r_regenerate) {
                cfg.correction_enabled = true;
                cfg.correction_regenerate = true;
            }
            if (run->count("--template") > 0) cfg.template_path = r_template;
            if (run->count("--dataset") > 0) cfg.dataset_path = r_dataset;
            if (run->count("--out") > 0) cfg.output_dir = r_out;
            if (run->count("--cache") > 0) cfg.cache_dir = r_cache;
            if (run->count("--policy") > 0) {
                cfg.parser_policy = rcr::fallback_policy_from_string(r_policy);
            }
            if (run->count("--fixed-premise") > 0) {
                cfg.fixed_premise = rcr::polarity_from_string(r_premise);
            }
            if (r_fail_fast) cfg.fail_fast = true;
            if (run->count("--failure-threshold") > 0) {
                cfg.failure_threshold = r_threshold;
            }
            if (r_enum_negation) cfg.enumerate_negation = true;
            if (r_inject_aspect) cfg.inject_aspect = true;

            const rcr::RunArtifact artifact = rcr::execute_run(cfg);
            std::cout << "run complete: " << artifact.manifest.prediction_count
                      << "/" << artifact.manifest.instance_count << " instances, "
                      << artifact.manifest.failures.size() << " failures\n";
            if (!cfg.output_dir.empty()) {
                std::cout << "artifact written to " << cfg.output_dir << "\n";
            }
            return 0;
        }
        if (*eval) return cmd_eval(e_run, e_dataset, e_out);
        if (*report) {
            if (p_runs.empty() && !p_paper_ref) {
                std::cerr << "report requires --runs or --paper-ref\n";
                return 1;
            }
            return cmd_report(p_runs, p_paper_ref, p_setting, p_out);
        }
        if (*delta) return cmd_delta(d_a, d_b, d_slice);
    } catch (const rcr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
