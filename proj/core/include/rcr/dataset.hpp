#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcr/domain.hpp"

namespace rcr {

struct ParsedXml {
    std::vector<SentenceInstance> instances;
    int dropped_conflicts = 0;
};

// One instance per aspectTerm element; "conflict"-labeled aspects are
// dropped and counted since the three-way label space cannot host them.
// Instance ids are "<sentence-id>#<aspect-index>" with the index counting
// every aspectTerm element of the sentence, dropped ones included.
ParsedXml parse_semeval_xml(const std::filesystem::path& file,
                            DomainTag domain_tag = DomainTag::Other,
                            Split split = Split::Test);

struct MergeReport {
    int annotated = 0;
    int unannotated_defaulted_explicit = 0;
    std::vector<std::string> unmatched_keys;
};

// Applies implicit/explicit markers from a JSON Lines annotation file of
// {"sentence_id", "aspect_term", "occurrence", "implicit"}. The occurrence
// index counts repeated aspect terms within one sentence. Unmatched keys are
// reported; unannotated instances stay explicit.
MergeReport merge_implicit_labels(std::vector<SentenceInstance>& instances,
                                  const std::filesystem::path& annotation_file);

// Rewrites an upstream annotation file (JSON array or JSON Lines, occurrence
// optional) into the normalized annotation JSONL above.
void convert_annotations(const std::filesystem::path& input,
                         const std::filesystem::path& output);

// JSON Lines, fixed key order (id, text, aspect_term, gold_polarity,
// implicit, domain_tag, split); load(save(x)) == x.
void save_normalized(const std::vector<SentenceInstance>& instances,
                     const std::filesystem::path& file);
std::vector<SentenceInstance> load_normalized(const std::filesystem::path& file);

struct DatasetCounts {
    int total = 0;
    int implicit_count = 0;
    int explicit_count = 0;
    int positive = 0;
    int negative = 0;
    int neutral = 0;
};

struct DatasetManifest {
    std::string name;
    DomainTag domain_tag = DomainTag::Other;
    DatasetCounts counts;
    int dropped_conflicts = 0;
    MergeReport merge;
    std::map<std::string, std::string> source_hashes;
    std::vector<std::string> notes;
};

void validate(const DatasetManifest& manifest);  // count identities must hold
nlohmann::ordered_json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);

// parse + merge + save; writes instances.jsonl and manifest.json into
// out_dir. Pass an empty annotation path to skip the merge.
DatasetManifest ingest_dataset(const std::filesystem::path& xml_file,
                               const std::filesystem::path& annotation_file,
                               const std::filesystem::path& out_dir,
                               const std::string& name, DomainTag domain_tag,
                               Split split);

}  // namespace rcr
