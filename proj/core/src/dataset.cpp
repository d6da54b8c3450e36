#include "rcr/dataset.hpp"

#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "rcr/error.hpp"
#include "rcr/sha256.hpp"
#include "rcr/util.hpp"

namespace rcr {

ParsedXml parse_semeval_xml(const std::filesystem::path& file, DomainTag domain_tag,
                            Split split) {
    boost::property_tree::ptree doc;
    try {
        std::istringstream stream(read_file(file));
        boost::property_tree::read_xml(stream, doc);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw Error(ErrorKind::XmlMalformed, file.string() + ": " + e.what());
    }

    const auto sentences = doc.get_child_optional("sentences");
    if (!sentences) {
        throw Error(ErrorKind::XmlMalformed,
                    file.string() + ": missing <sentences> root element");
    }

    ParsedXml out;
    for (const auto& [tag, sentence] : *sentences) {
        if (tag != "sentence") continue;
        const auto sid = sentence.get_optional<std::string>("<xmlattr>.id");
        if (!sid) {
            throw Error(ErrorKind::XmlMalformed,
                        file.string() + ": <sentence> without id attribute");
        }
        const auto text = sentence.get_optional<std::string>("text");
        if (!text || text->empty()) {
            throw Error(ErrorKind::XmlMalformed,
                        file.string() + ": sentence " + *sid + " has no text");
        }

        const auto terms = sentence.get_child_optional("aspectTerms");
        if (!terms) continue;
        int aspect_index = 0;
        for (const auto& [term_tag, term] : *terms) {
            if (term_tag != "aspectTerm") continue;
            const int index = aspect_index++;
            const auto term_text = term.get_optional<std::string>("<xmlattr>.term");
            const auto polarity = term.get_optional<std::string>("<xmlattr>.polarity");
            if (!term_text || !polarity) {
                throw Error(ErrorKind::XmlMalformed,
                            file.string() + ": sentence " + *sid +
                                " has an aspectTerm without term/polarity");
            }
            if (*polarity == "conflict") {
                ++out.dropped_conflicts;
                continue;
            }
            const auto parsed = try_polarity_from_string(*polarity);
            if (!parsed) {
                throw Error(ErrorKind::SchemaViolation,
                            file.string() + ": sentence " + *sid +
                                ": unknown polarity \"" + *polarity + "\"");
            }
            SentenceInstance instance;
            instance.id = *sid + "#" + std::to_string(index);
            instance.text = *text;
            instance.aspect_term = *term_text;
            instance.gold_polarity = *parsed;
            instance.implicit = false;
            instance.domain_tag = domain_tag;
            instance.split = split;
            out.instances.push_back(std::move(instance));
        }
    }
    return out;
}

namespace {

std::string sentence_part(const std::string& instance_id) {
    const auto hash = instance_id.rfind('#');
    return hash == std::string::npos ? instance_id : instance_id.substr(0, hash);
}

std::string annotation_key(const std::string& sid, const std::string& term,
                           int occurrence) {
    return sid + "\x1f" + term + "\x1f" + std::to_string(occurrence);
}

}  // namespace

MergeReport merge_implicit_labels(std::vector<SentenceInstance>& instances,
                                  const std::filesystem::path& annotation_file) {
    // occurrence index per (sentence, term), counted over kept instances
    std::map<std::string, std::size_t> by_key;
    std::map<std::pair<std::string, std::string>, int> occurrence;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (!instances[i].aspect_term) continue;
        const std::string sid = sentence_part(instances[i].id);
        const int occ = occurrence[{sid, *instances[i].aspect_term}]++;
        by_key[annotation_key(sid, *instances[i].aspect_term, occ)] = i;
    }

    MergeReport report;
    std::set<std::string> seen;
    std::set<std::size_t> touched;
    std::istringstream lines(read_file(annotation_file));
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::string sid, term;
        int occ = 0;
        bool implicit = false;
        try {
            const auto ann = nlohmann::json::parse(line);
            sid = ann.at("sentence_id").get<std::string>();
            term = ann.at("aspect_term").get<std::string>();
            occ = ann.at("occurrence").get<int>();
            implicit = ann.at("implicit").get<bool>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::SchemaViolation,
                        annotation_file.string() + ":" + std::to_string(line_no) +
                            ": " + e.what());
        }
        const std::string key = annotation_key(sid, term, occ);
        if (!seen.insert(key).second) {
            throw Error(ErrorKind::DuplicateKey,
                        annotation_file.string() + ":" + std::to_string(line_no) +
                            ": duplicate annotation for " + sid + "/" + term + "/" +
                            std::to_string(occ));
        }
        const auto found = by_key.find(key);
        if (found == by_key.end()) {
            report.unmatched_keys.push_back(sid + "/" + term + "/" +
                                            std::to_string(occ));
            continue;
        }
        instances[found->second].implicit = implicit;
        touched.insert(found->second);
        ++report.annotated;
    }
    report.unannotated_defaulted_explicit =
        static_cast<int>(instances.size() - touched.size());
    return report;
}

void convert_annotations(const std::filesystem::path& input,
                         const std::filesystem::path& output) {
    const std::string text = read_file(input);
    std::vector<nlohmann::json> entries;
    const std::string head = trim(text);
    if (!head.empty() && head.front() == '[') {
        nlohmann::json arr;
        try {
            arr = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::SchemaViolation, input.string() + ": " + e.what());
        }
        for (const auto& e : arr) entries.push_back(e);
    } else {
        std::istringstream lines(text);
        std::string line;
        int line_no = 0;
        while (std::getline(lines, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            try {
                entries.push_back(nlohmann::json::parse(line));
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::SchemaViolation,
                            input.string() + ":" + std::to_string(line_no) + ": " +
                                e.what());
            }
        }
    }

    std::string out;
    for (const auto& e : entries) {
        nlohmann::ordered_json norm;
        try {
            norm["sentence_id"] = e.at("sentence_id").get<std::string>();
            norm["aspect_term"] = e.at("aspect_term").get<std::string>();
            norm["occurrence"] = e.value("occurrence", 0);
            norm["implicit"] = e.at("implicit").get<bool>();
        } catch (const nlohmann::json::exception& err) {
            throw Error(ErrorKind::SchemaViolation,
                        input.string() + ": " + err.what());
        }
        out += norm.dump();
        out += '\n';
    }
    write_file_atomic(output, out);
}

void save_normalized(const std::vector<SentenceInstance>& instances,
                     const std::filesystem::path& file) {
    std::set<std::string> ids;
    std::string out;
    for (const auto& x : instances) {
        if (!ids.insert(x.id).second) {
            throw Error(ErrorKind::DuplicateKey, "duplicate instance id " + x.id);
        }
        nlohmann::ordered_json j;
        j["id"] = x.id;
        j["text"] = x.text;
        j["aspect_term"] =
            x.aspect_term ? nlohmann::json(*x.aspect_term) : nlohmann::json(nullptr);
        j["gold_polarity"] = to_string(x.gold_polarity);
        j["implicit"] = x.implicit;
        j["domain_tag"] = to_string(x.domain_tag);
        j["split"] = to_string(x.split);
        out += j.dump();
        out += '\n';
    }
    write_file_atomic(file, out);
}

std::vector<SentenceInstance> load_normalized(const std::filesystem::path& file) {
    std::vector<SentenceInstance> instances;
    std::set<std::string> ids;
    std::istringstream lines(read_file(file));
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        SentenceInstance x;
        try {
            const auto j = nlohmann::json::parse(line);
            x.id = j.at("id").get<std::string>();
            x.text = j.at("text").get<std::string>();
            if (!j.at("aspect_term").is_null()) {
                x.aspect_term = j.at("aspect_term").get<std::string>();
            }
            x.gold_polarity = polarity_from_string(j.at("gold_polarity").get<std::string>());
            x.implicit = j.at("implicit").get<bool>();
            x.domain_tag = domain_tag_from_string(j.at("domain_tag").get<std::string>());
            x.split = split_from_string(j.at("split").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::SchemaViolation,
                        file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::SchemaViolation,
                        file.string() + ":" + std::to_string(line_no) + ": " +
                            e.message());
        }
        if (x.text.empty()) {
            throw Error(ErrorKind::SchemaViolation,
                        file.string() + ":" + std::to_string(line_no) +
                            ": empty text");
        }
        if (!ids.insert(x.id).second) {
            throw Error(ErrorKind::DuplicateKey,
                        file.string() + ":" + std::to_string(line_no) +
                            ": duplicate instance id " + x.id);
        }
        instances.push_back(std::move(x));
    }
    return instances;
}

void validate(const DatasetManifest& manifest) {
    const auto& c = manifest.counts;
    if (c.implicit_count + c.explicit_count != c.total) {
        throw Error(ErrorKind::SchemaViolation,
                    "manifest counts: implicit + explicit != total");
    }
    if (c.positive + c.negative + c.neutral != c.total) {
        throw Error(ErrorKind::SchemaViolation,
                    "manifest counts: per-polarity counts do not sum to total");
    }
}

nlohmann::ordered_json manifest_to_json(const DatasetManifest& manifest) {
    nlohmann::ordered_json j;
    j["name"] = manifest.name;
    j["domain_tag"] = to_string(manifest.domain_tag);
    j["counts"] = {
        {"total", manifest.counts.total},
        {"implicit", manifest.counts.implicit_count},
        {"explicit", manifest.counts.explicit_count},
        {"per_polarity",
         {{"positive", manifest.counts.positive},
          {"negative", manifest.counts.negative},
          {"neutral", manifest.counts.neutral}}},
    };
    j["dropped_conflicts"] = manifest.dropped_conflicts;
    j["annotations"] = {
        {"annotated", manifest.merge.annotated},
        {"unannotated_defaulted_explicit", manifest.merge.unannotated_defaulted_explicit},
        {"unmatched_keys", manifest.merge.unmatched_keys},
    };
    j["source_hashes"] = manifest.source_hashes;
    j["notes"] = manifest.notes;
    return j;
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.domain_tag = domain_tag_from_string(j.at("domain_tag").get<std::string>());
    const auto& c = j.at("counts");
    m.counts.total = c.at("total").get<int>();
    m.counts.implicit_count = c.at("implicit").get<int>();
    m.counts.explicit_count = c.at("explicit").get<int>();
    m.counts.positive = c.at("per_polarity").at("positive").get<int>();
    m.counts.negative = c.at("per_polarity").at("negative").get<int>();
    m.counts.neutral = c.at("per_polarity").at("neutral").get<int>();
    m.dropped_conflicts = j.at("dropped_conflicts").get<int>();
    const auto& a = j.at("annotations");
    m.merge.annotated = a.at("annotated").get<int>();
    m.merge.unannotated_defaulted_explicit =
        a.at("unannotated_defaulted_explicit").get<int>();
    m.merge.unmatched_keys = a.at("unmatched_keys").get<std::vector<std::string>>();
    m.source_hashes =
        j.at("source_hashes").get<std::map<std::string, std::string>>();
    m.notes = j.at("notes").get<std::vector<std::string>>();
    validate(m);
    return m;
}

DatasetManifest ingest_dataset(const std::filesystem::path& xml_file,
                               const std::filesystem::path& annotation_file,
                               const std::filesystem::path& out_dir,
                               const std::string& name, DomainTag domain_tag,
                               Split split) {
    auto parsed = parse_semeval_xml(xml_file, domain_tag, split);

    DatasetManifest manifest;
    manifest.name = name;
    manifest.domain_tag = domain_tag;
    manifest.dropped_conflicts = parsed.dropped_conflicts;
    manifest.source_hashes[xml_file.filename().string()] = sha256_file_hex(xml_file);
    if (!annotation_file.empty()) {
        manifest.merge = merge_implicit_labels(parsed.instances, annotation_file);
        manifest.source_hashes[annotation_file.filename().string()] =
            sha256_file_hex(annotation_file);
    } else {
        manifest.merge.unannotated_defaulted_explicit =
            static_cast<int>(parsed.instances.size());
    }
    manifest.notes.push_back("unannotated instances default to explicit");

    for (const auto& x : parsed.instances) {
        ++manifest.counts.total;
        ++(x.implicit ? manifest.counts.implicit_count : manifest.counts.explicit_count);
        switch (x.gold_polarity) {
            case Polarity::Positive: ++manifest.counts.positive; break;
            case Polarity::Negative: ++manifest.counts.negative; break;
            case Polarity::Neutral: ++manifest.counts.neutral; break;
        }
    }
    validate(manifest);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorKind::Io,
                    "cannot create " + out_dir.string() + ": " + ec.message());
    }
    save_normalized(parsed.instances, out_dir / "instances.jsonl");
    write_file_atomic(out_dir / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
    return manifest;
}

}  // namespace rcr
