#include "rcr/prompts.hpp"

#include <cctype>
#include <sstream>
#include <utility>

#include "rcr/error.hpp"
#include "rcr/records.hpp"
#include "rcr/sha256.hpp"
#include "rcr/util.hpp"

namespace rcr {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

PromptMessage user_msg(std::string content) {
    return PromptMessage{Role::User, std::move(content)};
}

PromptMessage assistant_msg(std::string content) {
    return PromptMessage{Role::Assistant, std::move(content)};
}

void validate_conversation(const Conversation& conv) {
    if (conv.empty()) {
        throw Error(ErrorKind::InvalidArgument, "conversation is empty");
    }
    if (conv.front().role == Role::Assistant) {
        throw Error(ErrorKind::InvalidArgument,
                    "conversation must open with a system or user message");
    }
    for (std::size_t i = 0; i < conv.size(); ++i) {
        if (conv[i].content.empty()) {
            throw Error(ErrorKind::InvalidArgument,
                        "conversation message " + std::to_string(i) + " is empty");
        }
    }
}

TemplateSet TemplateSet::builtin() {
    TemplateSet set;
    set.templates_ = {
        {"direct", "Given sentence \"{X}\", what is its sentiment polarity?"},
        {"independence",
         "Independently analyze the sentiment of this sentence, ignoring any previous "
         "responses."},
        {"premise",
         "Given sentence \"{X}\", assuming the sentiment polarity of sentence X is "
         "{PREMISE}, answer the following questions: 1) What is the aspect entity "
         "described in sentence X? 2) What is the significance of this aspect entity "
         "in sentence X?"},
        {"negate-phrase", "non-{POLARITY}"},
        {"negate-enum", "{POLARITY_1} or {POLARITY_2}"},
        {"contrast-record",
         "{INDEX}) Given that the sentiment polarity of X is {PREMISE}, the aspect "
         "term described is {ASPECT} and the inference is {RATIONALE}."},
        {"contrast-pair",
         "Given sentence \"{X}\", two inferences were made:\n{RECORD_1}\n{RECORD_2}\n"
         "Which inference is more reasonable? Please make a comprehensive judgment "
         "and determine the sentiment polarity y of sentence X."},
        {"contrast-triple",
         "Given sentence \"{X}\", three inferences were made:\n{RECORD_1}\n{RECORD_2}\n"
         "{RECORD_3}\nAmong the three inferences above, which one is the most "
         "reasonable? Please make a comprehensive judgment and determine the "
         "sentiment polarity y of sentence X?"},
        {"correction",
         "Given that the sentiment polarity of X is {PREMISE}, the aspect term "
         "described is {ASPECT} and the inference is {RATIONALE}. Please evaluate "
         "the sentiment polarity based on the inferred aspect term and reasoning "
         "process."},
        {"thor-hop-1",
         "Given sentence \"{X}\", which specific aspect of the sentence is being "
         "discussed?"},
        {"thor-hop-2",
         "Based on the aspect identified, what is the underlying opinion on it "
         "expressed by sentence X?"},
        {"thor-hop-3",
         "Based on the aspect and the underlying opinion, what is the sentiment "
         "polarity of sentence X?"},
        {"aspect-hint", "Note that the aspect term of sentence X is \"{ASPECT}\"."},
        {"clarification",
         "Answer with exactly one word: positive, negative, or neutral."},
    };
    return set;
}

TemplateSet TemplateSet::load_file(const std::string& path) {
    TemplateSet set = builtin();
    const std::string text = read_file(path);

    std::istringstream lines(text);
    std::string line;
    std::string name;
    std::vector<std::string> body;
    bool seen_section = false;

    auto flush = [&]() {
        if (!seen_section) return;
        while (!body.empty() && trim(body.back()).empty()) body.pop_back();
        while (!body.empty() && trim(body.front()).empty()) body.erase(body.begin());
        if (body.empty()) {
            throw Error(ErrorKind::TemplateFile,
                        "template \"" + name + "\" in " + path + " is empty");
        }
        std::string joined;
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (i > 0) joined += '\n';
            joined += body[i];
        }
        set.templates_[name] = std::move(joined);
        body.clear();
    };

    std::vector<std::string> seen_names;
    while (std::getline(lines, line)) {
        if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
            flush();
            name = line.substr(1, line.size() - 2);
            if (set.templates_.count(name) == 0) {
                throw Error(ErrorKind::TemplateFile,
                            "unknown template \"" + name + "\" in " + path);
            }
            for (const auto& prior : seen_names) {
                if (prior == name) {
                    throw Error(ErrorKind::TemplateFile,
                                "duplicate template \"" + name + "\" in " + path);
                }
            }
            seen_names.push_back(name);
            seen_section = true;
            continue;
        }
        if (!seen_section) {
            const std::string t = trim(line);
            if (!t.empty() && t.front() != '#') {
                throw Error(ErrorKind::TemplateFile,
                            "content before first [section] in " + path);
            }
            continue;
        }
        body.push_back(line);
    }
    flush();
    return set;
}

std::string TemplateSet::render(
    const std::string& name,
    const std::map<std::string, std::string>& bindings) const {
    const auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw Error(ErrorKind::TemplateRender, "unknown template \"" + name + "\"");
    }
    const std::string& tpl = it->second;

    std::string out;
    out.reserve(tpl.size());
    std::size_t i = 0;
    while (i < tpl.size()) {
        if (tpl[i] == '{') {
            std::size_t j = i + 1;
            while (j < tpl.size() &&
                   (std::isupper(static_cast<unsigned char>(tpl[j])) ||
                    std::isdigit(static_cast<unsigned char>(tpl[j])) || tpl[j] == '_')) {
                ++j;
            }
            if (j > i + 1 && j < tpl.size() && tpl[j] == '}') {
                const std::string key = tpl.substr(i + 1, j - i - 1);
                const auto bound = bindings.find(key);
                if (bound == bindings.end()) {
                    throw Error(ErrorKind::TemplateRender,
                                "unbound placeholder {" + key + "} in template \"" +
                                    name + "\"");
                }
                out += bound->second;
                i = j + 1;
                continue;
            }
        }
        out += tpl[i++];
    }
    return out;
}

std::string TemplateSet::sha256() const {
    std::string canon;
    for (const auto& [name, body] : templates_) {
        canon += '[';
        canon += name;
        canon += "]\n";
        canon += body;
        canon += '\n';
    }
    return sha256_hex(canon);
}

std::string premise_phrase(const TemplateSet& templates, const Premise& premise,
                           const RenderOptions& options) {
    if (premise.kind == PremiseKind::Assert) {
        return std::string(to_string(premise.polarity));
    }
    if (options.enumerate_negation) {
        std::vector<std::string> others;
        for (Polarity p : kAllPolarities) {
            if (p != premise.polarity) others.emplace_back(to_string(p));
        }
        return templates.render("negate-enum",
                                {{"POLARITY_1", others[0]}, {"POLARITY_2", others[1]}});
    }
    return templates.render("negate-phrase",
                            {{"POLARITY", std::string(to_string(premise.polarity))}});
}

namespace {

void maybe_append_aspect_hint(const TemplateSet& templates, const SentenceInstance& x,
                              const RenderOptions& options, std::string& content) {
    if (options.inject_aspect && x.aspect_term) {
        content += ' ';
        content += templates.render("aspect-hint", {{"ASPECT", *x.aspect_term}});
    }
}

}  // namespace

Conversation render_direct_prompt(const TemplateSet& templates,
                                  const SentenceInstance& x,
                                  const RenderOptions& options) {
    std::string content = templates.render("direct", {{"X", x.text}});
    maybe_append_aspect_hint(templates, x, options, content);
    return {user_msg(std::move(content))};
}

Conversation render_premise_prompt(const TemplateSet& templates,
                                   const SentenceInstance& x,
                                   const Premise& premise, bool isolate,
                                   const RenderOptions& options) {
    std::string content = templates.render(
        "premise",
        {{"X", x.text}, {"PREMISE", premise_phrase(templates, premise, options)}});
    maybe_append_aspect_hint(templates, x, options, content);
    if (isolate) {
        content = templates.render("independence", {}) + "\n" + content;
    }
    return {user_msg(std::move(content))};
}

Conversation render_contrast_prompt(const TemplateSet& templates,
                                    const SentenceInstance& x,
                                    const std::vector<ReasoningRecord>& records,
                                    const RenderOptions& options) {
    if (records.size() != 2 && records.size() != 3) {
        throw Error(ErrorKind::InvalidArgument,
                    "contrast prompt takes 2 or 3 records, got " +
                        std::to_string(records.size()));
    }
    std::map<std::string, std::string> bindings{{"X", x.text}};
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (!rec.premise) {
            throw Error(ErrorKind::InvalidArgument,
                        "contrast record " + std::to_string(i + 1) + " has no premise");
        }
        bindings["RECORD_" + std::to_string(i + 1)] = templates.render(
            "contrast-record",
            {{"INDEX", std::to_string(i + 1)},
             {"PREMISE", premise_phrase(templates, *rec.premise, options)},
             {"ASPECT", rec.aspect_answer},
             {"RATIONALE", rec.rationale}});
    }
    const char* name = records.size() == 2 ? "contrast-pair" : "contrast-triple";
    return {user_msg(templates.render(name, bindings))};
}

Conversation render_correction_prompt(const TemplateSet& templates,
                                      const ReasoningRecord& record,
                                      const RenderOptions& options) {
    if (!record.premise) {
        throw Error(ErrorKind::InvalidArgument, "correction record has no premise");
    }
    if (record.aspect_answer.empty() || record.rationale.empty()) {
        throw Error(ErrorKind::InvalidArgument,
                    "correction record needs a non-empty aspect answer and rationale");
    }
    return {user_msg(templates.render(
        "correction",
        {{"PREMISE", premise_phrase(templates, *record.premise, options)},
         {"ASPECT", record.aspect_answer},
         {"RATIONALE", record.rationale}}))};
}

Conversation render_thor_hop(const TemplateSet& templates,
                             const SentenceInstance& x, int hop,
                             const std::vector<std::string>& prior_answers,
                             const RenderOptions& options) {
    if (hop < 1 || hop > 3) {
        throw Error(ErrorKind::InvalidArgument,
                    "hop must be 1, 2, or 3, got " + std::to_string(hop));
    }
    if (prior_answers.size() != static_cast<std::size_t>(hop - 1)) {
        throw Error(ErrorKind::InvalidArgument,
                    "hop " + std::to_string(hop) + " expects " +
                        std::to_string(hop - 1) + " prior answers, got " +
                        std::to_string(prior_answers.size()));
    }
    Conversation conv;
    for (int k = 1; k <= hop; ++k) {
        std::map<std::string, std::string> bindings;
        if (k == 1) bindings["X"] = x.text;
        std::string content =
            templates.render("thor-hop-" + std::to_string(k), bindings);
        if (k == 1) maybe_append_aspect_hint(templates, x, options, content);
        conv.push_back(user_msg(std::move(content)));
        if (k < hop) conv.push_back(assistant_msg(prior_answers[k - 1]));
    }
    return conv;
}

}  // namespace rcr
