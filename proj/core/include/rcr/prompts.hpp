#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rcr/domain.hpp"

namespace rcr {

struct ReasoningRecord;

enum class Role { System, User, Assistant };

std::string_view to_string(Role r);

struct PromptMessage {
    Role role = Role::User;
    std::string content;

    friend bool operator==(const PromptMessage&, const PromptMessage&) = default;
};

// An ordered exchange, first message System or User, every content non-empty.
using Conversation = std::vector<PromptMessage>;

PromptMessage user_msg(std::string content);
PromptMessage assistant_msg(std::string content);

void validate_conversation(const Conversation& conv);  // throws Error on violation

// Named prompt templates with {PLACEHOLDER} slots. The built-in set carries
// the default wording; a template file can override individual entries for
// prompt ablations without code changes.
class TemplateSet {
public:
    static TemplateSet builtin();
    static TemplateSet load_file(const std::string& path);

    // Substitutes {NAME} placeholders from `bindings`. Unknown template names
    // and unbound placeholders are render errors.
    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& bindings) const;

    bool has(const std::string& name) const { return templates_.count(name) > 0; }
    std::string sha256() const;

private:
    std::map<std::string, std::string> templates_;
};

struct RenderOptions {
    // Phrase a negated premise as "negative or neutral" instead of "non-positive".
    bool enumerate_negation = false;
    // Append the gold aspect term to direct and premise prompts (ablation only;
    // the default templates ask the model to identify the entity itself).
    bool inject_aspect = false;
};

// Textual form of a premise as it appears inside a prompt, e.g. "positive"
// or "non-positive" (or "negative or neutral" when enumerating).
std::string premise_phrase(const TemplateSet& templates, const Premise& premise,
                           const RenderOptions& options = {});

Conversation render_direct_prompt(const TemplateSet& templates,
                                  const SentenceInstance& x,
                                  const RenderOptions& options = {});

// Single user message asking for the aspect entity and its significance under
// the premise. isolate=true prepends the independence directive.
Conversation render_premise_prompt(const TemplateSet& templates,
                                   const SentenceInstance& x,
                                   const Premise& premise, bool isolate,
                                   const RenderOptions& options = {});

// Numbered enumeration of 2 or 3 reasoning records followed by the
// arity-appropriate comparison question.
Conversation render_contrast_prompt(const TemplateSet& templates,
                                    const SentenceInstance& x,
                                    const std::vector<ReasoningRecord>& records,
                                    const RenderOptions& options = {});

// Restates a record's aspect answer and rationale and asks the model to
// re-infer the polarity.
Conversation render_correction_prompt(const TemplateSet& templates,
                                      const ReasoningRecord& record,
                                      const RenderOptions& options = {});

// Three-hop chain: aspect, then implicit opinion, then polarity. Prior hop
// answers enter the conversation verbatim as assistant turns.
Conversation render_thor_hop(const TemplateSet& templates,
                             const SentenceInstance& x, int hop,
                             const std::vector<std::string>& prior_answers,
                             const RenderOptions& options = {});

}  // namespace rcr
