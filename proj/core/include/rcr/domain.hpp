#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace rcr {

// The three-way sentiment label space. Serializes as lowercase strings.
enum class Polarity { Positive, Negative, Neutral };

inline constexpr std::array<Polarity, 3> kAllPolarities = {
    Polarity::Positive, Polarity::Negative, Polarity::Neutral};

std::string_view to_string(Polarity p);
std::optional<Polarity> try_polarity_from_string(std::string_view s);
Polarity polarity_from_string(std::string_view s);  // throws Error on unknown value

// A polarity hypothesis injected into a reasoning prompt. Assert(p) asserts
// p; Negate(p) denotes the two-element complement of p (e.g. Negate(Positive)
// stands for {Negative, Neutral}).
enum class PremiseKind { Assert, Negate };

struct Premise {
    PremiseKind kind = PremiseKind::Assert;
    Polarity polarity = Polarity::Positive;

    bool matches(Polarity y) const {
        return kind == PremiseKind::Assert ? y == polarity : y != polarity;
    }
    friend bool operator==(const Premise&, const Premise&) = default;
};

Premise asserted(Polarity p);
Premise negate_premise(const Premise& p);  // throws on a premise already negated
bool premise_matches(const Premise& p, Polarity y);

nlohmann::json premise_to_json(const Premise& p);
Premise premise_from_json(const nlohmann::json& j);

enum class DomainTag { Laptop, Restaurant, Other };
enum class Split { Train, Test };

std::string_view to_string(DomainTag t);
DomainTag domain_tag_from_string(std::string_view s);
std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

// One aspect-labeled sentence with gold polarity and implicitness flag.
struct SentenceInstance {
    std::string id;
    std::string text;
    std::optional<std::string> aspect_term;
    Polarity gold_polarity = Polarity::Neutral;
    bool implicit = false;
    DomainTag domain_tag = DomainTag::Other;
    Split split = Split::Test;
};

// Hash primitives backing the hypothesis sampler. Fixed so that any
// implementation of this pipeline draws identical hypotheses.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

// Draws the asserted premise for an instance: uniform over the three
// polarities, a pure function of (seed, instance_id).
Premise sample_hypothesis(std::uint64_t seed, std::string_view instance_id);

}  // namespace rcr
