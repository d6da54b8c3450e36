#include "rcr/domain.hpp"

#include "rcr/error.hpp"

namespace rcr {

std::string_view to_string(Polarity p) {
    switch (p) {
        case Polarity::Positive: return "positive";
        case Polarity::Negative: return "negative";
        case Polarity::Neutral: return "neutral";
    }
    return "neutral";
}

std::optional<Polarity> try_polarity_from_string(std::string_view s) {
    if (s == "positive") return Polarity::Positive;
    if (s == "negative") return Polarity::Negative;
    if (s == "neutral") return Polarity::Neutral;
    return std::nullopt;
}

Polarity polarity_from_string(std::string_view s) {
    if (auto p = try_polarity_from_string(s)) return *p;
    throw Error(ErrorKind::InvalidArgument,
                "unknown polarity \"" + std::string(s) + "\"");
}

Premise asserted(Polarity p) { return Premise{PremiseKind::Assert, p}; }

Premise negate_premise(const Premise& p) {
    if (p.kind == PremiseKind::Negate) {
        throw Error(ErrorKind::InvalidArgument,
                    "cannot negate an already negated premise");
    }
    return Premise{PremiseKind::Negate, p.polarity};
}

bool premise_matches(const Premise& p, Polarity y) { return p.matches(y); }

nlohmann::json premise_to_json(const Premise& p) {
    return nlohmann::json{
        {"kind", p.kind == PremiseKind::Assert ? "assert" : "negate"},
        {"polarity", to_string(p.polarity)},
    };
}

Premise premise_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    Premise p;
    if (kind == "assert") {
        p.kind = PremiseKind::Assert;
    } else if (kind == "negate") {
        p.kind = PremiseKind::Negate;
    } else {
        throw Error(ErrorKind::SchemaViolation,
                    "premise kind must be \"assert\" or \"negate\", got \"" + kind + "\"");
    }
    p.polarity = polarity_from_string(j.at("polarity").get<std::string>());
    return p;
}

std::string_view to_string(DomainTag t) {
    switch (t) {
        case DomainTag::Laptop: return "laptop";
        case DomainTag::Restaurant: return "restaurant";
        case DomainTag::Other: return "other";
    }
    return "other";
}

DomainTag domain_tag_from_string(std::string_view s) {
    if (s == "laptop") return DomainTag::Laptop;
    if (s == "restaurant") return DomainTag::Restaurant;
    if (s == "other") return DomainTag::Other;
    throw Error(ErrorKind::InvalidArgument,
                "unknown domain tag \"" + std::string(s) + "\"");
}

std::string_view to_string(Split s) {
    return s == Split::Train ? "train" : "test";
}

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    throw Error(ErrorKind::InvalidArgument,
                "unknown split \"" + std::string(s) + "\"");
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Premise sample_hypothesis(std::uint64_t seed, std::string_view instance_id) {
    const std::uint64_t h = splitmix64(seed ^ fnv1a64(instance_id));
    return asserted(kAllPolarities[h % 3]);
}

}  // namespace rcr
