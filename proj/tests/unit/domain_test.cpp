#include <map>
#include <set>
#include <string>

#include <doctest.h>

#include "rcr/domain.hpp"
#include "rcr/error.hpp"

using namespace rcr;

TEST_CASE("polarity strings round-trip through both directions") {
    for (Polarity p : kAllPolarities) {
        CHECK(polarity_from_string(to_string(p)) == p);
    }
    CHECK(to_string(Polarity::Positive) == "positive");
    CHECK(to_string(Polarity::Negative) == "negative");
    CHECK(to_string(Polarity::Neutral) == "neutral");
}

TEST_CASE("unknown polarity strings are rejected") {
    CHECK_FALSE(try_polarity_from_string("Positive").has_value());
    CHECK_FALSE(try_polarity_from_string("").has_value());
    CHECK_FALSE(try_polarity_from_string("pos").has_value());
    CHECK_THROWS_AS(polarity_from_string("mixed"), Error);
    try {
        polarity_from_string("mixed");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
        CHECK(std::string(e.what()).find("mixed") != std::string::npos);
    }
}

TEST_CASE("kAllPolarities fixes the canonical order") {
    REQUIRE(kAllPolarities.size() == 3);
    CHECK(kAllPolarities[0] == Polarity::Positive);
    CHECK(kAllPolarities[1] == Polarity::Negative);
    CHECK(kAllPolarities[2] == Polarity::Neutral);
}

TEST_CASE("negating an asserted premise flips its kind and keeps the polarity") {
    const Premise p = asserted(Polarity::Positive);
    CHECK(p.kind == PremiseKind::Assert);
    const Premise n = negate_premise(p);
    CHECK(n.kind == PremiseKind::Negate);
    CHECK(n.polarity == Polarity::Positive);
}

TEST_CASE("negating a negated premise is an error") {
    const Premise n = negate_premise(asserted(Polarity::Neutral));
    CHECK_THROWS_AS(negate_premise(n), Error);
    try {
        negate_premise(n);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
}

TEST_CASE("premise matching covers the full assert and negate table") {
    for (Polarity p : kAllPolarities) {
        for (Polarity y : kAllPolarities) {
            CHECK(premise_matches(asserted(p), y) == (p == y));
            CHECK(premise_matches(negate_premise(asserted(p)), y) == (p != y));
        }
    }
}

TEST_CASE("premises round-trip through JSON") {
    for (Polarity p : kAllPolarities) {
        const Premise a = asserted(p);
        CHECK(premise_from_json(premise_to_json(a)) == a);
        const Premise n = negate_premise(a);
        CHECK(premise_from_json(premise_to_json(n)) == n);
    }
    CHECK(premise_to_json(asserted(Polarity::Positive))["kind"] == "assert");
    CHECK(premise_to_json(negate_premise(asserted(Polarity::Positive)))["kind"] ==
          "negate");
}

TEST_CASE("premise JSON with an unknown kind is a schema violation") {
    nlohmann::json j{{"kind", "deny"}, {"polarity", "positive"}};
    CHECK_THROWS_AS(premise_from_json(j), Error);
    try {
        premise_from_json(j);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SchemaViolation);
    }
}

TEST_CASE("domain tag and split strings round-trip") {
    for (DomainTag t : {DomainTag::Laptop, DomainTag::Restaurant, DomainTag::Other}) {
        CHECK(domain_tag_from_string(to_string(t)) == t);
    }
    for (Split s : {Split::Train, Split::Test}) {
        CHECK(split_from_string(to_string(s)) == s);
    }
    CHECK_THROWS_AS(domain_tag_from_string("kitchen"), Error);
    CHECK_THROWS_AS(split_from_string("dev"), Error);
}

TEST_CASE("fnv1a64 matches its published constants") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("splitmix64 matches the reference sequence") {
    CHECK(splitmix64(1) == 0x910a2dec89025cc1ULL);
}

TEST_CASE("hypothesis sampling is a pure function of seed and instance id") {
    const Premise a = sample_hypothesis(7, "lap-1#0");
    for (int i = 0; i < 5; ++i) {
        CHECK(sample_hypothesis(7, "lap-1#0") == a);
    }
    CHECK(a.kind == PremiseKind::Assert);
}

TEST_CASE("hypothesis sampling holds its frozen draws") {
    CHECK(sample_hypothesis(0, "a").polarity == Polarity::Negative);
    CHECK(sample_hypothesis(0, "b").polarity == Polarity::Negative);
    CHECK(sample_hypothesis(42, "a").polarity == Polarity::Positive);
    CHECK(sample_hypothesis(0, "lap-1#0").polarity == Polarity::Neutral);
    CHECK(sample_hypothesis(7, "rest-2#1").polarity == Polarity::Positive);
}

TEST_CASE("hypothesis sampling varies across seeds and ids") {
    std::set<Polarity> across_seeds;
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
        across_seeds.insert(sample_hypothesis(seed, "some-id#0").polarity);
    }
    CHECK(across_seeds.size() == 3);

    std::set<Polarity> across_ids;
    for (int i = 0; i < 16; ++i) {
        across_ids.insert(sample_hypothesis(3, "id-" + std::to_string(i)).polarity);
    }
    CHECK(across_ids.size() == 3);
}

TEST_CASE("hypothesis sampling stays roughly uniform over many ids") {
    std::map<Polarity, int> counts;
    const int n = 3000;
    for (int i = 0; i < n; ++i) {
        counts[sample_hypothesis(9, "uniform-" + std::to_string(i)).polarity]++;
    }
    for (Polarity p : kAllPolarities) {
        CHECK(counts[p] > n / 3 - n / 10);
        CHECK(counts[p] < n / 3 + n / 10);
    }
}
