#include <doctest.h>

#include <regex>
#include <sstream>

#include "support/oracles.hpp"
#include "veilkit/errors.hpp"
#include "veilkit/synth.hpp"
#include "veilkit/unicode.hpp"

using namespace veilkit;

TEST_CASE("entity surfaces match their grammars") {
    Rng rng(12345);
    const std::regex ipv4(R"((\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3}))");
    const std::regex ipv6(R"(([0-9a-f]{1,4}:){7}[0-9a-f]{1,4})");
    const std::regex eth(R"(0x[0-9a-f]{40})");
    const std::regex btc(R"([13][1-9A-HJ-NP-Za-km-z]{25,33})");
    const std::regex ltc(R"([LM][1-9A-HJ-NP-Za-km-z]{26,33})");

    for (int i = 0; i < 200; ++i) {
        CHECK(std::regex_match(gen_entity("IPV4", rng), ipv4));
        CHECK(std::regex_match(gen_entity("IPV6", rng), ipv6));
        CHECK(std::regex_match(gen_entity("ETHEREUM_ADDRESS", rng), eth));
        CHECK(std::regex_match(gen_entity("POLYGON_ADDRESS", rng), eth));
        CHECK(std::regex_match(gen_entity("BITCOIN_ADDRESS", rng), btc));
        CHECK(std::regex_match(gen_entity("LITECOIN_ADDRESS", rng), ltc));
    }
    CHECK_THROWS_AS(gen_entity("NOT_A_LABEL", rng), ConfigError);
}

TEST_CASE("private addresses live in the reserved blocks") {
    Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        const std::string addr = gen_entity("IPV4_PRIVATE", rng);
        unsigned a = 0, b = 0;
        std::sscanf(addr.c_str(), "%u.%u", &a, &b);
        const bool in_10 = a == 10;
        const bool in_172 = a == 172 && b >= 16 && b < 32;
        const bool in_192 = a == 192 && b == 168;
        CHECK((in_10 || in_172 || in_192));
    }
}

TEST_CASE("public addresses avoid every reserved block") {
    Rng rng(98);
    for (int i = 0; i < 500; ++i) {
        const std::string addr = gen_entity("IPV4_PUBLIC", rng);
        unsigned a = 0, b = 0;
        std::sscanf(addr.c_str(), "%u.%u", &a, &b);
        CHECK(a != 0);
        CHECK(a != 10);
        CHECK(a != 127);
        CHECK(a < 224);
        CHECK_FALSE((a == 172 && b >= 16 && b < 32));
        CHECK_FALSE((a == 192 && b == 168));
        CHECK_FALSE((a == 169 && b == 254));
    }
}

TEST_CASE("generated ibans pass the independent mod-97 verifier") {
    Rng rng(12345);
    for (int i = 0; i < 500; ++i) {
        const std::string iban = gen_entity("IBAN", rng);
        CHECK(oracles::iban_mod97_valid(iban));
    }
    // The verifier itself rejects corruption.
    std::string broken = gen_entity("IBAN", rng);
    broken[4] = broken[4] == '9' ? '8' : '9';
    CHECK_FALSE(oracles::iban_mod97_valid(broken));
}

TEST_CASE("corpus generation is deterministic and self-consistent") {
    SynthSpec spec;
    spec.seed = 12345;
    spec.paragraphs = 40;
    spec.sentences_per_paragraph = 4;
    spec.entities_per_paragraph = 5;
    spec.entity_mix = {{"NAME", 0.5}, {"IBAN", 0.3}, {"IPV4", 0.2}};

    const auto corpus_a = gen_corpus(spec);
    const auto corpus_b = gen_corpus(spec);
    REQUIRE(corpus_a.size() == 40);

    std::ostringstream ser_a, ser_b;
    write_standoff_jsonl(ser_a, corpus_a);
    write_standoff_jsonl(ser_b, corpus_b);
    CHECK(ser_a.str() == ser_b.str());  // byte-identical

    SynthSpec other = spec;
    other.seed = 54321;
    std::ostringstream ser_c;
    write_standoff_jsonl(ser_c, gen_corpus(other));
    CHECK(ser_a.str() != ser_c.str());

    for (const auto& adoc : corpus_a) {
        CHECK(adoc.spans.size() == 5);
        for (const auto& s : adoc.spans) {
            CHECK(s.surface == unicode::cp_slice(adoc.doc.text, s.start, s.end));
            CHECK(s.source == "synth");
        }
        // Spans aligned to words: bounded by whitespace/punctuation or edges.
        for (const auto& s : adoc.spans) {
            if (s.start > 0) {
                const std::string before = unicode::cp_slice(adoc.doc.text, s.start - 1, s.start);
                CHECK(before == " ");
            }
            if (s.end < unicode::cp_length(adoc.doc.text)) {
                const std::string after = unicode::cp_slice(adoc.doc.text, s.end, s.end + 1);
                CHECK((after == " " || after == "."));
            }
        }
    }
}

TEST_CASE("single-label mix labels every gold span") {
    SynthSpec spec;
    spec.paragraphs = 10;
    spec.entities_per_paragraph = 4;
    spec.entity_mix = {{"NAME", 1.0}};
    for (const auto& adoc : gen_corpus(spec))
        for (const auto& s : adoc.spans) CHECK(s.label == "NAME");
}

TEST_CASE("entity histogram converges to the configured mix") {
    SynthSpec spec;
    spec.seed = 7;
    spec.paragraphs = 1250;  // 1250 * 8 = 10^4 entities
    spec.sentences_per_paragraph = 6;
    spec.entities_per_paragraph = 8;
    spec.entity_mix = {{"NAME", 0.5}, {"EMAIL", 0.3}, {"PHONE", 0.2}};

    std::map<std::string, double> histogram;
    std::size_t total = 0;
    for (const auto& adoc : gen_corpus(spec)) {
        for (const auto& s : adoc.spans) {
            ++histogram[s.label];
            ++total;
        }
    }
    REQUIRE(total == 10000);
    CHECK(histogram["NAME"] / total == doctest::Approx(0.5).epsilon(0.05));
    CHECK(histogram["EMAIL"] / total == doctest::Approx(0.3).epsilon(0.05));
    CHECK(histogram["PHONE"] / total == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("paragraph too small for the entity budget is an error") {
    SynthSpec spec;
    spec.paragraphs = 3;
    spec.sentences_per_paragraph = 1;
    spec.entities_per_paragraph = 50;  // sentences hold at most 12 words
    spec.entity_mix = {{"NAME", 1.0}};
    CHECK_THROWS_WITH_AS(gen_corpus(spec), doctest::Contains("synth-"), DataError);
}

TEST_CASE("spec json round trip rejects unknown fields") {
    const nlohmann::json good = {{"seed", 9},
                                 {"paragraphs", 3},
                                 {"sentences_per_paragraph", 2},
                                 {"entities_per_paragraph", 1},
                                 {"entity_mix", {{"NAME", 1.0}}}};
    const auto spec = SynthSpec::from_json(good);
    CHECK(spec.seed == 9);
    CHECK(spec.paragraphs == 3);
    CHECK(SynthSpec::from_json(spec.to_json()).seed == 9);

    nlohmann::json bad = good;
    bad["surprise"] = true;
    CHECK_THROWS_AS(SynthSpec::from_json(bad), ConfigError);

    nlohmann::json bad_label = good;
    bad_label["entity_mix"] = {{"WHAT", 1.0}};
    CHECK_THROWS_AS(SynthSpec::from_json(bad_label), ConfigError);

    nlohmann::json negative = good;
    negative["entity_mix"] = {{"NAME", -1.0}};
    CHECK_THROWS_AS(SynthSpec::from_json(negative), ConfigError);
}
