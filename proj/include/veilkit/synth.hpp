#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "veilkit/corpus.hpp"
#include "veilkit/rng.hpp"

namespace veilkit {

// Labels the generator can produce: the canonical PII set plus the classes
// missing from the training corpora (IPs, IBAN, blockchain addresses).
const std::set<std::string>& synth_labels();

struct SynthSpec {
    std::uint64_t seed = 12345;
    std::size_t paragraphs = 10;              // one document per paragraph
    std::size_t sentences_per_paragraph = 5;
    std::size_t entities_per_paragraph = 3;
    std::map<std::string, double> entity_mix; // label -> weight

    void validate() const;  // throws ConfigError

    static SynthSpec from_json(const nlohmann::json& j);  // unknown fields rejected
    nlohmann::json to_json() const;
};

// One syntactically valid surface form for the label. IBANs carry valid
// mod-97 check digits; the other classes are validated by surface grammar
// only.
std::string gen_entity(const std::string& label, Rng& rng);

// Filler paragraphs with randomly chosen words swapped for generated
// entities; every swap is recorded as a gold span. Deterministic under
// spec.seed.
std::vector<AnnotatedDocument> gen_corpus(const SynthSpec& spec);

} // namespace veilkit
