#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "veilkit/corpus.hpp"

namespace veilkit {

enum class Strategy { substitute, redact, mask };

Strategy strategy_from_string(const std::string& name);
std::string strategy_to_string(Strategy s);

struct AnonymizerConfig {
    Strategy strategy = Strategy::substitute;
    std::string salt;          // opaque bytes, may be empty
    std::size_t hash_len = 8;  // placeholder hex digits, [4, 64]
    char mask_char = '*';

    // Test mode reproducing a per-occurrence-random baseline: each occurrence
    // is additionally salted with its document id and position, so repeated
    // tokens stop mapping to one placeholder. Not a claim about any external
    // tool's behavior.
    bool simulate_inline = false;

    void validate() const;  // throws ConfigError
};

// "<LABEL_h>" where h is the first hash_len lowercase hex digits of
// SHA-256(salt || 0x00 || label || 0x00 || surface). The label is part of the
// digest so equal surfaces under different labels cannot share a placeholder;
// the separators remove concatenation ambiguity.
std::string placeholder(const std::string& label, const std::string& surface,
                        const AnonymizerConfig& cfg);

struct Replacement {
    EntitySpan original;          // span in the source text
    std::string replacement;      // placeholder / mask run / "" for redact
    std::size_t new_start = 0;    // code points in the rewritten text
    std::size_t new_end = 0;
};

struct AnonymizationResult {
    std::string text;
    std::vector<Replacement> replacements;
    // (label, surface) -> placeholder; populated for the substitute strategy.
    std::map<std::pair<std::string, std::string>, std::string> mapping;

    nlohmann::json to_json(const std::string& doc_id) const;
};

// Rewrites the document according to cfg.strategy. Spans must be
// non-overlapping (merge first); offsets of later replacements are adjusted
// for earlier length changes.
AnonymizationResult anonymize(const AnnotatedDocument& adoc, const AnonymizerConfig& cfg);

// Mapping export, keyed by placeholder (re-identifying by nature; only
// written when the operator explicitly asks).
nlohmann::json mapping_to_json(
    const std::map<std::pair<std::string, std::string>, std::string>& mapping);

} // namespace veilkit
