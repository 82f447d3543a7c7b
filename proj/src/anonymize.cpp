#include "veilkit/anonymize.hpp"

#include "veilkit/errors.hpp"
#include "veilkit/sha256.hpp"
#include "veilkit/unicode.hpp"

namespace veilkit {

Strategy strategy_from_string(const std::string& name) {
    if (name == "substitute") return Strategy::substitute;
    if (name == "redact") return Strategy::redact;
    if (name == "mask") return Strategy::mask;
    throw ConfigError("unknown anonymization strategy \"" + name +
                      "\" (expected substitute, redact, or mask)");
}

std::string strategy_to_string(Strategy s) {
    switch (s) {
        case Strategy::substitute: return "substitute";
        case Strategy::redact: return "redact";
        case Strategy::mask: return "mask";
    }
    return "substitute";
}

void AnonymizerConfig::validate() const {
    if (hash_len < 4 || hash_len > 64)
        throw ConfigError("hash_len " + std::to_string(hash_len) + " outside [4, 64]");
}

namespace {

std::string hash_hex(const std::string& salt, const std::string& label,
                     const std::string& surface, const std::string& occurrence_salt) {
    Sha256 h;
    h.update(salt);
    h.update("\0", 1);
    h.update(label);
    h.update("\0", 1);
    h.update(surface);
    if (!occurrence_salt.empty()) {
        h.update("\0", 1);
        h.update(occurrence_salt);
    }
    const auto d = h.digest();
    return to_hex(d.data(), d.size());
}

std::string make_placeholder(const std::string& label, const std::string& surface,
                             const AnonymizerConfig& cfg, const std::string& occurrence_salt) {
    cfg.validate();
    if (surface.empty()) throw DataError("placeholder: empty surface for label " + label);
    const std::string hex = hash_hex(cfg.salt, label, surface, occurrence_salt);
    return "<" + label + "_" + hex.substr(0, cfg.hash_len) + ">";
}

} // namespace

std::string placeholder(const std::string& label, const std::string& surface,
                        const AnonymizerConfig& cfg) {
    return make_placeholder(label, surface, cfg, "");
}

AnonymizationResult anonymize(const AnnotatedDocument& adoc, const AnonymizerConfig& cfg) {
    cfg.validate();
    validate_spans(adoc.doc, adoc.spans, /*require_nonoverlap=*/false);
    for (std::size_t i = 1; i < adoc.spans.size(); ++i) {
        if (adoc.spans[i - 1].end > adoc.spans[i].start)
            throw DataError("doc " + adoc.doc.id +
                            ": overlapping spans; merge recognizer output first");
    }

    const std::string& text = adoc.doc.text;
    const auto offsets = unicode::cp_byte_offsets(text);

    AnonymizationResult result;
    result.text.reserve(text.size());
    std::size_t cursor_byte = 0;   // bytes consumed from the source
    std::size_t out_cp = 0;        // code points emitted so far
    std::size_t prev_cp = 0;       // code points consumed from the source

    for (const auto& span : adoc.spans) {
        const std::size_t span_b0 = offsets[span.start];
        const std::size_t span_b1 = offsets[span.end];

        result.text.append(text, cursor_byte, span_b0 - cursor_byte);
        out_cp += span.start - prev_cp;

        std::string repl;
        switch (cfg.strategy) {
            case Strategy::substitute: {
                std::string occ_salt;
                if (cfg.simulate_inline)
                    occ_salt = adoc.doc.id + ":" + std::to_string(span.start);
                repl = make_placeholder(span.label, span.surface, cfg, occ_salt);
                result.mapping.emplace(std::make_pair(span.label, span.surface), repl);
                break;
            }
            case Strategy::redact:
                break;  // span deleted
            case Strategy::mask:
                repl.assign(span.length(), cfg.mask_char);
                break;
        }

        const std::size_t repl_cp = unicode::cp_length(repl);
        result.replacements.push_back({span, repl, out_cp, out_cp + repl_cp});
        result.text += repl;
        out_cp += repl_cp;
        cursor_byte = span_b1;
        prev_cp = span.end;
    }
    result.text.append(text, cursor_byte, text.size() - cursor_byte);
    return result;
}

nlohmann::json AnonymizationResult::to_json(const std::string& doc_id) const {
    nlohmann::json repl = nlohmann::json::array();
    for (const auto& r : replacements) {
        repl.push_back({{"label", r.original.label},
                        {"start", r.original.start},
                        {"end", r.original.end},
                        {"surface", r.original.surface},
                        {"placeholder", r.replacement},
                        {"new_start", r.new_start},
                        {"new_end", r.new_end}});
    }
    return {{"id", doc_id}, {"text", text}, {"replacements", repl}};
}

nlohmann::json mapping_to_json(
    const std::map<std::pair<std::string, std::string>, std::string>& mapping) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, ph] : mapping)
        j[ph] = {{"label", key.first}, {"surface", key.second}};
    return j;
}

} // namespace veilkit
