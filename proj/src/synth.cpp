#include "veilkit/synth.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <numeric>

#include "veilkit/errors.hpp"
#include "veilkit/unicode.hpp"

namespace veilkit {

namespace {

// Bundled filler vocabulary; hermetic alternative to lorem-style data.
constexpr std::array<const char*, 96> kFiller = {
    "the",     "report",  "describes", "a",        "series",   "of",       "events",  "that",
    "took",    "place",   "during",    "last",     "quarter",  "and",      "their",   "impact",
    "on",      "several", "internal",  "systems",  "while",    "teams",    "were",    "asked",
    "to",      "review",  "records",   "before",   "sharing",  "any",      "details", "with",
    "partners","analysts","noted",     "unusual",  "activity", "around",   "certain", "accounts",
    "which",   "required","further",   "checks",   "across",   "multiple", "sources", "this",
    "process", "remains", "ongoing",   "under",    "close",    "watch",    "from",    "staff",
    "who",     "handle",  "these",     "matters",  "every",    "week",     "new",     "files",
    "arrive",  "for",     "manual",    "triage",   "then",     "results",  "are",     "stored",
    "in",      "shared",  "folders",   "until",    "review",   "ends",     "some",    "items",
    "need",    "urgent",  "attention", "others",   "can",      "wait",     "but",     "all",
    "must",    "be",      "logged",    "properly", "at",       "each",     "stage",   "today"};

constexpr std::array<const char*, 12> kFirstNames = {
    "John", "Ana",  "Luis", "Marta", "Peter", "Sofia",
    "Igor", "Nora", "Omar", "Elena", "Tom",   "Lucia"};

constexpr std::array<const char*, 12> kLastNames = {
    "Smith",  "Garcia", "Novak",  "Rossi", "Dubois", "Keller",
    "Ivanov", "Brown",  "Silva",  "Haas",  "Moreau", "Larsen"};

constexpr std::array<const char*, 4> kEmailDomains = {"example.com", "mail.test", "inbox.example",
                                                      "post.invalid"};

constexpr std::array<const char*, 8> kStreets = {"Oak", "Elm", "Main", "River",
                                                 "Hill", "Lake", "Park", "Mill"};

const char* kBase58 = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
const char* kHex = "0123456789abcdef";
const char* kDigits = "0123456789";
const char* kUpper = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";

std::string pick_chars(Rng& rng, const char* alphabet, std::size_t len) {
    const std::size_t n = std::string_view(alphabet).size();
    std::string out;
    out.reserve(len);
    for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[rng.index(n)]);
    return out;
}

// ISO 7064 mod-97 over the rearranged IBAN with letters mapped to 10..35.
unsigned iban_mod97(const std::string& rearranged) {
    unsigned rem = 0;
    for (const char c : rearranged) {
        if (c >= '0' && c <= '9') {
            rem = (rem * 10 + static_cast<unsigned>(c - '0')) % 97;
        } else {
            const unsigned v = static_cast<unsigned>(c - 'A') + 10;
            rem = (rem * 100 + v) % 97;
        }
    }
    return rem;
}

std::string gen_iban(Rng& rng) {
    struct Country {
        const char* code;
        std::size_t letters;  // leading bank letters in the BBAN
        std::size_t digits;
    };
    // BBAN shapes: DE 18 digits, ES 20 digits, GB 4 letters + 14 digits,
    // NL 4 letters + 10 digits, FR 23 digits.
    static const std::array<Country, 5> countries = {
        Country{"DE", 0, 18}, Country{"ES", 0, 20}, Country{"GB", 4, 14},
        Country{"NL", 4, 10}, Country{"FR", 0, 23}};
    const Country& c = countries[rng.index(countries.size())];
    const std::string bban = pick_chars(rng, kUpper, c.letters) + pick_chars(rng, kDigits, c.digits);
    const unsigned rem = iban_mod97(bban + c.code + "00");
    const unsigned check = 98 - rem;
    const std::string check_str = (check < 10 ? "0" : "") + std::to_string(check);
    return c.code + check_str + bban;
}

std::string gen_ipv4(Rng& rng) {
    return std::to_string(1 + rng.below(223)) + "." + std::to_string(rng.below(256)) + "." +
           std::to_string(rng.below(256)) + "." + std::to_string(1 + rng.below(254));
}

std::string gen_ipv4_private(Rng& rng) {
    switch (rng.index(3)) {
        case 0:
            return "10." + std::to_string(rng.below(256)) + "." + std::to_string(rng.below(256)) +
                   "." + std::to_string(1 + rng.below(254));
        case 1:
            return "172." + std::to_string(16 + rng.below(16)) + "." +
                   std::to_string(rng.below(256)) + "." + std::to_string(1 + rng.below(254));
        default:
            return "192.168." + std::to_string(rng.below(256)) + "." +
                   std::to_string(1 + rng.below(254));
    }
}

bool ipv4_is_public(unsigned a, unsigned b) {
    if (a == 0 || a == 10 || a == 127 || a >= 224) return false;
    if (a == 172 && b >= 16 && b < 32) return false;
    if (a == 192 && b == 168) return false;
    if (a == 169 && b == 254) return false;
    if (a == 100 && b >= 64 && b < 128) return false;
    return true;
}

std::string gen_ipv4_public(Rng& rng) {
    for (;;) {
        const unsigned a = static_cast<unsigned>(1 + rng.below(223));
        const unsigned b = static_cast<unsigned>(rng.below(256));
        if (!ipv4_is_public(a, b)) continue;
        return std::to_string(a) + "." + std::to_string(b) + "." + std::to_string(rng.below(256)) +
               "." + std::to_string(1 + rng.below(254));
    }
}

std::string gen_ipv6(Rng& rng) {
    std::string out;
    for (int g = 0; g < 8; ++g) {
        if (g) out.push_back(':');
        // canonical: lowercase, leading zeros stripped
        const std::size_t len = 1 + rng.index(4);
        std::string group = pick_chars(rng, kHex, len);
        while (group.size() > 1 && group.front() == '0') group.erase(group.begin());
        out += group;
    }
    return out;
}

std::string gen_name(Rng& rng) {
    return std::string(kFirstNames[rng.index(kFirstNames.size())]) + " " +
           kLastNames[rng.index(kLastNames.size())];
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string gen_email(Rng& rng) {
    return lower(kFirstNames[rng.index(kFirstNames.size())]) + "." +
           lower(kLastNames[rng.index(kLastNames.size())]) + "@" +
           kEmailDomains[rng.index(kEmailDomains.size())];
}

} // namespace

const std::set<std::string>& synth_labels() {
    static const std::set<std::string> labels = [] {
        std::set<std::string> s = LabelMap::default_canonical();
        for (const char* extra : {"IPV4", "IPV4_PRIVATE", "IPV4_PUBLIC", "IPV6", "IBAN",
                                  "BITCOIN_ADDRESS", "ETHEREUM_ADDRESS", "LITECOIN_ADDRESS",
                                  "POLYGON_ADDRESS"})
            s.insert(extra);
        return s;
    }();
    return labels;
}

std::string gen_entity(const std::string& label, Rng& rng) {
    if (label == "IPV4") return gen_ipv4(rng);
    if (label == "IPV4_PRIVATE") return gen_ipv4_private(rng);
    if (label == "IPV4_PUBLIC") return gen_ipv4_public(rng);
    if (label == "IPV6") return gen_ipv6(rng);
    if (label == "IBAN") return gen_iban(rng);
    if (label == "BITCOIN_ADDRESS")
        return std::string(rng.index(2) ? "1" : "3") + pick_chars(rng, kBase58, 25 + rng.index(9));
    if (label == "ETHEREUM_ADDRESS" || label == "POLYGON_ADDRESS")
        return "0x" + pick_chars(rng, kHex, 40);
    if (label == "LITECOIN_ADDRESS")
        return std::string(rng.index(2) ? "L" : "M") + pick_chars(rng, kBase58, 26 + rng.index(8));
    if (label == "NAME") return gen_name(rng);
    if (label == "EMAIL") return gen_email(rng);
    if (label == "PHONE") return "+34" + pick_chars(rng, kDigits, 9);
    if (label == "CREDITCARDNUMBER") return pick_chars(rng, kDigits, 16);
    if (label == "IDCARDNUM") return pick_chars(rng, kDigits, 8) + pick_chars(rng, kUpper, 1);
    if (label == "PASSPORT") return pick_chars(rng, kUpper, 3) + pick_chars(rng, kDigits, 6);
    if (label == "ADDRESS")
        return std::to_string(1 + rng.below(199)) + " " + kStreets[rng.index(kStreets.size())] +
               " Street";
    throw ConfigError("gen_entity: unsupported label \"" + label + "\"");
}

void SynthSpec::validate() const {
    if (paragraphs == 0) throw ConfigError("synth spec: paragraphs must be positive");
    if (sentences_per_paragraph == 0)
        throw ConfigError("synth spec: sentences_per_paragraph must be positive");
    double total = 0.0;
    for (const auto& [label, weight] : entity_mix) {
        if (!synth_labels().count(label))
            throw ConfigError("synth spec: unknown entity label \"" + label + "\"");
        if (weight < 0.0)
            throw ConfigError("synth spec: negative weight for \"" + label + "\"");
        total += weight;
    }
    if (entities_per_paragraph > 0 && total <= 0.0)
        throw ConfigError("synth spec: entity_mix needs at least one positive weight");
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
    static const std::set<std::string> allowed = {"seed", "paragraphs", "sentences_per_paragraph",
                                                  "entities_per_paragraph", "entity_mix"};
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("synth spec: unknown field \"" + key + "\"");
    SynthSpec s;
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("paragraphs")) s.paragraphs = j.at("paragraphs").get<std::size_t>();
    if (j.contains("sentences_per_paragraph"))
        s.sentences_per_paragraph = j.at("sentences_per_paragraph").get<std::size_t>();
    if (j.contains("entities_per_paragraph"))
        s.entities_per_paragraph = j.at("entities_per_paragraph").get<std::size_t>();
    if (j.contains("entity_mix"))
        s.entity_mix = j.at("entity_mix").get<std::map<std::string, double>>();
    s.validate();
    return s;
}

nlohmann::json SynthSpec::to_json() const {
    return {{"seed", seed},
            {"paragraphs", paragraphs},
            {"sentences_per_paragraph", sentences_per_paragraph},
            {"entities_per_paragraph", entities_per_paragraph},
            {"entity_mix", entity_mix}};
}

std::vector<AnnotatedDocument> gen_corpus(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    // Cumulative weights in map (alphabetical) order: deterministic draws.
    std::vector<std::pair<std::string, double>> cumulative;
    double total = 0.0;
    for (const auto& [label, weight] : spec.entity_mix) {
        if (weight <= 0.0) continue;
        total += weight;
        cumulative.emplace_back(label, total);
    }
    auto draw_label = [&]() -> const std::string& {
        const double r = rng.unit() * total;
        for (const auto& [label, cum] : cumulative)
            if (r < cum) return label;
        return cumulative.back().first;
    };

    std::vector<AnnotatedDocument> corpus;
    corpus.reserve(spec.paragraphs);
    for (std::size_t p = 0; p < spec.paragraphs; ++p) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "synth-%06zu", p + 1);
        const std::string doc_id = idbuf;

        struct Word {
            std::string text;
            bool sentence_start = false;
            bool sentence_end = false;
            bool is_entity = false;
            std::string label;
        };
        std::vector<Word> words;
        for (std::size_t s = 0; s < spec.sentences_per_paragraph; ++s) {
            const std::size_t len = 6 + rng.index(7);
            for (std::size_t w = 0; w < len; ++w) {
                Word word;
                word.text = kFiller[rng.index(kFiller.size())];
                word.sentence_start = (w == 0);
                word.sentence_end = (w == len - 1);
                words.push_back(std::move(word));
            }
        }

        if (spec.entities_per_paragraph > words.size())
            throw DataError("paragraph " + doc_id + " has " + std::to_string(words.size()) +
                            " words, cannot host " + std::to_string(spec.entities_per_paragraph) +
                            " entities");

        // Partial Fisher-Yates: the first k positions become entity slots.
        std::vector<std::size_t> positions(words.size());
        std::iota(positions.begin(), positions.end(), 0);
        for (std::size_t i = 0; i < spec.entities_per_paragraph; ++i) {
            const std::size_t j = i + rng.index(positions.size() - i);
            std::swap(positions[i], positions[j]);
        }
        for (std::size_t i = 0; i < spec.entities_per_paragraph; ++i) {
            Word& w = words[positions[i]];
            w.is_entity = true;
            w.label = draw_label();
            w.text = gen_entity(w.label, rng);
        }

        AnnotatedDocument adoc;
        adoc.doc.id = doc_id;
        std::size_t cp = 0;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) {
                adoc.doc.text += ' ';
                ++cp;
            }
            Word& w = words[i];
            std::string out = w.text;
            if (w.sentence_start && !w.is_entity)
                out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
            const std::size_t out_cp = unicode::cp_length(out);
            if (w.is_entity)
                adoc.spans.push_back({w.label, cp, cp + out_cp, out, 1.0, "synth"});
            adoc.doc.text += out;
            cp += out_cp;
            if (w.sentence_end) {
                adoc.doc.text += '.';
                ++cp;
            }
        }
        sort_spans(adoc.spans);
        validate_spans(adoc.doc, adoc.spans, /*require_nonoverlap=*/true);
        corpus.push_back(std::move(adoc));
    }
    return corpus;
}

} // namespace veilkit
