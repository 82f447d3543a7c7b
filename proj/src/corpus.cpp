#include "veilkit/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "veilkit/errors.hpp"
#include "veilkit/unicode.hpp"

namespace veilkit {

namespace {

bool is_space_cp(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v';
}

struct WordRun {
    std::size_t start_cp;
    std::size_t end_cp;
    std::size_t start_byte;
    std::size_t end_byte;
};

std::vector<WordRun> word_runs(std::string_view text) {
    std::vector<WordRun> runs;
    std::size_t i = 0, cp_index = 0;
    bool in_word = false;
    WordRun current{};
    while (i < text.size()) {
        const std::size_t byte = i;
        const char32_t cp = unicode::decode_at(text, i);
        const bool space = is_space_cp(cp);
        if (!space && !in_word) {
            current = {cp_index, 0, byte, 0};
            in_word = true;
        }
        if (space && in_word) {
            current.end_cp = cp_index;
            current.end_byte = byte;
            runs.push_back(current);
            in_word = false;
        }
        ++cp_index;
    }
    if (in_word) {
        current.end_cp = cp_index;
        current.end_byte = text.size();
        runs.push_back(current);
    }
    return runs;
}

} // namespace

void sort_spans(std::vector<EntitySpan>& spans) {
    std::stable_sort(spans.begin(), spans.end(), [](const EntitySpan& a, const EntitySpan& b) {
        return a.start != b.start ? a.start < b.start : a.end < b.end;
    });
}

void validate_spans(const Document& doc, const std::vector<EntitySpan>& spans,
                    bool require_nonoverlap) {
    const auto offsets = unicode::cp_byte_offsets(doc.text);
    const std::size_t n = offsets.size() - 1;
    const EntitySpan* prev = nullptr;
    for (const auto& s : spans) {
        if (s.start >= s.end)
            throw DataError("doc " + doc.id + ": empty or inverted span [" +
                            std::to_string(s.start) + "," + std::to_string(s.end) + ")");
        if (s.end > n)
            throw DataError("doc " + doc.id + ": span end " + std::to_string(s.end) +
                            " beyond text length " + std::to_string(n));
        if (!(s.score >= 0.0 && s.score <= 1.0))
            throw DataError("doc " + doc.id + ": span score " + std::to_string(s.score) +
                            " outside [0,1]");
        const std::string_view slice{doc.text.data() + offsets[s.start],
                                     offsets[s.end] - offsets[s.start]};
        if (slice != s.surface)
            throw DataError("doc " + doc.id + ": surface \"" + s.surface +
                            "\" does not match text slice \"" + std::string(slice) + "\"");
        if (prev) {
            if (prev->start > s.start || (prev->start == s.start && prev->end > s.end))
                throw DataError("doc " + doc.id + ": spans not sorted by (start, end)");
            if (require_nonoverlap && prev->end > s.start)
                throw DataError("doc " + doc.id + ": overlapping spans at " +
                                std::to_string(s.start));
        }
        prev = &s;
    }
}

std::size_t whitespace_token_count(std::string_view text) {
    std::size_t count = 0;
    std::size_t i = 0;
    bool in_word = false;
    while (i < text.size()) {
        const bool space = is_space_cp(unicode::decode_at(text, i));
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

std::vector<Segment> segment(const Document& doc, std::size_t budget,
                             const TokenCounter& counter) {
    if (budget < 1) throw ConfigError("token budget must be >= 1");
    if (doc.text.empty()) return {};

    const std::string_view text = doc.text;
    const auto words = word_runs(text);
    const std::size_t total_cp = unicode::cp_length(text);

    std::vector<Segment> out;
    if (words.empty()) {
        // Whitespace-only text: keep it whole so reconstruction stays lossless.
        out.push_back({doc.id, 0, doc.text, 0});
        return out;
    }

    std::size_t seg_start_cp = 0;   // first segment absorbs any leading whitespace
    std::size_t seg_start_byte = 0;
    auto over_budget = [&](std::size_t end_byte) {
        return counter({text.data() + seg_start_byte, end_byte - seg_start_byte}) > budget;
    };
    std::size_t first_word = 0;
    for (std::size_t w = 0; w < words.size(); ++w) {
        if (!over_budget(words[w].end_byte)) continue;
        const std::string_view word{text.data() + words[w].start_byte,
                                    words[w].end_byte - words[w].start_byte};
        if (w == first_word)
            throw DataError("word \"" + std::string(word) +
                            "\" alone exceeds the token budget of " + std::to_string(budget));
        // Close the segment before word w; trailing whitespace rides along.
        out.push_back({doc.id, out.size(),
                       std::string(text.substr(seg_start_byte,
                                               words[w].start_byte - seg_start_byte)),
                       seg_start_cp});
        seg_start_cp = words[w].start_cp;
        seg_start_byte = words[w].start_byte;
        first_word = w;
        // The word must fit a fresh segment on its own.
        if (over_budget(words[w].end_byte))
            throw DataError("word \"" + std::string(word) +
                            "\" alone exceeds the token budget of " + std::to_string(budget));
    }
    out.push_back({doc.id, out.size(), std::string(text.substr(seg_start_byte)), seg_start_cp});

    // Invariant check: segments tile [0, total_cp).
    std::size_t acc = 0;
    for (const auto& s : out) acc += unicode::cp_length(s.text);
    if (acc != total_cp) throw DataError("internal error: segmentation lost text");
    return out;
}

AnnotatedDocument reconstruct(std::vector<Segment> segments,
                              std::vector<std::vector<EntitySpan>> seg_spans) {
    if (segments.empty()) throw DataError("reconstruct: no segments");
    if (seg_spans.size() != segments.size())
        throw DataError("reconstruct: span lists not parallel to segments");

    std::vector<std::size_t> order(segments.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return segments[a].index < segments[b].index;
    });

    const std::string& parent_id = segments[order[0]].parent_id;
    std::string text;
    std::vector<EntitySpan> spans;
    std::size_t expected_offset = 0;
    std::size_t expected_index = 0;
    for (const std::size_t i : order) {
        const Segment& seg = segments[i];
        if (seg.parent_id != parent_id)
            throw DataError("reconstruct: segments from different parents (" + parent_id +
                            " vs " + seg.parent_id + ")");
        if (seg.index != expected_index)
            throw DataError("reconstruct: missing or duplicate segment index " +
                            std::to_string(expected_index));
        if (seg.offset != expected_offset)
            throw DataError("reconstruct: gap or overlap at segment " + std::to_string(seg.index) +
                            " (offset " + std::to_string(seg.offset) + ", expected " +
                            std::to_string(expected_offset) + ")");
        const std::size_t seg_len = unicode::cp_length(seg.text);
        for (EntitySpan s : seg_spans[i]) {
            if (s.end > seg_len)
                throw DataError("reconstruct: span [" + std::to_string(s.start) + "," +
                                std::to_string(s.end) + ") exceeds segment " +
                                std::to_string(seg.index));
            s.start += seg.offset;
            s.end += seg.offset;
            spans.push_back(std::move(s));
        }
        text += seg.text;
        expected_offset += seg_len;
        ++expected_index;
    }

    AnnotatedDocument adoc{Document{parent_id, std::move(text), std::nullopt}, std::move(spans)};
    sort_spans(adoc.spans);
    validate_spans(adoc.doc, adoc.spans, /*require_nonoverlap=*/false);
    return adoc;
}

std::vector<std::string> to_iob2(const std::vector<Token>& tokens,
                                 const std::vector<EntitySpan>& spans) {
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (tokens[i - 1].end > tokens[i].start || tokens[i].start >= tokens[i].end)
            throw DataError("to_iob2: tokens must be sorted and non-overlapping");
    }
    for (std::size_t i = 1; i < spans.size(); ++i) {
        if (spans[i - 1].end > spans[i].start)
            throw DataError("to_iob2: spans must be sorted and non-overlapping");
    }

    std::vector<std::string> tags(tokens.size(), "O");
    std::size_t si = 0;
    const EntitySpan* open = nullptr;
    for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
        const Token& tok = tokens[ti];
        while (si < spans.size() && spans[si].end <= tok.start) {
            ++si;
            open = nullptr;
        }
        if (si == spans.size()) break;
        const EntitySpan& sp = spans[si];
        if (sp.start >= tok.end) continue;  // span begins after this token
        // Overlap. A span edge strictly inside the token means the annotation
        // does not line up with the tokenization.
        if ((sp.start > tok.start && sp.start < tok.end) ||
            (sp.end > tok.start && sp.end < tok.end))
            throw DataError("to_iob2: span boundary inside token \"" + tok.text + "\" at [" +
                            std::to_string(tok.start) + "," + std::to_string(tok.end) + ")");
        tags[ti] = (open == &sp ? "I-" : "B-") + sp.label;
        open = &sp;
    }
    return tags;
}

Iob2Decode from_iob2(std::string_view text, const std::vector<Token>& tokens,
                     const std::vector<std::string>& tags) {
    if (tokens.size() != tags.size())
        throw DataError("from_iob2: " + std::to_string(tags.size()) + " tags for " +
                        std::to_string(tokens.size()) + " tokens");

    Iob2Decode out;
    std::optional<EntitySpan> open;
    std::string open_label;

    auto flush = [&] {
        if (open) {
            open->surface = unicode::cp_slice(text, open->start, open->end);
            out.spans.push_back(std::move(*open));
            open.reset();
        }
    };

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& tag = tags[i];
        if (tag == "O") {
            flush();
            continue;
        }
        if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-')
            throw DataError("from_iob2: malformed tag \"" + tag + "\" at token " +
                            std::to_string(i));
        const std::string label = tag.substr(2);
        const bool continues = tag[0] == 'I' && open && open_label == label;
        if (continues) {
            open->end = tokens[i].end;
            continue;
        }
        if (tag[0] == 'I')
            out.notes.push_back("token " + std::to_string(i) + ": orphan I-" + label +
                                " treated as B-" + label);
        flush();
        open = EntitySpan{label, tokens[i].start, tokens[i].end, "", 1.0, "iob2"};
        open_label = label;
    }
    flush();
    return out;
}

std::vector<std::pair<std::size_t, std::string>> regroup_subtokens(
    const std::vector<Subtoken>& subtokens) {
    std::vector<std::pair<std::size_t, std::string>> out;
    for (const auto& st : subtokens) {
        if (!out.empty() && st.word_id < out.back().first)
            throw DataError("regroup_subtokens: word ids must be non-decreasing");
        if (out.empty() || st.word_id != out.back().first)
            out.emplace_back(st.word_id, st.label);
        // later subtokens of the same word are ignored: first-subtoken rule
    }
    return out;
}

const std::set<std::string>& LabelMap::default_canonical() {
    static const std::set<std::string> labels = {"ADDRESS", "CREDITCARDNUMBER", "EMAIL",
                                                 "IDCARDNUM", "NAME", "PASSPORT", "PHONE"};
    return labels;
}

LabelMap::LabelMap(std::map<std::string, std::string> table, std::set<std::string> canonical)
    : table_(std::move(table)), canonical_(std::move(canonical)) {
    for (const auto& [source, target] : table_) {
        if (!canonical_.count(target))
            throw ConfigError("label map target \"" + target + "\" (from \"" + source +
                              "\") is not in the canonical label set");
    }
}

LabelMap::LabelMap(std::map<std::string, std::string> table)
    : LabelMap(std::move(table), default_canonical()) {}

LabelMap LabelMap::identity(const std::set<std::string>& labels) {
    std::map<std::string, std::string> table;
    for (const auto& l : labels) table[l] = l;
    return LabelMap(std::move(table), labels);
}

std::optional<std::string> LabelMap::lookup(const std::string& source) const {
    const auto it = table_.find(source);
    if (it == table_.end()) return std::nullopt;
    return it->second;
}

std::vector<EntitySpan> normalize_labels(const std::vector<EntitySpan>& spans,
                                         const LabelMap& map) {
    std::set<std::string> unmapped;
    std::vector<EntitySpan> out;
    out.reserve(spans.size());
    for (const auto& s : spans) {
        const auto target = map.lookup(s.label);
        if (!target) {
            unmapped.insert(s.label);
            continue;
        }
        EntitySpan copy = s;
        copy.label = *target;
        out.push_back(std::move(copy));
    }
    if (!unmapped.empty()) {
        std::string msg = "unmapped labels:";
        for (const auto& l : unmapped) msg += " " + l;
        throw DataError(msg);
    }
    return out;
}

nlohmann::json standoff_to_json(const AnnotatedDocument& adoc) {
    nlohmann::json entities = nlohmann::json::array();
    for (const auto& s : adoc.spans) {
        entities.push_back({{"label", s.label},
                            {"start", s.start},
                            {"end", s.end},
                            {"text", s.surface},
                            {"score", s.score},
                            {"source", s.source}});
    }
    nlohmann::json j{{"id", adoc.doc.id}, {"text", adoc.doc.text}, {"entities", entities}};
    if (adoc.doc.lang) j["lang"] = *adoc.doc.lang;
    return j;
}

AnnotatedDocument standoff_from_json(const nlohmann::json& j, bool byte_offsets) {
    AnnotatedDocument adoc;
    adoc.doc.id = j.at("id").get<std::string>();
    adoc.doc.text = j.at("text").get<std::string>();
    if (adoc.doc.id.empty()) throw DataError("document id must be non-empty");
    if (!unicode::valid_utf8(adoc.doc.text))
        throw DataError("doc " + adoc.doc.id + ": text is not valid UTF-8");
    if (j.contains("lang")) adoc.doc.lang = j.at("lang").get<std::string>();

    // npos marks bytes inside a multi-byte sequence: a span boundary there is
    // an annotation error, not something to guess around.
    constexpr std::size_t kNotBoundary = static_cast<std::size_t>(-1);
    std::vector<std::size_t> byte_to_cp;
    if (byte_offsets) {
        const auto offsets = unicode::cp_byte_offsets(adoc.doc.text);
        byte_to_cp.assign(adoc.doc.text.size() + 1, kNotBoundary);
        for (std::size_t cp = 0; cp < offsets.size(); ++cp) byte_to_cp[offsets[cp]] = cp;
    }

    if (j.contains("entities")) {
        for (const auto& e : j.at("entities")) {
            EntitySpan s;
            s.label = e.at("label").get<std::string>();
            s.start = e.at("start").get<std::size_t>();
            s.end = e.at("end").get<std::size_t>();
            if (byte_offsets) {
                if (s.start > adoc.doc.text.size() || s.end > adoc.doc.text.size())
                    throw DataError("doc " + adoc.doc.id + ": byte offset out of range");
                if (byte_to_cp[s.start] == kNotBoundary || byte_to_cp[s.end] == kNotBoundary)
                    throw DataError("doc " + adoc.doc.id + ": byte offset " +
                                    std::to_string(byte_to_cp[s.start] == kNotBoundary ? s.start
                                                                                       : s.end) +
                                    " is not a code point boundary");
                s.start = byte_to_cp[s.start];
                s.end = byte_to_cp[s.end];
            }
            if (e.contains("text")) s.surface = e.at("text").get<std::string>();
            else s.surface = unicode::cp_slice(adoc.doc.text, s.start, s.end);
            if (e.contains("score")) s.score = e.at("score").get<double>();
            if (e.contains("source")) s.source = e.at("source").get<std::string>();
            adoc.spans.push_back(std::move(s));
        }
    }
    sort_spans(adoc.spans);
    validate_spans(adoc.doc, adoc.spans, /*require_nonoverlap=*/false);
    return adoc;
}

std::vector<AnnotatedDocument> read_standoff_jsonl(std::istream& in, bool byte_offsets) {
    std::vector<AnnotatedDocument> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        docs.push_back(standoff_from_json(j, byte_offsets));
    }
    return docs;
}

void write_standoff_jsonl(std::ostream& out, const std::vector<AnnotatedDocument>& docs) {
    for (const auto& d : docs) out << standoff_to_json(d).dump() << "\n";
}

} // namespace veilkit
