#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace veilkit {

// All offsets below are Unicode code points into the owning document text.

struct Document {
    std::string id;    // non-empty
    std::string text;  // UTF-8, may be empty
    std::optional<std::string> lang;
};

struct EntitySpan {
    std::string label;
    std::size_t start = 0;
    std::size_t end = 0;
    std::string surface;  // must equal text[start..end)
    double score = 1.0;   // [0, 1]
    std::string source;   // recognizer name

    std::size_t length() const { return end - start; }
    bool overlaps(const EntitySpan& o) const { return start < o.end && o.start < end; }
    friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

struct AnnotatedDocument {
    Document doc;
    std::vector<EntitySpan> spans;  // sorted by (start, end)
};

// Checks every EntitySpan invariant against `text`; throws DataError on the
// first violation. Non-overlap is only enforced when requested since raw
// recognizer output may legitimately overlap before merging.
void validate_spans(const Document& doc, const std::vector<EntitySpan>& spans,
                    bool require_nonoverlap);

void sort_spans(std::vector<EntitySpan>& spans);

// ---------------------------------------------------------------------------
// Segmentation under a token budget

struct Segment {
    std::string parent_id;
    std::size_t index = 0;
    std::string text;
    std::size_t offset = 0;  // code points from parent start
};

using TokenCounter = std::function<std::size_t(std::string_view)>;

// Default counting rule: whitespace-delimited words.
std::size_t whitespace_token_count(std::string_view text);

// Splits doc.text into segments of at most `budget` tokens each. Boundaries
// fall only at word starts; whitespace between words stays attached to the
// preceding segment so that concatenating segments in index order reproduces
// the parent text exactly.
std::vector<Segment> segment(const Document& doc, std::size_t budget,
                             const TokenCounter& counter = whitespace_token_count);

// Inverse of segment(): rebuilds the parent document and shifts each
// segment-relative span by its segment offset. seg_spans is parallel to
// `segments`. Errors on gaps, overlaps, or spans outside their segment.
AnnotatedDocument reconstruct(std::vector<Segment> segments,
                              std::vector<std::vector<EntitySpan>> seg_spans);

// ---------------------------------------------------------------------------
// IOB2

struct Token {
    std::string text;
    std::size_t start = 0;
    std::size_t end = 0;
};

// One tag per token: B-<label> on a span's first token, I-<label> after,
// O elsewhere. A span boundary strictly inside a token is an annotation /
// tokenization mismatch and raises DataError.
std::vector<std::string> to_iob2(const std::vector<Token>& tokens,
                                 const std::vector<EntitySpan>& spans);

struct Iob2Decode {
    std::vector<EntitySpan> spans;
    std::vector<std::string> notes;  // leniency decisions, e.g. orphan I treated as B
};

// Lenient decoder: an I-tag without a same-label B/I predecessor opens a new
// span and the decision is recorded in notes. `text` supplies surfaces.
Iob2Decode from_iob2(std::string_view text, const std::vector<Token>& tokens,
                     const std::vector<std::string>& tags);

// ---------------------------------------------------------------------------
// Subtoken regrouping

struct Subtoken {
    std::string text;
    std::size_t word_id = 0;
    std::string label;
};

// One label per word: the label of its first subtoken.
std::vector<std::pair<std::size_t, std::string>> regroup_subtokens(
    const std::vector<Subtoken>& subtokens);

// ---------------------------------------------------------------------------
// Label normalization

class LabelMap {
public:
    // {ADDRESS, CREDITCARDNUMBER, EMAIL, IDCARDNUM, NAME, PASSPORT, PHONE}
    static const std::set<std::string>& default_canonical();

    LabelMap() = default;
    // Throws ConfigError if a mapped-to label is outside the canonical set.
    LabelMap(std::map<std::string, std::string> table, std::set<std::string> canonical);
    explicit LabelMap(std::map<std::string, std::string> table);

    static LabelMap identity(const std::set<std::string>& labels);

    std::optional<std::string> lookup(const std::string& source) const;
    const std::map<std::string, std::string>& table() const { return table_; }
    const std::set<std::string>& canonical() const { return canonical_; }
    bool empty() const { return table_.empty(); }

private:
    std::map<std::string, std::string> table_;
    std::set<std::string> canonical_;
};

// Rewrites labels through `map`, leaving offsets and surfaces untouched.
// Unmapped labels raise DataError naming every unmapped label encountered.
std::vector<EntitySpan> normalize_labels(const std::vector<EntitySpan>& spans,
                                         const LabelMap& map);

// ---------------------------------------------------------------------------
// Standoff annotation file (JSON Lines, UTF-8, code-point offsets)

nlohmann::json standoff_to_json(const AnnotatedDocument& adoc);

// byte_offsets reinterprets entity start/end as byte offsets and converts
// them to code points (escape hatch for corpora that disagree with the
// code-point default).
AnnotatedDocument standoff_from_json(const nlohmann::json& j, bool byte_offsets = false);

std::vector<AnnotatedDocument> read_standoff_jsonl(std::istream& in, bool byte_offsets = false);
void write_standoff_jsonl(std::ostream& out, const std::vector<AnnotatedDocument>& docs);

} // namespace veilkit
