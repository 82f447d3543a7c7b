#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "veilkit/corpus.hpp"

namespace veilkit {

struct Pattern {
    std::string name;   // identifier; emitted label is its uppercase form
    std::string regex;  // ECMAScript source
    double score = 0.5; // [0, 1]
};

// Compiles the pattern set once; invalid regexes raise ConfigError naming the
// pattern. Matching is per-pattern leftmost non-overlapping (greedy
// quantifiers, so effectively leftmost-longest for the usual patterns).
class PatternSet {
public:
    explicit PatternSet(std::vector<Pattern> patterns);
    std::vector<EntitySpan> recognize(const Document& doc) const;
    const std::vector<Pattern>& patterns() const { return patterns_; }

private:
    struct Compiled;
    std::vector<Pattern> patterns_;
    std::shared_ptr<const std::vector<Compiled>> compiled_;
};

std::vector<EntitySpan> recognize_patterns(const Document& doc,
                                           const std::vector<Pattern>& patterns);

// ---------------------------------------------------------------------------
// External span-prediction adapters (model inference happens elsewhere; this
// side only speaks the line protocol or reads a prediction file).
//
// Protocol "ner-adapter/1": the adapter emits {"protocol":"ner-adapter/1"}
// once at startup, then answers each request line {"id":..,"text":..} with
// {"id":..,"entities":[{label,start,end,text,score},..]} in the same order.

struct AdapterDecl {
    enum class Kind { command, file };
    std::string name;
    Kind kind = Kind::command;
    std::vector<std::string> command;  // argv, for Kind::command
    std::string path;                  // predictions JSONL, for Kind::file
    LabelMap labels;                   // source label -> canonical label
};

class ExternalAdapter {
public:
    virtual ~ExternalAdapter() = default;
    virtual const std::string& name() const = 0;
    // Raw spans in the adapter's own label space, validated against doc.text.
    virtual std::vector<EntitySpan> predict(const Document& doc) = 0;
};

// One subprocess per instance, one request in flight at a time.
std::unique_ptr<ExternalAdapter> make_adapter(const AdapterDecl& decl);

// Runs the adapter and normalizes its labels through decl's LabelMap.
std::vector<EntitySpan> recognize_external(const Document& doc, ExternalAdapter& adapter,
                                           const LabelMap& labels);

// ---------------------------------------------------------------------------
// Ensemble merge

struct MergePolicy {
    std::vector<std::string> priority;  // earlier name wins ties
};

// Resolves overlaps across recognizers: higher score, then longer span, then
// earlier recognizer in priority order. Output is sorted and non-overlapping;
// deterministic for fixed input.
std::vector<EntitySpan> merge(
    const std::vector<std::pair<std::string, std::vector<EntitySpan>>>& spanlists,
    const MergePolicy& policy);

} // namespace veilkit
