#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "veilkit/corpus.hpp"

namespace veilkit {

// ---------------------------------------------------------------------------
// Entropy and information loss

// Word rule for entropy: whitespace split, case-sensitive, punctuation kept.
std::vector<std::string> whitespace_words(std::string_view text);

// Shannon entropy in bits over the relative word frequencies:
//   E = -sum_w p(w) * log2 p(w)
// Empty input has entropy 0.
double shannon_entropy(const std::vector<std::string>& words);
double shannon_entropy(std::string_view text);

// E(original) - E(anonymized). Positive: information lost. Zero: intact.
// Negative: new information generated (hash placeholders are novel tokens).
double information_loss(std::string_view original, std::string_view anonymized);

// ---------------------------------------------------------------------------
// Consistency, collision degree, error rate

struct Occurrence {
    std::string token;        // original entity surface (opaque identity)
    std::string placeholder;  // what it was rewritten to
};

// Per-token consistency:
//   C = (1/|T|) * sum_t correct(t) / total(t)
// where an occurrence is "correct" when it carries the token's canonical
// placeholder: the modal one, ties broken by first occurrence.
// Throws UndefinedMetricError on empty input.
double consistency(const std::vector<Occurrence>& occurrences);

// Same metric against an explicit expected mapping instead of the modal rule.
double consistency(const std::vector<Occurrence>& occurrences,
                   const std::map<std::string, std::string>& reference_mapping);

// Collision degree: the share of placeholders produced by exactly one
// distinct token. G = |{h : |G_h| = 1}| / |H|. Throws UndefinedMetricError
// on empty input.
double collision_degree(const std::vector<Occurrence>& occurrences);
double collision_degree(const std::map<std::string, std::string>& token_to_placeholder);

struct CollisionCounts {
    std::size_t unique_tokens = 0;
    std::size_t unique_hashes = 0;
    std::size_t colliding_hashes = 0;  // hashes produced by more than one token
};
CollisionCounts collision_counts(const std::vector<Occurrence>& occurrences);

// Error = 1 - (alpha * C + (1 - alpha) * G)
double error_rate(double consistency, double collision_degree, double alpha = 0.5);

// ---------------------------------------------------------------------------
// Levenshtein and average correlation preservation

// Unit-cost edit distance over code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

struct CorrelationDetail {
    double value = 0.0;
    std::size_t shared_tokens = 0;  // |T|
    std::size_t hash_union = 0;     // |H_A u H_B|
};

// Avg correlation = (1/|H_A u H_B|) * sum_{t in T} 1 - L(f_a(t), f_b(t)) / max_len
// with max_len the longer of the two hash strings (in code points).
// Throws UndefinedMetricError when the maps share no token.
CorrelationDetail avg_correlation(const std::map<std::string, std::string>& map_a,
                                  const std::map<std::string, std::string>& map_b);

// ---------------------------------------------------------------------------
// Entity-level precision / recall / F1

struct NerScore {
    std::size_t tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

enum class MatchMode { exact, overlap };

// exact: a prediction is a TP iff (label, start, end) all match a gold span.
// overlap: same label and intersecting extents; candidates paired greedily
// one-to-one by descending overlap length.
NerScore ner_score(const std::vector<EntitySpan>& gold, const std::vector<EntitySpan>& predicted,
                   MatchMode mode);

// ---------------------------------------------------------------------------
// Weighted word error rate

struct WerWeights {
    double ins = 0.10;
    double del = 0.45;
    double sub = 0.45;
};

struct WerBreakdown {
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::size_t ref_len = 0;
    WerWeights weights;
    double wer = 0.0;

    nlohmann::json to_json() const;
};

// Alignment minimizing the total weighted cost (match cost 0); equal-cost
// ties resolved preferring substitution over deletion over insertion.
// WER = (w_i*I + w_d*D + w_s*S) / |ref|. Throws UndefinedMetricError when
// ref is empty.
WerBreakdown weighted_wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp,
                          const WerWeights& weights = {});

// ---------------------------------------------------------------------------
// Corpus-level report

struct MetricsCounts {
    std::size_t unique_tokens = 0;
    std::size_t unique_hashes = 0;
    std::size_t colliding_hashes = 0;
};

struct MetricsReport {
    std::optional<double> info_loss;
    std::optional<double> consistency;
    std::optional<double> collision_degree;
    std::optional<double> error_rate;
    std::optional<double> avg_correlation;
    double alpha = 0.5;
    MetricsCounts counts;

    nlohmann::json to_json() const;
};

struct DocOccurrences {
    std::string doc_id;
    std::vector<Occurrence> occurrences;
};

struct EvaluateOutcome {
    MetricsReport report;
    std::vector<std::string> warnings;  // undefined-metric notes
};

// Builds the full report for a corpus. Undefined metrics become null fields
// plus a warning instead of an error. Average correlation compares the first
// half of the documents against the second half.
EvaluateOutcome evaluate_corpus(std::string_view original_text, std::string_view anonymized_text,
                                const std::vector<DocOccurrences>& per_doc, double alpha = 0.5);

// Validates the JSON shape emitted by MetricsReport::to_json (the
// repository's own schema check). Returns problems; empty means valid.
std::vector<std::string> check_report_schema(const nlohmann::json& j);

} // namespace veilkit
