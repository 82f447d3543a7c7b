#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "veilkit/anonymize.hpp"
#include "veilkit/corpus.hpp"
#include "veilkit/metrics.hpp"
#include "veilkit/recognize.hpp"

namespace veilkit {

struct PipelineConfig {
    std::vector<Pattern> patterns;
    std::vector<AdapterDecl> adapters;
    MergePolicy merge_policy;
    AnonymizerConfig anonymizer;
    double alpha = 0.5;

    std::string input_path;       // standoff JSONL (entities optional)
    std::string annotated_path;   // stage 1 output
    std::string anonymized_path;  // stage 2 output
    std::string report_path;      // stage 3 output
    std::optional<std::string> mapping_path;  // only with export_mapping
    bool export_mapping = false;
    bool input_offsets_are_bytes = false;
};

// Strict parse: unknown fields anywhere in the config are rejected before
// any work starts. The anonymization salt may also arrive via VEILKIT_SALT.
PipelineConfig parse_pipeline_config(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::string& path);

// Individual stages; each reads/writes JSONL so a later stage can rerun on
// saved intermediates.
std::vector<AnnotatedDocument> run_recognize(const std::vector<AnnotatedDocument>& input,
                                             const PipelineConfig& config);

struct AnonymizedDoc {
    std::string id;
    std::string original_text;
    AnonymizationResult result;
};
std::vector<AnonymizedDoc> run_anonymize(const std::vector<AnnotatedDocument>& annotated,
                                         const PipelineConfig& config);

EvaluateOutcome run_evaluate(const std::vector<AnnotatedDocument>& original,
                             const std::vector<AnonymizedDoc>& anonymized, double alpha);

// Occurrence token identity used by the evaluation: label and surface
// together, so equal surfaces under different labels stay distinct tokens.
std::string occurrence_token_key(const std::string& label, const std::string& surface);

struct PipelineArtifacts {
    std::size_t documents = 0;
    MetricsReport report;
    std::vector<std::string> warnings;
};

// recognize -> anonymize -> evaluate, with all intermediates persisted.
PipelineArtifacts run_pipeline(const PipelineConfig& config);

// Anonymized JSONL round trip for the evaluate stage.
nlohmann::json anonymized_doc_to_json(const AnonymizedDoc& doc);
AnonymizedDoc anonymized_doc_from_json(const nlohmann::json& j);
std::vector<AnonymizedDoc> read_anonymized_jsonl(std::istream& in);
void write_anonymized_jsonl(std::ostream& out, const std::vector<AnonymizedDoc>& docs);

} // namespace veilkit
