#include "veilkit/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "veilkit/errors.hpp"

namespace veilkit {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError(where + ": unknown field \"" + key + "\"");
}

LabelMap label_map_from_json(const nlohmann::json& j, const std::string& where) {
    std::map<std::string, std::string> table;
    std::set<std::string> canonical;
    for (const auto& [source, target] : j.items()) {
        if (!target.is_string()) throw ConfigError(where + ": label map values must be strings");
        table[source] = target.get<std::string>();
        canonical.insert(target.get<std::string>());
    }
    // The canonical side is whatever the config declares as targets.
    return LabelMap(std::move(table), std::move(canonical));
}

} // namespace

PipelineConfig parse_pipeline_config(const nlohmann::json& j) {
    reject_unknown(j, {"recognizers", "anonymizer", "metrics", "io"}, "config");
    PipelineConfig c;

    if (j.contains("recognizers")) {
        const auto& r = j.at("recognizers");
        reject_unknown(r, {"patterns", "adapters", "priority"}, "config.recognizers");
        if (r.contains("patterns")) {
            for (const auto& p : r.at("patterns")) {
                reject_unknown(p, {"name", "regex", "score"}, "config.recognizers.patterns[]");
                c.patterns.push_back({p.at("name").get<std::string>(),
                                      p.at("regex").get<std::string>(),
                                      p.value("score", 0.5)});
            }
        }
        if (r.contains("adapters")) {
            for (const auto& a : r.at("adapters")) {
                reject_unknown(a, {"name", "kind", "command", "path", "labels"},
                               "config.recognizers.adapters[]");
                AdapterDecl decl;
                decl.name = a.at("name").get<std::string>();
                const std::string kind = a.value("kind", "command");
                if (kind == "command") decl.kind = AdapterDecl::Kind::command;
                else if (kind == "file") decl.kind = AdapterDecl::Kind::file;
                else throw ConfigError("adapter " + decl.name + ": unknown kind \"" + kind + "\"");
                if (a.contains("command"))
                    decl.command = a.at("command").get<std::vector<std::string>>();
                if (a.contains("path")) decl.path = a.at("path").get<std::string>();
                if (a.contains("labels"))
                    decl.labels = label_map_from_json(a.at("labels"),
                                                      "config adapter " + decl.name + " labels");
                if (decl.kind == AdapterDecl::Kind::command && decl.command.empty())
                    throw ConfigError("adapter " + decl.name + ": command kind needs a command");
                if (decl.kind == AdapterDecl::Kind::file && decl.path.empty())
                    throw ConfigError("adapter " + decl.name + ": file kind needs a path");
                c.adapters.push_back(std::move(decl));
            }
        }
        if (r.contains("priority"))
            c.merge_policy.priority = r.at("priority").get<std::vector<std::string>>();
        // Every name in the priority list must exist.
        std::set<std::string> known;
        for (const auto& p : c.patterns) known.insert("pattern:" + p.name);
        for (const auto& a : c.adapters) known.insert("adapter:" + a.name);
        for (const auto& name : c.merge_policy.priority)
            if (!known.count(name))
                throw ConfigError("config.recognizers.priority names unknown recognizer \"" +
                                  name + "\"");
    }

    if (j.contains("anonymizer")) {
        const auto& a = j.at("anonymizer");
        reject_unknown(a, {"strategy", "salt", "hash_len", "mask_char", "simulate_inline"},
                       "config.anonymizer");
        c.anonymizer.strategy = strategy_from_string(a.value("strategy", "substitute"));
        if (a.contains("salt")) c.anonymizer.salt = a.at("salt").get<std::string>();
        if (a.contains("hash_len")) c.anonymizer.hash_len = a.at("hash_len").get<std::size_t>();
        if (a.contains("mask_char")) {
            const std::string mc = a.at("mask_char").get<std::string>();
            if (mc.size() != 1) throw ConfigError("config.anonymizer.mask_char: need one character");
            c.anonymizer.mask_char = mc[0];
        }
        c.anonymizer.simulate_inline = a.value("simulate_inline", false);
        c.anonymizer.validate();
    }
    if (c.anonymizer.salt.empty()) {
        if (const char* env_salt = std::getenv("VEILKIT_SALT")) c.anonymizer.salt = env_salt;
    }

    if (j.contains("metrics")) {
        const auto& m = j.at("metrics");
        reject_unknown(m, {"alpha"}, "config.metrics");
        c.alpha = m.value("alpha", 0.5);
        if (!(c.alpha >= 0.0 && c.alpha <= 1.0))
            throw ConfigError("config.metrics.alpha outside [0,1]");
    }

    if (j.contains("io")) {
        const auto& io = j.at("io");
        reject_unknown(io,
                       {"input", "annotated", "anonymized", "report", "mapping", "export_mapping",
                        "byte_offsets"},
                       "config.io");
        c.input_path = io.value("input", "");
        c.annotated_path = io.value("annotated", "");
        c.anonymized_path = io.value("anonymized", "");
        c.report_path = io.value("report", "");
        c.export_mapping = io.value("export_mapping", false);
        if (io.contains("mapping")) c.mapping_path = io.at("mapping").get<std::string>();
        c.input_offsets_are_bytes = io.value("byte_offsets", false);
        if (c.export_mapping && !c.mapping_path)
            throw ConfigError("config.io: export_mapping requires a mapping path");
    }

    // Pattern and regex problems surface now, not mid-run.
    const PatternSet precompile(c.patterns);
    (void)precompile;
    return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_pipeline_config(j);
}

std::vector<AnnotatedDocument> run_recognize(const std::vector<AnnotatedDocument>& input,
                                             const PipelineConfig& config) {
    const PatternSet patterns(config.patterns);

    std::vector<std::unique_ptr<ExternalAdapter>> adapters;
    for (const auto& decl : config.adapters) adapters.push_back(make_adapter(decl));

    std::vector<AnnotatedDocument> out;
    out.reserve(input.size());
    for (const auto& adoc : input) {
        try {
            std::vector<std::pair<std::string, std::vector<EntitySpan>>> spanlists;
            if (!adoc.spans.empty()) spanlists.emplace_back("input", adoc.spans);
            if (!config.patterns.empty()) {
                auto spans = patterns.recognize(adoc.doc);
                // Split per pattern so the priority list can address each one.
                for (const auto& p : config.patterns) {
                    std::vector<EntitySpan> mine;
                    for (const auto& s : spans)
                        if (s.source == "pattern:" + p.name) mine.push_back(s);
                    spanlists.emplace_back("pattern:" + p.name, std::move(mine));
                }
            }
            for (std::size_t i = 0; i < adapters.size(); ++i) {
                spanlists.emplace_back(
                    "adapter:" + config.adapters[i].name,
                    recognize_external(adoc.doc, *adapters[i], config.adapters[i].labels));
            }
            AnnotatedDocument merged{adoc.doc, merge(spanlists, config.merge_policy)};
            out.push_back(std::move(merged));
        } catch (const Error& e) {
            throw StageError("recognize", adoc.doc.id, e.what());
        }
    }
    return out;
}

std::vector<AnonymizedDoc> run_anonymize(const std::vector<AnnotatedDocument>& annotated,
                                         const PipelineConfig& config) {
    std::vector<AnonymizedDoc> out;
    out.reserve(annotated.size());
    for (const auto& adoc : annotated) {
        try {
            out.push_back({adoc.doc.id, adoc.doc.text, anonymize(adoc, config.anonymizer)});
        } catch (const Error& e) {
            throw StageError("anonymize", adoc.doc.id, e.what());
        }
    }
    return out;
}

std::string occurrence_token_key(const std::string& label, const std::string& surface) {
    return label + ":" + surface;
}

EvaluateOutcome run_evaluate(const std::vector<AnnotatedDocument>& original,
                             const std::vector<AnonymizedDoc>& anonymized, double alpha) {
    std::string original_text, anonymized_text;
    for (const auto& d : original) {
        original_text += d.doc.text;
        original_text += '\n';
    }
    std::vector<DocOccurrences> per_doc;
    per_doc.reserve(anonymized.size());
    for (const auto& d : anonymized) {
        anonymized_text += d.result.text;
        anonymized_text += '\n';
        DocOccurrences occ{d.id, {}};
        for (const auto& r : d.result.replacements) {
            if (r.replacement.empty()) continue;  // redacted spans leave no placeholder
            occ.occurrences.push_back(
                {occurrence_token_key(r.original.label, r.original.surface), r.replacement});
        }
        per_doc.push_back(std::move(occ));
    }
    return evaluate_corpus(original_text, anonymized_text, per_doc, alpha);
}

nlohmann::json anonymized_doc_to_json(const AnonymizedDoc& doc) {
    nlohmann::json j = doc.result.to_json(doc.id);
    j["original_text"] = doc.original_text;
    return j;
}

AnonymizedDoc anonymized_doc_from_json(const nlohmann::json& j) {
    AnonymizedDoc d;
    d.id = j.at("id").get<std::string>();
    d.original_text = j.value("original_text", "");
    d.result.text = j.at("text").get<std::string>();
    for (const auto& r : j.at("replacements")) {
        Replacement rep;
        rep.original.label = r.at("label").get<std::string>();
        rep.original.start = r.at("start").get<std::size_t>();
        rep.original.end = r.at("end").get<std::size_t>();
        rep.original.surface = r.at("surface").get<std::string>();
        rep.replacement = r.at("placeholder").get<std::string>();
        rep.new_start = r.at("new_start").get<std::size_t>();
        rep.new_end = r.at("new_end").get<std::size_t>();
        d.result.replacements.push_back(std::move(rep));
    }
    return d;
}

std::vector<AnonymizedDoc> read_anonymized_jsonl(std::istream& in) {
    std::vector<AnonymizedDoc> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            docs.push_back(anonymized_doc_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return docs;
}

void write_anonymized_jsonl(std::ostream& out, const std::vector<AnonymizedDoc>& docs) {
    for (const auto& d : docs) out << anonymized_doc_to_json(d).dump() << "\n";
}

namespace {

std::vector<AnnotatedDocument> read_docs_file(const std::string& path, bool byte_offsets) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input " + path);
    return read_standoff_jsonl(in, byte_offsets);
}

void write_docs_file(const std::string& path, const std::vector<AnnotatedDocument>& docs) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    write_standoff_jsonl(out, docs);
}

} // namespace

PipelineArtifacts run_pipeline(const PipelineConfig& config) {
    if (config.input_path.empty()) throw ConfigError("config.io.input is required");

    const auto input = read_docs_file(config.input_path, config.input_offsets_are_bytes);
    const auto annotated = run_recognize(input, config);
    if (!config.annotated_path.empty()) write_docs_file(config.annotated_path, annotated);

    const auto anonymized = run_anonymize(annotated, config);
    if (!config.anonymized_path.empty()) {
        std::ofstream out(config.anonymized_path);
        if (!out) throw DataError("cannot write " + config.anonymized_path);
        write_anonymized_jsonl(out, anonymized);
    }
    if (config.export_mapping && config.mapping_path) {
        std::map<std::pair<std::string, std::string>, std::string> merged;
        for (const auto& d : anonymized)
            merged.insert(d.result.mapping.begin(), d.result.mapping.end());
        std::ofstream out(*config.mapping_path);
        if (!out) throw DataError("cannot write " + *config.mapping_path);
        out << mapping_to_json(merged).dump(2) << "\n";
    }

    auto outcome = run_evaluate(input, anonymized, config.alpha);
    if (!config.report_path.empty()) {
        std::ofstream out(config.report_path);
        if (!out) throw DataError("cannot write " + config.report_path);
        out << outcome.report.to_json().dump(2) << "\n";
    }

    return {input.size(), outcome.report, outcome.warnings};
}

} // namespace veilkit
