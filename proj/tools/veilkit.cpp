// veilkit: batch de-identification toolkit.
//
//   recognize | anonymize | evaluate | pipeline   text stages (JSONL in/out)
//   wer | synth | dork | classify | parse-telegram | audio-clean
//
// Usage errors exit 2; data/config errors exit 1 with a JSON error object on
// stderr. The anonymization salt may come from VEILKIT_SALT (never logged).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "veilkit/audio.hpp"
#include "veilkit/errors.hpp"
#include "veilkit/ingest.hpp"
#include "veilkit/metrics.hpp"
#include "veilkit/pipeline.hpp"
#include "veilkit/synth.hpp"

namespace {

using namespace veilkit;

std::vector<std::string> read_words(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<std::string> words;
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw DataError("cannot write " + path);
    return file;
}

void emit_error(const std::string& kind, const std::string& message, const std::string& stage = "",
                const std::string& doc = "") {
    nlohmann::json j{{"error", {{"kind", kind}, {"message", message}}}};
    if (!stage.empty()) j["error"]["stage"] = stage;
    if (!doc.empty()) j["error"]["doc"] = doc;
    std::cerr << j.dump() << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"de-identification toolkit: recognize, anonymize, evaluate"};
    app.require_subcommand(1);

    std::uint64_t global_seed = 0;
    const auto* seed_opt =
        app.add_option("--seed", global_seed, "seed for every randomized component");

    // ---- text pipeline stages ---------------------------------------------
    std::string config_path, in_path, out_path;

    bool simulate_inline = false;
    auto* cmd_pipeline = app.add_subcommand("pipeline", "recognize, anonymize, and evaluate");
    cmd_pipeline->add_option("--config", config_path, "pipeline config JSON")->required();
    cmd_pipeline->add_flag("--simulate-inline", simulate_inline,
                           "per-occurrence salting test mode (metric validation baseline)");

    auto* cmd_recognize = app.add_subcommand("recognize", "pattern + adapter entity recognition");
    cmd_recognize->add_option("--config", config_path, "pipeline config JSON")->required();
    cmd_recognize->add_option("--in", in_path, "override config input JSONL");
    cmd_recognize->add_option("--out", out_path, "override annotated output JSONL");

    auto* cmd_anonymize = app.add_subcommand("anonymize", "rewrite recognized spans");
    cmd_anonymize->add_option("--config", config_path, "pipeline config JSON")->required();
    cmd_anonymize->add_flag("--simulate-inline", simulate_inline,
                            "per-occurrence salting test mode (metric validation baseline)");
    cmd_anonymize->add_option("--in", in_path, "annotated JSONL (default: config annotated path)");
    cmd_anonymize->add_option("--out", out_path, "anonymized JSONL (default: config path)");

    std::string anonymized_path, original_path;
    double alpha = 0.5;
    auto* cmd_evaluate = app.add_subcommand("evaluate", "compute the anonymization metrics");
    cmd_evaluate->add_option("--anonymized", anonymized_path, "anonymized JSONL")->required();
    cmd_evaluate->add_option("--original", original_path,
                             "original JSONL (defaults to embedded original_text)");
    cmd_evaluate->add_option("--alpha", alpha, "consistency weight in the error rate")
        ->check(CLI::Range(0.0, 1.0));
    cmd_evaluate->add_option("--out", out_path, "report path (default stdout)");

    // ---- wer ----------------------------------------------------------------
    std::string ref_path, hyp_path, weights_arg;
    auto* cmd_wer = app.add_subcommand("wer", "weighted word error rate");
    cmd_wer->add_option("--ref", ref_path, "reference transcript")->required();
    cmd_wer->add_option("--hyp", hyp_path, "hypothesis transcript")->required();
    cmd_wer->add_option("--weights", weights_arg, "ins,del,sub (default 0.10,0.45,0.45)");

    // ---- synth ----------------------------------------------------------------
    std::string spec_path;
    auto* cmd_synth = app.add_subcommand("synth", "seeded synthetic PII corpus");
    cmd_synth->add_option("--spec", spec_path, "SynthSpec JSON")->required();
    cmd_synth->add_option("--out", out_path, "corpus JSONL (default stdout)");

    // ---- ingest ----------------------------------------------------------------
    std::string term, url, html_path;
    auto* cmd_dork = app.add_subcommand("dork", "search queries for both t.me link forms");
    cmd_dork->add_option("--term", term, "search term")->required();

    auto* cmd_classify = app.add_subcommand("classify", "classify a t.me link");
    cmd_classify->add_option("--url", url, "URL to classify")->required();

    auto* cmd_parse = app.add_subcommand("parse-telegram", "extract messages from a preview page");
    cmd_parse->add_option("--html", html_path, "saved t.me/s page")->required();
    cmd_parse->add_option("--out", out_path, "messages JSONL (default stdout)");

    // ---- audio ----------------------------------------------------------------
    std::string wav_in, wav_out, intervals_path;
    CleanParams clean_params;
    auto* cmd_audio = app.add_subcommand("audio-clean", "voice-enhancing noise reduction");
    cmd_audio->add_option("--in", wav_in, "input WAV (PCM16)")->required();
    cmd_audio->add_option("--out", wav_out, "output WAV")->required();
    cmd_audio->add_option("--vad-intervals", intervals_path,
                          "JSON voice intervals from an external VAD");
    cmd_audio->add_option("--fft-size", clean_params.fft_size, "analysis size (power of two)");
    cmd_audio->add_option("--hop", clean_params.hop, "analysis hop");
    cmd_audio->add_option("--reduction-db", clean_params.reduction_db, "gate attenuation");
    cmd_audio->add_option("--gate-factor", clean_params.gate_factor, "threshold over noise profile");
    cmd_audio->add_option("--frame-ms", clean_params.vad.frame_ms, "VAD frame length");
    cmd_audio->add_option("--threshold-db", clean_params.vad.threshold_db, "VAD margin over median");

    for (auto* cmd : app.get_subcommands({})) cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*cmd_pipeline) {
            auto config = load_pipeline_config(config_path);
            if (simulate_inline) config.anonymizer.simulate_inline = true;
            const auto artifacts = run_pipeline(config);
            for (const auto& w : artifacts.warnings) std::cerr << "warning: " << w << "\n";
            nlohmann::json summary{{"documents", artifacts.documents},
                                   {"report", artifacts.report.to_json()}};
            std::cout << summary.dump(2) << "\n";
        } else if (*cmd_recognize) {
            auto config = load_pipeline_config(config_path);
            if (!in_path.empty()) config.input_path = in_path;
            if (!out_path.empty()) config.annotated_path = out_path;
            std::ifstream in(config.input_path);
            if (!in) throw DataError("cannot open " + config.input_path);
            const auto docs = read_standoff_jsonl(in, config.input_offsets_are_bytes);
            const auto annotated = run_recognize(docs, config);
            std::ofstream file;
            write_standoff_jsonl(open_output(file, config.annotated_path), annotated);
        } else if (*cmd_anonymize) {
            auto config = load_pipeline_config(config_path);
            if (simulate_inline) config.anonymizer.simulate_inline = true;
            const std::string src = in_path.empty() ? config.annotated_path : in_path;
            if (src.empty()) throw ConfigError("anonymize: no annotated input path");
            std::ifstream in(src);
            if (!in) throw DataError("cannot open " + src);
            const auto annotated = read_standoff_jsonl(in);
            const auto anonymized = run_anonymize(annotated, config);
            std::ofstream file;
            write_anonymized_jsonl(
                open_output(file, out_path.empty() ? config.anonymized_path : out_path),
                anonymized);
        } else if (*cmd_evaluate) {
            std::ifstream anon_in(anonymized_path);
            if (!anon_in) throw DataError("cannot open " + anonymized_path);
            const auto anonymized = read_anonymized_jsonl(anon_in);
            std::vector<AnnotatedDocument> originals;
            if (!original_path.empty()) {
                std::ifstream orig_in(original_path);
                if (!orig_in) throw DataError("cannot open " + original_path);
                originals = read_standoff_jsonl(orig_in);
            } else {
                for (const auto& d : anonymized)
                    originals.push_back({{d.id, d.original_text, std::nullopt}, {}});
            }
            const auto outcome = run_evaluate(originals, anonymized, alpha);
            for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
            std::ofstream file;
            open_output(file, out_path) << outcome.report.to_json().dump(2) << "\n";
        } else if (*cmd_wer) {
            WerWeights weights;
            if (!weights_arg.empty()) {
                double i, d, s;
                if (std::sscanf(weights_arg.c_str(), "%lf,%lf,%lf", &i, &d, &s) != 3)
                    throw ConfigError("--weights expects ins,del,sub");
                weights = {i, d, s};
            }
            const auto breakdown = weighted_wer(read_words(ref_path), read_words(hyp_path), weights);
            std::cout << breakdown.to_json().dump(2) << "\n";
        } else if (*cmd_synth) {
            std::ifstream in(spec_path);
            if (!in) throw DataError("cannot open " + spec_path);
            nlohmann::json j;
            in >> j;
            auto spec = SynthSpec::from_json(j);
            if (seed_opt->count() > 0) spec.seed = global_seed;
            const auto corpus = gen_corpus(spec);
            std::ofstream file;
            write_standoff_jsonl(open_output(file, out_path), corpus);
        } else if (*cmd_dork) {
            std::cout << nlohmann::json(build_dorks(term)).dump() << "\n";
        } else if (*cmd_classify) {
            const auto link = classify_link(url);
            const nlohmann::json j{
                {"kind",
                 link.kind == TelegramLink::Kind::public_channel ? "public" : "private_invite"},
                {"value", link.value},
                {"url", link.render()}};
            std::cout << j.dump() << "\n";
        } else if (*cmd_parse) {
            const auto result = extract_messages(read_file(html_path));
            for (const auto& d : result.diagnostics) std::cerr << "warning: " << d << "\n";
            std::ofstream file;
            auto& out = open_output(file, out_path);
            for (const auto& m : result.messages) out << m.to_json().dump() << "\n";
        } else if (*cmd_audio) {
            const auto buf = read_wav(wav_in);
            if (!intervals_path.empty()) {
                clean_params.use_override = true;
                clean_params.voice_intervals_override =
                    read_intervals_json(intervals_path, buf.rate, buf.samples.size());
            }
            const auto result = clean(buf, clean_params);
            write_wav(wav_out, result.out);
            const nlohmann::json j{{"in", wav_in},
                                   {"out", wav_out},
                                   {"samples", result.out.samples.size()},
                                   {"rate", result.out.rate},
                                   {"passthrough", result.passthrough}};
            std::cout << j.dump() << "\n";
        }
    } catch (const StageError& e) {
        emit_error("stage", e.what(), e.stage, e.doc_id);
        return 1;
    } catch (const ConfigError& e) {
        emit_error("config", e.what());
        return 1;
    } catch (const Error& e) {
        emit_error("data", e.what());
        return 1;
    } catch (const nlohmann::json::exception& e) {
        emit_error("json", e.what());
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) { return run(argc, argv); }
