#include "veilkit/recognize.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <regex>

#include <json.hpp>

#include "veilkit/errors.hpp"
#include "veilkit/subprocess.hpp"
#include "veilkit/unicode.hpp"

namespace veilkit {

namespace {

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (const char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

struct PatternSet::Compiled {
    std::regex re;
    std::string label;
};

PatternSet::PatternSet(std::vector<Pattern> patterns) : patterns_(std::move(patterns)) {
    auto compiled = std::make_shared<std::vector<Compiled>>();
    for (const auto& p : patterns_) {
        if (!is_identifier(p.name))
            throw ConfigError("pattern name \"" + p.name + "\" is not an identifier");
        if (!(p.score >= 0.0 && p.score <= 1.0))
            throw ConfigError("pattern \"" + p.name + "\": score outside [0,1]");
        try {
            compiled->push_back({std::regex(p.regex, std::regex::ECMAScript), upper(p.name)});
        } catch (const std::regex_error& e) {
            throw ConfigError("pattern \"" + p.name + "\": invalid regex: " + e.what());
        }
    }
    compiled_ = std::move(compiled);
}

std::vector<EntitySpan> PatternSet::recognize(const Document& doc) const {
    const std::string& text = doc.text;
    // Byte offset -> code point index, for translating regex match positions.
    const auto cp_offsets = unicode::cp_byte_offsets(text);
    std::map<std::size_t, std::size_t> byte_to_cp;
    for (std::size_t cp = 0; cp < cp_offsets.size(); ++cp) byte_to_cp[cp_offsets[cp]] = cp;

    std::vector<EntitySpan> spans;
    for (std::size_t pi = 0; pi < patterns_.size(); ++pi) {
        const auto& c = (*compiled_)[pi];
        auto begin = std::cregex_iterator(text.data(), text.data() + text.size(), c.re);
        for (auto it = begin; it != std::cregex_iterator(); ++it) {
            const std::size_t b0 = static_cast<std::size_t>(it->position());
            const std::size_t b1 = b0 + static_cast<std::size_t>(it->length());
            if (b1 == b0) continue;  // ignore empty matches
            const auto lo = byte_to_cp.find(b0);
            const auto hi = byte_to_cp.find(b1);
            if (lo == byte_to_cp.end() || hi == byte_to_cp.end())
                continue;  // match not aligned to code point boundaries
            spans.push_back({c.label, lo->second, hi->second, it->str(), patterns_[pi].score,
                             "pattern:" + patterns_[pi].name});
        }
    }
    sort_spans(spans);
    return spans;
}

std::vector<EntitySpan> recognize_patterns(const Document& doc,
                                           const std::vector<Pattern>& patterns) {
    return PatternSet(patterns).recognize(doc);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<EntitySpan> parse_entities(const nlohmann::json& entities, const Document& doc,
                                       const std::string& adapter_name) {
    const auto offsets = unicode::cp_byte_offsets(doc.text);
    const std::size_t n = offsets.size() - 1;
    std::vector<EntitySpan> spans;
    for (const auto& e : entities) {
        EntitySpan s;
        try {
            s.label = e.at("label").get<std::string>();
            s.start = e.at("start").get<std::size_t>();
            s.end = e.at("end").get<std::size_t>();
            if (e.contains("score")) s.score = e.at("score").get<double>();
        } catch (const nlohmann::json::exception& ex) {
            throw AdapterError("adapter " + adapter_name + ", doc " + doc.id +
                               ": malformed entity record " + e.dump() + ": " + ex.what());
        }
        if (s.start >= s.end || s.end > n)
            throw AdapterError("adapter " + adapter_name + ", doc " + doc.id +
                               ": offsets out of range in record " + e.dump());
        const std::string slice = doc.text.substr(offsets[s.start], offsets[s.end] - offsets[s.start]);
        if (e.contains("text")) {
            s.surface = e.at("text").get<std::string>();
            if (s.surface != slice)
                throw AdapterError("adapter " + adapter_name + ", doc " + doc.id +
                                   ": surface mismatch in record " + e.dump());
        } else {
            s.surface = slice;
        }
        if (!(s.score >= 0.0 && s.score <= 1.0))
            throw AdapterError("adapter " + adapter_name + ", doc " + doc.id +
                               ": score outside [0,1] in record " + e.dump());
        s.source = "adapter:" + adapter_name;
        spans.push_back(std::move(s));
    }
    sort_spans(spans);
    return spans;
}

class SubprocessAdapter final : public ExternalAdapter {
public:
    explicit SubprocessAdapter(AdapterDecl decl)
        : decl_(std::move(decl)), proc_(decl_.command) {
        const std::string handshake = proc_.read_line();
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(handshake);
        } catch (const nlohmann::json::exception&) {
            throw AdapterError("adapter " + decl_.name + ": bad handshake line: " + handshake);
        }
        if (!j.contains("protocol") || j.at("protocol") != "ner-adapter/1")
            throw AdapterError("adapter " + decl_.name + ": unsupported protocol in handshake: " +
                               handshake);
    }

    const std::string& name() const override { return decl_.name; }

    std::vector<EntitySpan> predict(const Document& doc) override {
        const nlohmann::json request{{"id", doc.id}, {"text", doc.text}};
        proc_.write_line(request.dump());
        const std::string line = proc_.read_line();
        nlohmann::json response;
        try {
            response = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw AdapterError("adapter " + decl_.name + ", doc " + doc.id +
                               ": response is not JSON: " + e.what());
        }
        if (!response.contains("id") || response.at("id") != doc.id)
            throw AdapterError("adapter " + decl_.name + ", doc " + doc.id +
                               ": response id mismatch: " + line);
        if (!response.contains("entities") || !response.at("entities").is_array())
            throw AdapterError("adapter " + decl_.name + ", doc " + doc.id +
                               ": response lacks entities array");
        return parse_entities(response.at("entities"), doc, decl_.name);
    }

private:
    AdapterDecl decl_;
    Subprocess proc_;
};

class FileAdapter final : public ExternalAdapter {
public:
    explicit FileAdapter(AdapterDecl decl) : decl_(std::move(decl)) {
        std::ifstream in(decl_.path);
        if (!in) throw AdapterError("adapter " + decl_.name + ": cannot open " + decl_.path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw AdapterError("adapter " + decl_.name + ": " + decl_.path + ":" +
                                   std::to_string(line_no) + ": " + e.what());
            }
            if (line_no == 1 && j.contains("protocol")) {
                if (j.at("protocol") != "ner-adapter/1")
                    throw AdapterError("adapter " + decl_.name + ": unsupported protocol in " +
                                       decl_.path);
                continue;
            }
            predictions_[j.at("id").get<std::string>()] = j;
        }
    }

    const std::string& name() const override { return decl_.name; }

    std::vector<EntitySpan> predict(const Document& doc) override {
        const auto it = predictions_.find(doc.id);
        if (it == predictions_.end())
            throw AdapterError("adapter " + decl_.name + ": no prediction for doc " + doc.id);
        if (!it->second.contains("entities") || !it->second.at("entities").is_array())
            throw AdapterError("adapter " + decl_.name + ", doc " + doc.id +
                               ": record lacks entities array");
        return parse_entities(it->second.at("entities"), doc, decl_.name);
    }

private:
    AdapterDecl decl_;
    std::map<std::string, nlohmann::json> predictions_;
};

} // namespace

std::unique_ptr<ExternalAdapter> make_adapter(const AdapterDecl& decl) {
    if (decl.kind == AdapterDecl::Kind::command) {
        if (decl.command.empty())
            throw ConfigError("adapter " + decl.name + ": empty command");
        return std::make_unique<SubprocessAdapter>(decl);
    }
    return std::make_unique<FileAdapter>(decl);
}

std::vector<EntitySpan> recognize_external(const Document& doc, ExternalAdapter& adapter,
                                           const LabelMap& labels) {
    std::vector<EntitySpan> raw = adapter.predict(doc);
    if (labels.empty()) return raw;
    try {
        return normalize_labels(raw, labels);
    } catch (const DataError& e) {
        throw AdapterError("adapter " + adapter.name() + ", doc " + doc.id + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

std::vector<EntitySpan> merge(
    const std::vector<std::pair<std::string, std::vector<EntitySpan>>>& spanlists,
    const MergePolicy& policy) {
    struct Candidate {
        EntitySpan span;
        std::size_t priority;
        std::size_t input_order;
    };

    auto priority_of = [&](const std::string& recognizer) -> std::size_t {
        for (std::size_t i = 0; i < policy.priority.size(); ++i)
            if (policy.priority[i] == recognizer) return i;
        return policy.priority.size();  // unlisted recognizers rank last, by input order
    };

    std::vector<Candidate> candidates;
    std::size_t order = 0;
    for (std::size_t li = 0; li < spanlists.size(); ++li) {
        const std::size_t prio = priority_of(spanlists[li].first);
        for (const auto& s : spanlists[li].second)
            candidates.push_back({s, prio == policy.priority.size() ? prio + li : prio, order++});
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.span.score != b.span.score) return a.span.score > b.span.score;
        if (a.span.length() != b.span.length()) return a.span.length() > b.span.length();
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.input_order < b.input_order;
    });

    std::vector<EntitySpan> accepted;
    for (const auto& c : candidates) {
        const bool clashes = std::any_of(accepted.begin(), accepted.end(),
                                         [&](const EntitySpan& s) { return s.overlaps(c.span); });
        if (!clashes) accepted.push_back(c.span);
    }
    sort_spans(accepted);
    return accepted;
}

} // namespace veilkit
