#include "veilkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "veilkit/errors.hpp"
#include "veilkit/unicode.hpp"

namespace veilkit {

std::vector<std::string> whitespace_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) words.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return words;
}

double shannon_entropy(const std::vector<std::string>& words) {
    if (words.empty()) return 0.0;
    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& w : words) ++freq[w];
    const double n = static_cast<double>(words.size());
    double e = 0.0;
    for (const auto& [w, count] : freq) {
        const double p = static_cast<double>(count) / n;
        e -= p * std::log2(p);
    }
    return e;
}

double shannon_entropy(std::string_view text) { return shannon_entropy(whitespace_words(text)); }

double information_loss(std::string_view original, std::string_view anonymized) {
    return shannon_entropy(original) - shannon_entropy(anonymized);
}

namespace {

// Canonical placeholder per token: modal, ties broken by first occurrence.
std::map<std::string, std::string> canonical_placeholders(
    const std::vector<Occurrence>& occurrences) {
    struct Tally {
        std::map<std::string, std::size_t> counts;
        std::vector<std::string> first_seen;  // placeholders in first-occurrence order
    };
    std::map<std::string, Tally> by_token;
    for (const auto& occ : occurrences) {
        auto& t = by_token[occ.token];
        if (t.counts[occ.placeholder]++ == 0) t.first_seen.push_back(occ.placeholder);
    }
    std::map<std::string, std::string> canonical;
    for (auto& [token, tally] : by_token) {
        std::size_t best = 0;
        const std::string* winner = nullptr;
        for (const auto& ph : tally.first_seen) {
            const std::size_t c = tally.counts[ph];
            if (c > best) {
                best = c;
                winner = &ph;
            }
        }
        canonical[token] = *winner;
    }
    return canonical;
}

} // namespace

double consistency(const std::vector<Occurrence>& occurrences) {
    if (occurrences.empty()) throw UndefinedMetricError("consistency: no occurrences");
    return consistency(occurrences, canonical_placeholders(occurrences));
}

double consistency(const std::vector<Occurrence>& occurrences,
                   const std::map<std::string, std::string>& reference_mapping) {
    if (occurrences.empty()) throw UndefinedMetricError("consistency: no occurrences");
    std::map<std::string, std::pair<std::size_t, std::size_t>> correct_total;
    for (const auto& occ : occurrences) {
        auto& [correct, total] = correct_total[occ.token];
        const auto it = reference_mapping.find(occ.token);
        if (it != reference_mapping.end() && it->second == occ.placeholder) ++correct;
        ++total;
    }
    double sum = 0.0;
    for (const auto& [token, ct] : correct_total)
        sum += static_cast<double>(ct.first) / static_cast<double>(ct.second);
    return sum / static_cast<double>(correct_total.size());
}

CollisionCounts collision_counts(const std::vector<Occurrence>& occurrences) {
    std::map<std::string, std::set<std::string>> tokens_per_hash;
    std::set<std::string> tokens;
    for (const auto& occ : occurrences) {
        tokens_per_hash[occ.placeholder].insert(occ.token);
        tokens.insert(occ.token);
    }
    CollisionCounts c;
    c.unique_tokens = tokens.size();
    c.unique_hashes = tokens_per_hash.size();
    for (const auto& [hash, producers] : tokens_per_hash)
        if (producers.size() > 1) ++c.colliding_hashes;
    return c;
}

double collision_degree(const std::vector<Occurrence>& occurrences) {
    if (occurrences.empty()) throw UndefinedMetricError("collision_degree: no occurrences");
    const CollisionCounts c = collision_counts(occurrences);
    return static_cast<double>(c.unique_hashes - c.colliding_hashes) /
           static_cast<double>(c.unique_hashes);
}

double collision_degree(const std::map<std::string, std::string>& token_to_placeholder) {
    std::vector<Occurrence> occ;
    occ.reserve(token_to_placeholder.size());
    for (const auto& [t, h] : token_to_placeholder) occ.push_back({t, h});
    return collision_degree(occ);
}

double error_rate(double consistency, double collision_degree, double alpha) {
    return 1.0 - (alpha * consistency + (1.0 - alpha) * collision_degree);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    // Decode to code points; distance is over characters, not bytes.
    std::vector<char32_t> ca, cb;
    for (std::size_t i = 0; i < a.size();) ca.push_back(unicode::decode_at(a, i));
    for (std::size_t i = 0; i < b.size();) cb.push_back(unicode::decode_at(b, i));

    const std::size_t n = ca.size(), m = cb.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (ca[i - 1] == cb[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

CorrelationDetail avg_correlation(const std::map<std::string, std::string>& map_a,
                                  const std::map<std::string, std::string>& map_b) {
    std::set<std::string> hashes;
    for (const auto& [t, h] : map_a) hashes.insert(h);
    for (const auto& [t, h] : map_b) hashes.insert(h);

    double sum = 0.0;
    std::size_t shared = 0;
    for (const auto& [token, ha] : map_a) {
        const auto it = map_b.find(token);
        if (it == map_b.end()) continue;
        ++shared;
        const std::string& hb = it->second;
        const std::size_t max_len =
            std::max(unicode::cp_length(ha), unicode::cp_length(hb));
        if (max_len == 0) {
            sum += 1.0;  // two empty hashes are identical
            continue;
        }
        sum += 1.0 - static_cast<double>(levenshtein(ha, hb)) / static_cast<double>(max_len);
    }
    if (shared == 0)
        throw UndefinedMetricError("avg_correlation: maps share no token");
    return {sum / static_cast<double>(hashes.size()), shared, hashes.size()};
}

NerScore ner_score(const std::vector<EntitySpan>& gold, const std::vector<EntitySpan>& predicted,
                   MatchMode mode) {
    std::size_t tp = 0;
    if (mode == MatchMode::exact) {
        std::multiset<std::tuple<std::string, std::size_t, std::size_t>> gold_keys;
        for (const auto& g : gold) gold_keys.insert({g.label, g.start, g.end});
        for (const auto& p : predicted) {
            const auto it = gold_keys.find({p.label, p.start, p.end});
            if (it != gold_keys.end()) {
                ++tp;
                gold_keys.erase(it);
            }
        }
    } else {
        // Greedy one-to-one pairing by descending overlap length; ties fall
        // back to earlier gold then earlier predicted index.
        struct Cand {
            std::size_t overlap, gi, pi;
        };
        std::vector<Cand> cands;
        for (std::size_t gi = 0; gi < gold.size(); ++gi) {
            for (std::size_t pi = 0; pi < predicted.size(); ++pi) {
                const auto& g = gold[gi];
                const auto& p = predicted[pi];
                if (g.label != p.label) continue;
                const std::size_t lo = std::max(g.start, p.start);
                const std::size_t hi = std::min(g.end, p.end);
                if (lo < hi) cands.push_back({hi - lo, gi, pi});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.overlap != b.overlap) return a.overlap > b.overlap;
            if (a.gi != b.gi) return a.gi < b.gi;
            return a.pi < b.pi;
        });
        std::vector<bool> gold_used(gold.size()), pred_used(predicted.size());
        for (const auto& c : cands) {
            if (gold_used[c.gi] || pred_used[c.pi]) continue;
            gold_used[c.gi] = pred_used[c.pi] = true;
            ++tp;
        }
    }

    NerScore s;
    s.tp = tp;
    s.fp = predicted.size() - tp;
    s.fn = gold.size() - tp;
    s.precision = (s.tp + s.fp) ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp) : 0.0;
    s.recall = (s.tp + s.fn) ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn) : 0.0;
    s.f1 = (s.precision + s.recall > 0.0)
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

WerBreakdown weighted_wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp,
                          const WerWeights& weights) {
    if (ref.empty()) throw UndefinedMetricError("weighted_wer: empty reference");

    const std::size_t n = ref.size(), m = hyp.size();
    struct Cell {
        double cost;
        std::size_t s, d, i;
    };
    std::vector<std::vector<Cell>> dp(n + 1, std::vector<Cell>(m + 1));
    dp[0][0] = {0.0, 0, 0, 0};
    for (std::size_t j = 1; j <= m; ++j)
        dp[0][j] = {dp[0][j - 1].cost + weights.ins, 0, 0, j};
    for (std::size_t i = 1; i <= n; ++i)
        dp[i][0] = {dp[i - 1][0].cost + weights.del, 0, i, 0};

    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            // Preference on equal cost: substitution/match, then deletion,
            // then insertion — keeps breakdowns reproducible.
            const bool match = ref[i - 1] == hyp[j - 1];
            Cell best = dp[i - 1][j - 1];
            best.cost += match ? 0.0 : weights.sub;
            if (!match) ++best.s;

            const double del_cost = dp[i - 1][j].cost + weights.del;
            if (del_cost < best.cost) {
                best = dp[i - 1][j];
                best.cost = del_cost;
                ++best.d;
            }
            const double ins_cost = dp[i][j - 1].cost + weights.ins;
            if (ins_cost < best.cost) {
                best = dp[i][j - 1];
                best.cost = ins_cost;
                ++best.i;
            }
            dp[i][j] = best;
        }
    }

    const Cell& final = dp[n][m];
    WerBreakdown b;
    b.substitutions = final.s;
    b.deletions = final.d;
    b.insertions = final.i;
    b.ref_len = n;
    b.weights = weights;
    b.wer = (weights.ins * static_cast<double>(final.i) + weights.del * static_cast<double>(final.d) +
             weights.sub * static_cast<double>(final.s)) /
            static_cast<double>(n);
    return b;
}

nlohmann::json WerBreakdown::to_json() const {
    return {{"wer", wer},
            {"substitutions", substitutions},
            {"deletions", deletions},
            {"insertions", insertions},
            {"ref_len", ref_len},
            {"weights", {{"ins", weights.ins}, {"del", weights.del}, {"sub", weights.sub}}}};
}

nlohmann::json MetricsReport::to_json() const {
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    return {{"info_loss", opt(info_loss)},
            {"consistency", opt(consistency)},
            {"collision_degree", opt(collision_degree)},
            {"error_rate", opt(error_rate)},
            {"avg_correlation", opt(avg_correlation)},
            {"alpha", alpha},
            {"counts",
             {{"unique_tokens", counts.unique_tokens},
              {"unique_hashes", counts.unique_hashes},
              {"colliding_hashes", counts.colliding_hashes}}}};
}

EvaluateOutcome evaluate_corpus(std::string_view original_text, std::string_view anonymized_text,
                                const std::vector<DocOccurrences>& per_doc, double alpha) {
    EvaluateOutcome out;
    out.report.alpha = alpha;
    out.report.info_loss = information_loss(original_text, anonymized_text);

    std::vector<Occurrence> all;
    for (const auto& d : per_doc)
        all.insert(all.end(), d.occurrences.begin(), d.occurrences.end());

    if (all.empty()) {
        out.warnings.push_back("consistency undefined: no recognized occurrences");
        out.warnings.push_back("collision_degree undefined: no recognized occurrences");
        out.warnings.push_back("error_rate undefined: components undefined");
        out.warnings.push_back("avg_correlation undefined: no shared tokens");
        return out;
    }

    out.report.counts = [&] {
        const CollisionCounts c = collision_counts(all);
        return MetricsCounts{c.unique_tokens, c.unique_hashes, c.colliding_hashes};
    }();
    out.report.consistency = consistency(all);
    out.report.collision_degree = collision_degree(all);
    out.report.error_rate = error_rate(*out.report.consistency, *out.report.collision_degree, alpha);

    // First-half documents vs second-half documents, first placeholder wins
    // per token within a half.
    auto half_map = [&](std::size_t lo, std::size_t hi) {
        std::map<std::string, std::string> m;
        for (std::size_t i = lo; i < hi; ++i)
            for (const auto& occ : per_doc[i].occurrences) m.emplace(occ.token, occ.placeholder);
        return m;
    };
    const std::size_t mid = per_doc.size() / 2;
    const auto map_a = half_map(0, mid);
    const auto map_b = half_map(mid, per_doc.size());
    try {
        out.report.avg_correlation = avg_correlation(map_a, map_b).value;
    } catch (const UndefinedMetricError& e) {
        out.warnings.push_back(std::string("avg_correlation undefined: ") + e.what());
    }
    return out;
}

std::vector<std::string> check_report_schema(const nlohmann::json& j) {
    std::vector<std::string> problems;
    auto need_number_or_null = [&](const char* key) {
        if (!j.contains(key)) {
            problems.push_back(std::string("missing field: ") + key);
        } else if (!j.at(key).is_number() && !j.at(key).is_null()) {
            problems.push_back(std::string("field not number/null: ") + key);
        }
    };
    for (const char* key :
         {"info_loss", "consistency", "collision_degree", "error_rate", "avg_correlation"})
        need_number_or_null(key);
    if (!j.contains("alpha") || !j.at("alpha").is_number()) problems.push_back("bad alpha");
    if (!j.contains("counts") || !j.at("counts").is_object()) {
        problems.push_back("missing counts");
    } else {
        for (const char* key : {"unique_tokens", "unique_hashes", "colliding_hashes"})
            if (!j.at("counts").contains(key) || !j.at("counts").at(key).is_number_unsigned())
                problems.push_back(std::string("bad counts.") + key);
    }
    for (const auto& [key, value] : j.items()) {
        static const std::set<std::string> allowed = {
            "info_loss", "consistency", "collision_degree", "error_rate",
            "avg_correlation", "alpha", "counts"};
        if (!allowed.count(key)) problems.push_back("unexpected field: " + key);
    }
    return problems;
}

} // namespace veilkit
