#include "veilkit/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "veilkit/errors.hpp"
#include "veilkit/rng.hpp"

namespace veilkit {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

std::vector<std::string> build_dorks(std::string_view term) {
    const std::string t = trim(term);
    if (t.empty()) throw DataError("build_dorks: empty search term");
    return {"site:t.me/s \"" + t + "\"", "site:t.me/+ \"" + t + "\""};
}

std::string TelegramLink::render() const {
    if (kind == Kind::public_channel) return "https://t.me/s/" + value;
    return "https://t.me/+" + value;
}

TelegramLink classify_link(std::string_view url) {
    std::string s = trim(url);
    const std::string original(s);

    auto strip_prefix = [&](std::string_view prefix) {
        if (s.size() >= prefix.size() &&
            std::equal(prefix.begin(), prefix.end(), s.begin(), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) ==
                       std::tolower(static_cast<unsigned char>(b));
            })) {
            s.erase(0, prefix.size());
            return true;
        }
        return false;
    };

    strip_prefix("https://") || strip_prefix("http://");
    strip_prefix("www.");
    if (!strip_prefix("t.me"))
        throw DataError("not a Telegram resource: " + original);

    // drop query string / fragment
    const auto cut = s.find_first_of("?#");
    if (cut != std::string::npos) s.erase(cut);
    if (!s.empty() && s.back() == '/') s.pop_back();

    auto valid_token = [](std::string_view v) {
        if (v.empty()) return false;
        return std::all_of(v.begin(), v.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
        });
    };

    if (s.rfind("/s/", 0) == 0) {
        const std::string ident = s.substr(3);
        if (!valid_token(ident))
            throw DataError("not a Telegram resource: " + original);
        return {TelegramLink::Kind::public_channel, ident, original};
    }
    if (s.rfind("/+", 0) == 0) {
        const std::string hash = s.substr(2);
        if (!valid_token(hash))
            throw DataError("not a Telegram resource: " + original);
        return {TelegramLink::Kind::private_invite, hash, original};
    }
    throw DataError("not a Telegram resource: " + original);
}

// ---------------------------------------------------------------------------
// Tolerant HTML scanning

namespace {

struct Tag {
    std::string name;
    std::map<std::string, std::string> attrs;
    bool closing = false;
    bool self_closing = false;
    std::size_t begin = 0;  // byte range of the tag in the source
    std::size_t end = 0;
};

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Parses the tag starting at '<'; returns nullopt and advances past '<' when
// the markup is malformed.
std::optional<Tag> parse_tag(std::string_view html, std::size_t& pos) {
    Tag tag;
    tag.begin = pos;
    std::size_t i = pos + 1;
    if (i < html.size() && html[i] == '/') {
        tag.closing = true;
        ++i;
    }
    std::size_t name_start = i;
    while (i < html.size() && (std::isalnum(static_cast<unsigned char>(html[i])) || html[i] == '-'))
        ++i;
    if (i == name_start) {
        pos += 1;
        return std::nullopt;
    }
    tag.name = lower_ascii(std::string(html.substr(name_start, i - name_start)));

    while (i < html.size() && html[i] != '>') {
        while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i]))) ++i;
        if (i >= html.size() || html[i] == '>' || html[i] == '/') {
            if (i < html.size() && html[i] == '/') {
                tag.self_closing = true;
                ++i;
            }
            continue;
        }
        std::size_t key_start = i;
        while (i < html.size() && html[i] != '=' && html[i] != '>' &&
               !std::isspace(static_cast<unsigned char>(html[i])))
            ++i;
        const std::string key = lower_ascii(std::string(html.substr(key_start, i - key_start)));
        std::string value;
        if (i < html.size() && html[i] == '=') {
            ++i;
            if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
                const char quote = html[i++];
                const std::size_t v0 = i;
                while (i < html.size() && html[i] != quote) ++i;
                value = std::string(html.substr(v0, i - v0));
                if (i < html.size()) ++i;
            } else {
                const std::size_t v0 = i;
                while (i < html.size() && html[i] != '>' &&
                       !std::isspace(static_cast<unsigned char>(html[i])))
                    ++i;
                value = std::string(html.substr(v0, i - v0));
            }
        }
        if (!key.empty()) tag.attrs[key] = value;
    }
    if (i >= html.size()) {  // unterminated tag: consume the rest
        pos = html.size();
        tag.end = html.size();
        return tag;
    }
    tag.end = i + 1;
    pos = tag.end;
    return tag;
}

bool has_class_token(const Tag& tag, std::string_view token) {
    const auto it = tag.attrs.find("class");
    if (it == tag.attrs.end()) return false;
    std::istringstream classes(it->second);
    std::string c;
    while (classes >> c)
        if (c == token) return true;
    return false;
}

void decode_entities(std::string& s) {
    static const std::pair<const char*, const char*> table[] = {
        {"&amp;", "&"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""},
        {"&#39;", "'"}, {"&apos;", "'"}, {"&nbsp;", " "}};
    for (const auto& [from, to] : table) {
        std::size_t pos = 0;
        while ((pos = s.find(from, pos)) != std::string::npos) {
            s.replace(pos, std::string_view(from).size(), to);
            pos += std::string_view(to).size();
        }
    }
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    bool in_space = true;  // also trims leading whitespace
    for (const char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

// Strips tags from an HTML fragment; <br> becomes a space.
std::string inner_text(std::string_view fragment) {
    std::string out;
    std::size_t i = 0;
    while (i < fragment.size()) {
        if (fragment[i] == '<') {
            const std::size_t save = i;
            auto tag = parse_tag(fragment, i);
            if (tag && tag->name == "br") out.push_back(' ');
            if (!tag) i = save + 1;
            continue;
        }
        out.push_back(fragment[i]);
        ++i;
    }
    decode_entities(out);
    return collapse_whitespace(out);
}

// Finds the matching close for the element whose open tag ends at `from`,
// tracking nesting depth of the same tag name. Returns the byte range of the
// inner HTML; best effort: an unclosed element runs to the end of input.
std::pair<std::size_t, std::size_t> element_body(std::string_view html, const Tag& open,
                                                 std::size_t from) {
    std::size_t depth = 1;
    std::size_t i = from;
    while (i < html.size()) {
        if (html[i] != '<') {
            ++i;
            continue;
        }
        auto tag = parse_tag(html, i);
        if (!tag) continue;
        if (tag->name != open.name || tag->self_closing) continue;
        if (tag->closing) {
            if (--depth == 0) return {from, tag->begin};
        } else {
            ++depth;
        }
    }
    return {from, html.size()};
}

} // namespace

std::string media_kind_to_string(MediaKind m) {
    switch (m) {
        case MediaKind::none: return "none";
        case MediaKind::photo: return "photo";
        case MediaKind::audio: return "audio";
        case MediaKind::other: return "other";
    }
    return "none";
}

ExtractResult extract_messages(std::string_view html, const ExtractOptions& options) {
    ExtractResult result;
    std::size_t i = 0;
    while (i < html.size()) {
        if (html[i] != '<') {
            ++i;
            continue;
        }
        auto tag = parse_tag(html, i);
        if (!tag || tag->closing || tag->self_closing) continue;
        if (!has_class_token(*tag, options.message_marker)) continue;
        // Skip composite markers like tgme_widget_message_text that also
        // start with the message marker: require the exact class token.

        const auto [body_begin, body_end] = element_body(html, *tag, i);
        const std::string_view body = html.substr(body_begin, body_end - body_begin);

        TelegramMessage msg;
        const auto post = tag->attrs.find("data-post");
        if (post != tag->attrs.end()) {
            const auto slash = post->second.find('/');
            if (slash != std::string::npos) {
                msg.resource = post->second.substr(0, slash);
                msg.message_id = post->second.substr(slash + 1);
            } else {
                msg.message_id = post->second;
            }
        } else {
            result.diagnostics.push_back("message block without data-post attribute");
        }

        // Scan the body once for the text/author/time/media sub-elements.
        std::size_t j = 0;
        while (j < body.size()) {
            if (body[j] != '<') {
                ++j;
                continue;
            }
            auto sub = parse_tag(body, j);
            if (!sub || sub->closing) continue;
            if (has_class_token(*sub, options.text_marker) && msg.text.empty()) {
                const auto [b0, b1] = element_body(body, *sub, j);
                msg.text = inner_text(body.substr(b0, b1 - b0));
            } else if (has_class_token(*sub, options.author_marker) && !msg.author) {
                const auto [b0, b1] = element_body(body, *sub, j);
                msg.author = inner_text(body.substr(b0, b1 - b0));
            } else if (sub->name == "time" && !msg.timestamp) {
                const auto dt = sub->attrs.find("datetime");
                if (dt != sub->attrs.end()) msg.timestamp = dt->second;
            } else if (has_class_token(*sub, options.photo_marker)) {
                if (msg.media_kind == MediaKind::none) msg.media_kind = MediaKind::photo;
            } else if (has_class_token(*sub, options.audio_marker)) {
                if (msg.media_kind == MediaKind::none) msg.media_kind = MediaKind::audio;
            } else {
                const auto cls = sub->attrs.find("class");
                if (cls != sub->attrs.end() &&
                    cls->second.find(options.message_marker + "_") == 0 &&
                    (cls->second.find("_video") != std::string::npos ||
                     cls->second.find("_document") != std::string::npos ||
                     cls->second.find("_sticker") != std::string::npos)) {
                    if (msg.media_kind == MediaKind::none) msg.media_kind = MediaKind::other;
                }
            }
        }
        result.messages.push_back(std::move(msg));
        i = body_end;
    }
    if (result.messages.empty())
        result.diagnostics.push_back("no message blocks matched class marker \"" +
                                     options.message_marker + "\"");
    return result;
}

nlohmann::json TelegramMessage::to_json() const {
    return {{"resource", resource},
            {"message_id", message_id},
            {"author", author ? nlohmann::json(*author) : nlohmann::json(nullptr)},
            {"timestamp", timestamp ? nlohmann::json(*timestamp) : nlohmann::json(nullptr)},
            {"text", text},
            {"media_kind", media_kind_to_string(media_kind)}};
}

TelegramMessage TelegramMessage::from_json(const nlohmann::json& j) {
    TelegramMessage m;
    m.resource = j.at("resource").get<std::string>();
    m.message_id = j.at("message_id").get<std::string>();
    if (j.contains("author") && !j.at("author").is_null())
        m.author = j.at("author").get<std::string>();
    if (j.contains("timestamp") && !j.at("timestamp").is_null())
        m.timestamp = j.at("timestamp").get<std::string>();
    m.text = j.at("text").get<std::string>();
    const std::string kind = j.value("media_kind", "none");
    if (kind == "photo") m.media_kind = MediaKind::photo;
    else if (kind == "audio") m.media_kind = MediaKind::audio;
    else if (kind == "other") m.media_kind = MediaKind::other;
    return m;
}

std::vector<double> paced_schedule(std::size_t n, const PacingPolicy& policy) {
    if (policy.min_delay < 0.0 || policy.min_delay > policy.max_delay)
        throw ConfigError("pacing policy: need 0 <= min <= max");
    Rng rng(policy.seed);
    std::vector<double> delays;
    delays.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        delays.push_back(rng.uniform(policy.min_delay, policy.max_delay));
    return delays;
}

FixtureFetcher::FixtureFetcher(std::string dir) : dir_(std::move(dir)) {}

std::string FixtureFetcher::fetch_preview(const TelegramLink& link) {
    if (link.kind != TelegramLink::Kind::public_channel)
        throw DataError("fixture fetcher serves public previews only; private invites need the "
                        "authenticated API flow, which is not bundled");
    const std::string path = dir_ + "/" + link.value + ".html";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("fixture fetcher: no fixture at " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::unique_ptr<MessageFetcher> make_fetcher(const std::string& kind,
                                             const std::string& fixture_dir) {
    if (kind == "fixture") return std::make_unique<FixtureFetcher>(fixture_dir);
    if (kind == "live")
        throw ConfigError("live fetching is not bundled: collection against real services has "
                          "terms-of-service and legal constraints; use the fixture fetcher");
    throw ConfigError("unknown fetcher \"" + kind + "\" (expected \"fixture\" or \"live\")");
}

MessageStore::MessageStore(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // fresh store
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const TelegramMessage m = TelegramMessage::from_json(nlohmann::json::parse(line));
            keys_[{m.resource, m.message_id}] = true;
        } catch (const nlohmann::json::exception&) {
            // tolerate trailing partial writes
        }
    }
}

bool MessageStore::append(const TelegramMessage& msg) {
    const auto key = std::make_pair(msg.resource, msg.message_id);
    if (keys_.count(key)) return false;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw DataError("message store: cannot open " + path_);
    out << msg.to_json().dump() << "\n";
    keys_[key] = true;
    return true;
}

} // namespace veilkit
