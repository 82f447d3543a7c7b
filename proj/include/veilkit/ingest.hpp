#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace veilkit {

// ---------------------------------------------------------------------------
// Dork construction and t.me link grammar

// Exactly two queries per term: one per Telegram link form.
//   site:t.me/s "<term>"   (public resources)
//   site:t.me/+ "<term>"   (private invite links)
std::vector<std::string> build_dorks(std::string_view term);

struct TelegramLink {
    enum class Kind { public_channel, private_invite };
    Kind kind;
    std::string value;  // channel identifier, or invite hash
    std::string raw;    // URL as given

    std::string render() const;  // canonical https://t.me/... form
};

// Normalizes scheme/host variants (http/https, optional www.) then matches
// the t.me/s/<identifier> and t.me/+<hash> path grammars. Anything else
// raises DataError.
TelegramLink classify_link(std::string_view url);

// ---------------------------------------------------------------------------
// Public preview page extraction

enum class MediaKind { none, photo, audio, other };
std::string media_kind_to_string(MediaKind m);

struct TelegramMessage {
    std::string resource;    // channel identifier
    std::string message_id;  // unique within a resource
    std::optional<std::string> author;
    std::optional<std::string> timestamp;  // ISO-8601 as published
    std::string text;                      // whitespace-normalized
    MediaKind media_kind = MediaKind::none;

    nlohmann::json to_json() const;
    static TelegramMessage from_json(const nlohmann::json& j);
};

// Telegram's markup changes; the class markers are configuration.
struct ExtractOptions {
    std::string message_marker = "tgme_widget_message";
    std::string text_marker = "tgme_widget_message_text";
    std::string author_marker = "tgme_widget_message_owner_name";
    std::string photo_marker = "tgme_widget_message_photo";
    std::string audio_marker = "tgme_widget_message_voice";
};

struct ExtractResult {
    std::vector<TelegramMessage> messages;
    std::vector<std::string> diagnostics;
};

// Best-effort tolerant scan over a t.me/s preview page; never throws on
// malformed markup. A well-formed page with zero message blocks yields an
// empty list plus a diagnostic.
ExtractResult extract_messages(std::string_view html, const ExtractOptions& options = {});

// ---------------------------------------------------------------------------
// Pacing

struct PacingPolicy {
    double min_delay = 30.0;  // seconds
    double max_delay = 60.0;
    std::uint64_t seed = 0;
};

// n delays drawn uniformly from [min, max]; deterministic under the seed.
std::vector<double> paced_schedule(std::size_t n, const PacingPolicy& policy);

// ---------------------------------------------------------------------------
// Fetchers: the fixture-backed fake is the only bundled implementation; live
// collection is deliberately not shipped.

class MessageFetcher {
public:
    virtual ~MessageFetcher() = default;
    virtual std::string fetch_preview(const TelegramLink& link) = 0;  // HTML
};

// Serves <dir>/<identifier>.html for public links.
class FixtureFetcher final : public MessageFetcher {
public:
    explicit FixtureFetcher(std::string dir);
    std::string fetch_preview(const TelegramLink& link) override;

private:
    std::string dir_;
};

// "fixture" needs fixture_dir; "live" is refused with an explanation.
std::unique_ptr<MessageFetcher> make_fetcher(const std::string& kind,
                                             const std::string& fixture_dir);

// ---------------------------------------------------------------------------
// Append-only JSONL persistence with (resource, message_id) dedup.

class MessageStore {
public:
    explicit MessageStore(std::string path);  // loads existing index
    // Returns true when the message was new and appended.
    bool append(const TelegramMessage& msg);
    std::size_t size() const { return keys_.size(); }

private:
    std::string path_;
    std::map<std::pair<std::string, std::string>, bool> keys_;
};

} // namespace veilkit
