#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "veilkit/errors.hpp"
#include "veilkit/ingest.hpp"

using namespace veilkit;

#ifndef FIXTURES_DIR
#error "FIXTURES_DIR must be defined by the build"
#endif

namespace {
const std::string fixtures = FIXTURES_DIR;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}
} // namespace

TEST_CASE("dork construction pairs both link forms") {
    const auto carding = build_dorks("Carding");
    REQUIRE(carding.size() == 2);
    CHECK(carding[0] == "site:t.me/s \"Carding\"");
    CHECK(carding[1] == "site:t.me/+ \"Carding\"");

    const auto ransomware = build_dorks("Ransomware");
    CHECK(ransomware[0] == "site:t.me/s \"Ransomware\"");
    CHECK(ransomware[1] == "site:t.me/+ \"Ransomware\"");

    // Multi-word terms stay quoted verbatim.
    CHECK(build_dorks("credit cards")[0] == "site:t.me/s \"credit cards\"");

    CHECK_THROWS_AS(build_dorks("  "), DataError);
    CHECK_THROWS_AS(build_dorks(""), DataError);
}

TEST_CASE("link classification follows the two path grammars") {
    const auto pub = classify_link("https://t.me/s/darkdeals");
    CHECK(pub.kind == TelegramLink::Kind::public_channel);
    CHECK(pub.value == "darkdeals");

    const auto inv = classify_link("https://t.me/+AbC123xyz");
    CHECK(inv.kind == TelegramLink::Kind::private_invite);
    CHECK(inv.value == "AbC123xyz");

    // scheme/host variants normalize
    CHECK(classify_link("http://t.me/s/foo").value == "foo");
    CHECK(classify_link("https://www.t.me/s/foo").value == "foo");
    CHECK(classify_link("t.me/+h-ash_1").value == "h-ash_1");
    CHECK(classify_link("https://t.me/s/chan/").value == "chan");
    CHECK(classify_link("https://t.me/s/chan?before=99").value == "chan");

    // negative cases
    CHECK_THROWS_AS(classify_link("https://example.com/s/x"), DataError);
    CHECK_THROWS_AS(classify_link("https://t.me/justauser"), DataError);
    CHECK_THROWS_AS(classify_link("https://t.me/s/"), DataError);
    CHECK_THROWS_AS(classify_link("https://t.me/+"), DataError);
    CHECK_THROWS_AS(classify_link("ftp://t.me/s/x"), DataError);
}

TEST_CASE("classify after render is the identity on both kinds") {
    for (const auto& link : {TelegramLink{TelegramLink::Kind::public_channel, "some_chan", ""},
                             TelegramLink{TelegramLink::Kind::private_invite, "XyZ-9_q", ""}}) {
        const auto back = classify_link(link.render());
        CHECK(back.kind == link.kind);
        CHECK(back.value == link.value);
    }
}

TEST_CASE("three-message fixture extracts the expected records") {
    const auto result = extract_messages(slurp(fixtures + "/darkdeals.html"));
    REQUIRE(result.messages.size() == 3);

    const auto& m0 = result.messages[0];
    CHECK(m0.resource == "darkdeals");
    CHECK(m0.message_id == "101");
    REQUIRE(m0.author.has_value());
    CHECK(*m0.author == "Dark Deals");
    REQUIRE(m0.timestamp.has_value());
    CHECK(*m0.timestamp == "2025-03-11T09:15:02+00:00");
    CHECK(m0.text == "Fresh fullz available, contact \"seller\" & pay in BTC");
    CHECK(m0.media_kind == MediaKind::none);

    const auto& m1 = result.messages[1];
    CHECK(m1.message_id == "102");
    CHECK(m1.text == "New drop tomorrow. Escrow only \xe2\x80\x94 no direct wires.");
    CHECK_FALSE(m1.timestamp.has_value());

    const auto& m2 = result.messages[2];
    CHECK(m2.message_id == "103");
    CHECK(m2.text == "Prices: cards 20, accounts 45, see pinned");
    CHECK_FALSE(m2.author.has_value());
    REQUIRE(m2.timestamp.has_value());
    CHECK(*m2.timestamp == "2025-03-11T10:02:44+00:00");
}

TEST_CASE("photo message carries its media kind") {
    const auto result = extract_messages(slurp(fixtures + "/photodrop.html"));
    REQUIRE(result.messages.size() == 1);
    CHECK(result.messages[0].media_kind == MediaKind::photo);
    CHECK(result.messages[0].text == "menu attached");
    CHECK(result.messages[0].message_id == "7");
}

TEST_CASE("empty and malformed pages never crash") {
    const auto empty = extract_messages(slurp(fixtures + "/empty_channel.html"));
    CHECK(empty.messages.empty());
    REQUIRE_FALSE(empty.diagnostics.empty());

    CHECK(extract_messages("").messages.empty());
    CHECK(extract_messages("<<<>>>< div <").messages.empty());
    CHECK(extract_messages("<div class=\"tgme_widget_message\" data-post=\"x/1\">unclosed")
              .messages.size() == 1);
    // quotes left open
    const auto weird = extract_messages("<div class=\"tgme_widget_message data-post=");
    CHECK(weird.messages.size() <= 1);
}

TEST_CASE("extraction is deterministic") {
    const std::string html = slurp(fixtures + "/darkdeals.html");
    const auto a = extract_messages(html);
    const auto b = extract_messages(html);
    REQUIRE(a.messages.size() == b.messages.size());
    for (std::size_t i = 0; i < a.messages.size(); ++i) {
        CHECK(a.messages[i].to_json() == b.messages[i].to_json());
    }
}

TEST_CASE("paced schedule honors range, seed, and mean") {
    CHECK(paced_schedule(0, {}).empty());

    const PacingPolicy policy{30.0, 60.0, 424242};
    const auto a = paced_schedule(10000, policy);
    const auto b = paced_schedule(10000, policy);
    CHECK(a == b);

    double sum = 0.0;
    for (const double d : a) {
        CHECK(d >= 30.0);
        CHECK(d <= 60.0);
        sum += d;
    }
    const double mean = sum / static_cast<double>(a.size());
    CHECK(mean == doctest::Approx(45.0).epsilon(0.02));

    CHECK_THROWS_AS(paced_schedule(1, {60.0, 30.0, 0}), ConfigError);
    CHECK_THROWS_AS(paced_schedule(1, {-1.0, 30.0, 0}), ConfigError);
}

TEST_CASE("fixture fetcher serves bundled pages; live is refused") {
    FixtureFetcher fetcher(fixtures);
    const auto link = classify_link("https://t.me/s/darkdeals");
    const std::string html = fetcher.fetch_preview(link);
    CHECK(html.find("tgme_widget_message") != std::string::npos);

    CHECK_THROWS_AS(fetcher.fetch_preview(classify_link("https://t.me/s/never_recorded")),
                    DataError);
    CHECK_THROWS_AS(fetcher.fetch_preview(classify_link("https://t.me/+AbC")), DataError);

    CHECK(make_fetcher("fixture", fixtures) != nullptr);
    CHECK_THROWS_AS(make_fetcher("live", ""), ConfigError);
    CHECK_THROWS_AS(make_fetcher("torrent", ""), ConfigError);
}

TEST_CASE("message store deduplicates on (resource, message_id)") {
    const std::string path = "test_message_store.jsonl";
    std::remove(path.c_str());

    TelegramMessage m;
    m.resource = "darkdeals";
    m.message_id = "101";
    m.text = "hello";
    m.media_kind = MediaKind::none;

    {
        MessageStore store(path);
        CHECK(store.append(m));
        CHECK_FALSE(store.append(m));  // duplicate
        TelegramMessage other = m;
        other.message_id = "102";
        CHECK(store.append(other));
        CHECK(store.size() == 2);
    }
    {
        // Index rebuilt on load; duplicates still rejected.
        MessageStore store(path);
        CHECK(store.size() == 2);
        CHECK_FALSE(store.append(m));
        TelegramMessage third = m;
        third.resource = "other_channel";
        CHECK(store.append(third));  // same id, different resource
    }
    std::ifstream in(path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 3);
    std::remove(path.c_str());
}
