#include <string>
#include <vector>

#include "doctest.h"

#include "helpers.hpp"
#include "picl/bpe.hpp"
#include "picl/common.hpp"
#include "picl/rng.hpp"
#include "picl/unicode.hpp"

using namespace picl;

namespace {

const bpe_vocab& vocab() { return picl_test::tiny().vocab; }

std::vector<std::string> views_to_strings(const std::vector<std::string_view>& views) {
    return {views.begin(), views.end()};
}

// Random valid UTF-8: mixed ASCII, Latin-1 letters, CJK, emoji, whitespace.
std::string random_utf8(rng_stream& rng) {
    static const std::vector<char32_t> pool = [] {
        std::vector<char32_t> cps;
        for (char32_t c = 0x20; c < 0x7F; ++c) cps.push_back(c);
        for (char32_t c = 0xC0; c < 0x100; ++c) cps.push_back(c);
        for (char32_t c = 0x4E00; c < 0x4E40; ++c) cps.push_back(c);
        for (char32_t c = 0x1F600; c < 0x1F610; ++c) cps.push_back(c);
        cps.push_back(U'\t');
        cps.push_back(U'\n');
        return cps;
    }();
    const std::size_t len = 1 + rng.next_below(40);
    std::string s;
    for (std::size_t i = 0; i < len; ++i)
        s += encode_utf8(static_cast<uint32_t>(pool[rng.next_below(pool.size())]));
    return s;
}

}  // namespace

TEST_CASE("pre-tokenization follows the published split behaviour") {
    auto split = [](std::string_view s) { return views_to_strings(split_pieces(s)); };
    using v = std::vector<std::string>;
    CHECK(split("Hello world") == v{"Hello", " world"});
    CHECK(split("I'm here, you're not") == v{"I", "'m", " here", ",", " you", "'re", " not"});
    CHECK(split("abc123 456") == v{"abc", "123", " 456"});
    CHECK(split("a  b") == v{"a", " ", " b"});
    CHECK(split("a   b") == v{"a", "  ", " b"});
    CHECK(split("a ") == v{"a", " "});
    CHECK(split("a\t\tb") == v{"a", "\t", "\t", "b"});
    CHECK(split(" !") == v{" !"});
    CHECK(split("don't STOP") == v{"don", "'t", " STOP"});
    CHECK(split("x!?y") == v{"x", "!?", "y"});
    CHECK(split("") == v{});
    CHECK(split("Label: ") == v{"Label", ":", " "});
}

TEST_CASE("pieces concatenate back to the input") {
    rng_stream rng(17);
    for (int i = 0; i < 200; ++i) {
        const std::string s = random_utf8(rng);
        std::string joined;
        for (std::string_view piece : split_pieces(s)) joined += piece;
        CHECK(joined == s);
    }
}

TEST_CASE("encode/decode round-trips 1000 random UTF-8 strings") {
    rng_stream rng(42);
    for (int i = 0; i < 1000; ++i) {
        const std::string s = random_utf8(rng);
        const std::vector<token_id> ids = encode(vocab(), s);
        CHECK(decode(vocab(), ids) == s);
    }
}

TEST_CASE("encode/decode round-trips arbitrary byte strings") {
    rng_stream rng(43);
    for (int i = 0; i < 200; ++i) {
        const std::size_t len = 1 + rng.next_below(24);
        std::string s;
        for (std::size_t j = 0; j < len; ++j)
            s.push_back(static_cast<char>(rng.next_below(256)));
        const std::vector<token_id> ids = encode(vocab(), s);
        CHECK(decode(vocab(), ids) == s);
    }
}

TEST_CASE("token ids match the published tokenizer on the golden corpus") {
    const nlohmann::json goldens =
        picl_test::load_json(picl_test::fixture_dir() / "goldens" / "tokenizer_goldens.json");
    REQUIRE(goldens.size() == 50);
    for (const auto& c : goldens) {
        const std::string text = c.at("text").get<std::string>();
        const std::vector<token_id> want = c.at("ids").get<std::vector<token_id>>();
        const std::vector<token_id> got = encode(vocab(), text);
        INFO("text: ", text);
        CHECK(got == want);
        CHECK(decode(vocab(), got) == text);
    }
}

TEST_CASE("vocabulary invariants hold for the fixture") {
    CHECK_NOTHROW(vocab().validate());
    CHECK(vocab().size() == static_cast<std::size_t>(picl_test::tiny().cfg.vocab_size));
    CHECK(vocab().id_of("<|endoftext|>") >= 0);
    CHECK(vocab().id_of("definitely-not-a-token") == -1);
    CHECK_THROWS_AS(vocab().token(static_cast<token_id>(vocab().size())), data_error);
}

TEST_CASE("empty input encodes to no tokens") {
    CHECK(encode(vocab(), "").empty());
    CHECK(decode(vocab(), std::vector<token_id>{}).empty());
}
