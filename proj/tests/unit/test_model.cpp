#include <cmath>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "helpers.hpp"
#include "picl/common.hpp"
#include "picl/model.hpp"
#include "picl/safetensors.hpp"

using namespace picl;
using picl_test::tiny;
namespace fs = std::filesystem;

TEST_CASE("forward logits match the reference goldens within 1e-3") {
    const nlohmann::json goldens =
        picl_test::load_json(picl_test::fixture_dir() / "goldens" / "forward_goldens.json");
    REQUIRE(goldens.size() == 5);
    for (const auto& c : goldens) {
        const std::string text = c.at("text").get<std::string>();
        const std::vector<float> want = c.at("logits").get<std::vector<float>>();
        const std::vector<token_id> ids = encode(tiny().vocab, text);
        REQUIRE(ids == c.at("ids").get<std::vector<token_id>>());
        const std::vector<float> got = tiny().model.forward(ids);
        REQUIRE(got.size() == want.size());
        double max_dev = 0.0;
        for (std::size_t i = 0; i < got.size(); ++i)
            max_dev = std::max(max_dev, std::fabs(static_cast<double>(got[i]) - want[i]));
        INFO("text: ", text, " max deviation ", max_dev);
        CHECK(max_dev < 1e-3);
    }
}

TEST_CASE("forward is deterministic") {
    const std::vector<token_id> ids = encode(tiny().vocab, "Label: positive");
    const std::vector<float> a = tiny().model.forward(ids);
    const std::vector<float> b = tiny().model.forward(ids);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

TEST_CASE("forward_at at the last position equals forward") {
    const std::vector<token_id> ids = encode(tiny().vocab, "good movie, very good");
    const std::vector<std::int64_t> last = {static_cast<std::int64_t>(ids.size()) - 1};
    const auto rows = tiny().model.forward_at(ids, last);
    REQUIRE(rows.size() == 1);
    const auto full = tiny().model.forward(ids);
    CHECK(std::memcmp(rows[0].data(), full.data(), full.size() * sizeof(float)) == 0);
}

TEST_CASE("causality: logits at position p ignore later tokens") {
    const std::vector<token_id> ids = encode(tiny().vocab, "Input: bad film, Label: negative");
    REQUIRE(ids.size() >= 4);
    const std::int64_t p = static_cast<std::int64_t>(ids.size()) - 3;
    const auto at_p = tiny().model.forward_at(ids, std::vector<std::int64_t>{p});
    const std::vector<token_id> prefix(ids.begin(), ids.begin() + p + 1);
    const auto truncated = tiny().model.forward(prefix);
    CHECK(std::memcmp(at_p[0].data(), truncated.data(),
                      truncated.size() * sizeof(float)) == 0);
}

TEST_CASE("forward_at validates its positions") {
    const std::vector<token_id> ids = encode(tiny().vocab, "hello");
    CHECK_THROWS_AS(
        tiny().model.forward_at(ids, std::vector<std::int64_t>{static_cast<std::int64_t>(ids.size())}),
        runtime_failure);
    CHECK_THROWS_AS(tiny().model.forward_at(ids, std::vector<std::int64_t>{-1}),
                    runtime_failure);
    if (ids.size() >= 2)
        CHECK_THROWS_AS(tiny().model.forward_at(ids, std::vector<std::int64_t>{1, 0}),
                        runtime_failure);
}

TEST_CASE("sequence_logprob sums per-token log-softmax entries") {
    const std::vector<token_id> prefix = encode(tiny().vocab, "Input: good movie, Label:");
    const std::vector<token_id> cont = encode(tiny().vocab, " positive");
    REQUIRE(!cont.empty());

    std::vector<token_id> all = prefix;
    all.insert(all.end(), cont.begin(), cont.end());
    const auto p = static_cast<std::int64_t>(prefix.size());
    std::vector<std::int64_t> positions;
    for (std::size_t i = 0; i < cont.size(); ++i)
        positions.push_back(p - 1 + static_cast<std::int64_t>(i));
    const auto rows = tiny().model.forward_at(all, positions);

    double want = 0.0;
    for (std::size_t i = 0; i < cont.size(); ++i) {
        const std::vector<double> lsm = log_softmax(rows[i]);
        want += lsm[static_cast<std::size_t>(cont[i])];
    }
    CHECK(tiny().model.sequence_logprob(prefix, cont) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("context overflow raises with both sizes") {
    std::vector<token_id> ids(static_cast<std::size_t>(tiny().cfg.max_context) + 1, 0);
    CHECK_THROWS_AS(tiny().model.forward(ids), context_overflow);
    try {
        tiny().model.forward(ids);
        FAIL("expected overflow");
    } catch (const context_overflow& e) {
        CHECK(e.required == ids.size());
        CHECK(e.available == static_cast<std::size_t>(tiny().cfg.max_context));
    }
}

TEST_CASE("log_softmax is shift invariant and normalized") {
    const std::vector<float> logits = {1.0f, -2.0f, 0.5f, 3.25f};
    const std::vector<double> lsm = log_softmax(logits);
    double total = 0.0;
    for (double v : lsm) total += std::exp(v);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<float> shifted = logits;
    for (float& v : shifted) v += 100.0f;
    const std::vector<double> lsm2 = log_softmax(shifted);
    for (std::size_t i = 0; i < lsm.size(); ++i)
        CHECK(lsm[i] == doctest::Approx(lsm2[i]).epsilon(1e-9));
}

TEST_CASE("weight loading canonicalizes names and rejects strangers") {
    const auto dir = picl_test::tiny_model_dir();
    const model_config cfg = model_config::from_json_file(dir / "config.json");

    tensor_map renamed;
    for (const auto& [name, t] : tiny().params) {
        tensor copy;
        copy.shape = t.shape;
        copy.data = t.data;
        renamed.insert("transformer." + name, std::move(copy));
    }
    // Ignorable companions of a published checkpoint.
    renamed.insert("lm_head.weight", [&] {
        tensor copy;
        copy.shape = tiny().params.at("wte.weight").shape;
        copy.data = tiny().params.at("wte.weight").data;
        return copy;
    }());

    const fs::path path = fs::temp_directory_path() / "picl_prefixed.safetensors";
    write_safetensors(path, renamed);
    const tensor_map loaded = load_weights(path, cfg);
    CHECK(loaded.size() == tiny().params.size());
    CHECK(loaded.contains("wte.weight"));
    CHECK_FALSE(loaded.contains("lm_head.weight"));
    fs::remove(path);
}

TEST_CASE("validate_weights flags missing, unexpected, and mis-shaped tensors") {
    const model_config cfg = tiny().cfg;
    CHECK_NOTHROW(validate_weights(tiny().params, cfg));

    tensor_map extra;
    for (const auto& [name, t] : tiny().params) {
        tensor copy;
        copy.shape = t.shape;
        copy.data = t.data;
        extra.insert(name, std::move(copy));
    }
    extra.insert("h.0.attn.unexpected", tensor({1}));
    CHECK_THROWS_WITH_AS(validate_weights(extra, cfg), doctest::Contains("unexpected"),
                         data_error);

    tensor_map missing;
    missing.insert("wte.weight", [&] {
        tensor copy;
        copy.shape = tiny().params.at("wte.weight").shape;
        copy.data = tiny().params.at("wte.weight").data;
        return copy;
    }());
    CHECK_THROWS_AS(validate_weights(missing, cfg), data_error);

    tensor_map bad_shape;
    for (const auto& [name, t] : tiny().params) {
        tensor copy;
        copy.shape = t.shape;
        copy.data = t.data;
        if (name == "ln_f.bias") {
            copy.shape = {t.shape[0] + 1};
            copy.data.resize(static_cast<std::size_t>(t.shape[0] + 1));
        }
        bad_shape.insert(name, std::move(copy));
    }
    CHECK_THROWS_WITH_AS(validate_weights(bad_shape, cfg), doctest::Contains("ln_f.bias"),
                         data_error);
}

TEST_CASE("model_config validation") {
    model_config cfg = tiny().cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.n_heads = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = tiny().cfg;
    cfg.d_model = cfg.n_heads * 3 + 1;  // not divisible by heads
    CHECK_THROWS_AS(cfg.validate(), config_error);
}
