#include <cmath>
#include <vector>

#include "doctest.h"

#include "helpers.hpp"
#include "picl/common.hpp"
#include "picl/entropy.hpp"

using namespace picl;
using picl_test::tiny;

TEST_CASE("uniform distribution has normalized entropy 1") {
    for (std::size_t n : {2, 3, 10, 50000}) {
        std::vector<double> probs(n, 1.0 / static_cast<double>(n));
        CHECK(std::fabs(normalized_entropy(probs) - 1.0) <= 1e-9);
    }
}

TEST_CASE("one-hot distribution has entropy exactly 0") {
    std::vector<double> probs = {0.0, 1.0, 0.0, 0.0};
    CHECK(normalized_entropy(probs) == 0.0);
}

TEST_CASE("384/128 split reproduces the hand value") {
    std::vector<std::int64_t> counts = {384, 128};
    CHECK(frequency_entropy(counts) == doctest::Approx(0.8113).epsilon(1e-4));
    const std::vector<double> probs = {0.75, 0.25};
    CHECK(normalized_entropy(probs) ==
          doctest::Approx(-(0.75 * std::log(0.75) + 0.25 * std::log(0.25)) / std::log(2.0))
              .epsilon(1e-12));
}

TEST_CASE("entropy rejects malformed distributions") {
    CHECK_THROWS_AS(normalized_entropy(std::vector<double>{1.0}), runtime_failure);
    CHECK_THROWS_AS(normalized_entropy(std::vector<double>{0.5, 0.6}), runtime_failure);
    CHECK_THROWS_AS(normalized_entropy(std::vector<double>{-0.1, 1.1}), runtime_failure);
    CHECK_THROWS_AS(frequency_entropy(std::vector<std::int64_t>{5}), runtime_failure);
    CHECK(frequency_entropy(std::vector<std::int64_t>{0, 7}) == 0.0);
}

TEST_CASE("token entropy lies in [0, 1] and responds to the input") {
    const double h_space = token_entropy(tiny().model, tiny().vocab, " ");
    const double h_label = token_entropy(tiny().model, tiny().vocab, "Label: ");
    CHECK(h_space >= 0.0);
    CHECK(h_space <= 1.0);
    CHECK(h_label >= 0.0);
    CHECK(h_label <= 1.0);
    CHECK(h_space != h_label);
    CHECK(token_entropy(tiny().model, tiny().vocab, " ") == h_space);
}

TEST_CASE("label entropy is deterministic and bounded") {
    const task_dataset split =
        split_dataset(picl_test::demo_sentiment()).validation;
    const double h = label_entropy(tiny().model, tiny().vocab, split, 2, 16, 77);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0);
    CHECK(label_entropy(tiny().model, tiny().vocab, split, 2, 16, 77) == h);

    const double h_mean = label_entropy(tiny().model, tiny().vocab, split, 2, 16, 77,
                                        label_tally::mean_probs);
    CHECK(h_mean >= 0.0);
    CHECK(h_mean <= 1.0);
    // Mean-probability tallies smooth the distribution, so they cannot hit 0.
    CHECK(h_mean > 0.0);
}

TEST_CASE("datasets with a neutral label are refused by name") {
    const task_dataset aspect = load_dataset(
        dataset_config::from_toml_file(picl_test::demo_data_dir() / "demo_aspect.toml"));
    CHECK_THROWS_WITH_AS(
        label_entropy(tiny().model, tiny().vocab, aspect, 2, 4, 1),
        doctest::Contains("demo_aspect"), config_error);
}

TEST_CASE("label entropy validates its arguments") {
    const task_dataset split = split_dataset(picl_test::demo_sentiment()).validation;
    CHECK_THROWS_AS(label_entropy(tiny().model, tiny().vocab, split, 2, 0, 1), config_error);
    CHECK_THROWS_AS(label_entropy(tiny().model, tiny().vocab, split, 0, 4, 1), config_error);
}
