#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "helpers.hpp"
#include "picl/common.hpp"
#include "picl/harness.hpp"

using namespace picl;
using picl_test::tiny;

namespace {

// Small test split drawn from the demo data: enough records to sample
// demonstrations from, few enough queries to keep forward passes cheap.
task_dataset small_split(std::size_t n = 24) {
    const task_dataset& full = picl_test::demo_sentiment();
    task_dataset out;
    out.name = "small";
    out.category = full.category;
    out.label_space = full.label_space;
    out.records.assign(full.records.begin(),
                       full.records.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

experiment_spec fast_spec() {
    experiment_spec spec;
    spec.k = 2;
    spec.tries_per_query = 2;
    spec.n_repeats = 2;
    spec.query_limit = 4;
    spec.master_seed = 5;
    spec.noise.master_seed = 5;
    return spec;
}

bool records_equal(const std::vector<prediction_record>& a,
                   const std::vector<prediction_record>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].predicted != b[i].predicted || a[i].gold != b[i].gold ||
            a[i].confidence != b[i].confidence || a[i].probs != b[i].probs)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("seed tree separates demo draws by (k, query, try) and ignores repeats") {
    CHECK(demo_stream_seed(1, 4, 0, 0) != demo_stream_seed(1, 4, 0, 1));
    CHECK(demo_stream_seed(1, 4, 0, 0) != demo_stream_seed(1, 4, 1, 0));
    CHECK(demo_stream_seed(1, 4, 0, 0) != demo_stream_seed(1, 2, 0, 0));
    CHECK(demo_stream_seed(1, 4, 0, 0) != demo_stream_seed(2, 4, 0, 0));
    CHECK(demo_stream_seed(1, 4, 0, 0) == demo_stream_seed(1, 4, 0, 0));
    CHECK(repeat_noise_seed(1, 0) != repeat_noise_seed(1, 1));
    CHECK(repeat_noise_seed(1, 0) != demo_stream_seed(1, 0, 0, 0));
}

TEST_CASE("unperturbed runs repeat identically with zero spread") {
    const task_dataset split = small_split();
    experiment_spec spec = fast_spec();
    spec.noise.lambda = 0.0;
    spec.n_repeats = 3;
    const run_result result = run_experiment(tiny().params, tiny().cfg, tiny().vocab, split, spec);

    REQUIRE(result.records.size() == 3);
    CHECK(records_equal(result.records[0], result.records[1]));
    CHECK(records_equal(result.records[0], result.records[2]));
    CHECK(result.stddev.accuracy == 0.0);
    CHECK(result.stddev.macro_f1 == 0.0);
    CHECK(result.stddev.ece1 == 0.0);
    CHECK(result.mean.accuracy == result.per_repeat[0].accuracy);
    CHECK(result.queries_evaluated == 4);
    CHECK(result.records[0].size() == 4 * 2);
    CHECK(result.skipped_queries.empty());
}

TEST_CASE("the whole run equals the concatenation of repeat windows") {
    const task_dataset split = small_split();
    experiment_spec spec = fast_spec();
    spec.noise.lambda = 0.3;
    spec.n_repeats = 4;
    spec.query_limit = 2;
    const run_result whole = run_experiment(tiny().params, tiny().cfg, tiny().vocab, split, spec);

    experiment_spec first = spec;
    first.n_repeats = 2;
    experiment_spec second = spec;
    second.n_repeats = 2;
    second.repeat_offset = 2;
    const run_result a = run_experiment(tiny().params, tiny().cfg, tiny().vocab, split, first);
    const run_result b = run_experiment(tiny().params, tiny().cfg, tiny().vocab, split, second);

    REQUIRE(whole.records.size() == 4);
    CHECK(records_equal(whole.records[0], a.records[0]));
    CHECK(records_equal(whole.records[1], a.records[1]));
    CHECK(records_equal(whole.records[2], b.records[0]));
    CHECK(records_equal(whole.records[3], b.records[1]));
}

TEST_CASE("noise varies across repeats but demo draws do not") {
    const task_dataset split = small_split();
    experiment_spec spec = fast_spec();
    spec.noise.lambda = 0.4;
    spec.n_repeats = 2;
    spec.query_limit = 2;
    const run_result result = run_experiment(tiny().params, tiny().cfg, tiny().vocab, split, spec);
    // Gold labels line up one-to-one across repeats: same queries, same
    // tries, same order.
    REQUIRE(result.records[0].size() == result.records[1].size());
    for (std::size_t i = 0; i < result.records[0].size(); ++i)
        CHECK(result.records[0][i].gold == result.records[1][i].gold);
    // The perturbations differ, so at least one probability must move.
    bool any_diff = false;
    for (std::size_t i = 0; i < result.records[0].size(); ++i)
        any_diff = any_diff || result.records[0][i].probs != result.records[1][i].probs;
    CHECK(any_diff);
}

TEST_CASE("oversized queries are skipped wholesale and reported") {
    task_dataset split = small_split(20);
    std::string huge;
    for (int i = 0; i < 1200; ++i) huge += "very ";
    split.records[2].text = huge;  // overflows as a query and as a demo

    experiment_spec spec = fast_spec();
    spec.k = 1;
    spec.query_limit = -1;
    spec.n_repeats = 1;
    // Demos draw from the split too, so the huge record can poison other
    // queries' tries; every poisoned query must vanish entirely.
    const run_result result =
        run_experiment(tiny().params, tiny().cfg, tiny().vocab, split, spec);

    CHECK(!result.skipped_queries.empty());
    bool skipped_the_huge_one = false;
    for (std::int64_t q : result.skipped_queries) skipped_the_huge_one |= q == 2;
    CHECK(skipped_the_huge_one);
    CHECK(result.queries_evaluated ==
          20 - static_cast<std::int64_t>(result.skipped_queries.size()));
    CHECK(result.records[0].size() ==
          static_cast<std::size_t>(result.queries_evaluated * spec.tries_per_query));
    for (const prediction_record& r : result.records[0]) {
        CHECK(r.confidence >= 0.5 - 1e-12);
        CHECK(r.probs.size() == 2);
    }
}

TEST_CASE("a split where every query overflows refuses to run") {
    task_dataset split = small_split(24);
    std::string huge;
    for (int i = 0; i < 1200; ++i) huge += "very ";
    for (task_record& r : split.records) r.text = huge;
    experiment_spec spec = fast_spec();
    spec.k = 0;
    CHECK_THROWS_AS(run_experiment(tiny().params, tiny().cfg, tiny().vocab, split, spec),
                    runtime_failure);
}

TEST_CASE("query_limit truncates and -1 takes everything") {
    const task_dataset split = small_split(10);
    experiment_spec spec = fast_spec();
    spec.query_limit = -1;
    spec.n_repeats = 1;
    const run_result all = run_experiment(tiny().params, tiny().cfg, tiny().vocab, split, spec);
    CHECK(all.queries_evaluated == 10);

    spec.query_limit = 3;
    const run_result three = run_experiment(tiny().params, tiny().cfg, tiny().vocab, split, spec);
    CHECK(three.queries_evaluated == 3);
    // The limit is a prefix: shared queries score identically.
    CHECK(records_equal(
        three.records[0],
        std::vector<prediction_record>(all.records[0].begin(), all.records[0].begin() + 6)));
}

TEST_CASE("mean and population standard deviation aggregate per-repeat metrics") {
    const task_dataset split = small_split();
    experiment_spec spec = fast_spec();
    spec.noise.lambda = 0.5;
    spec.n_repeats = 3;
    spec.query_limit = 3;
    const run_result result = run_experiment(tiny().params, tiny().cfg, tiny().vocab, split, spec);

    double mean = 0.0;
    for (const repeat_metrics& m : result.per_repeat) mean += m.accuracy;
    mean /= 3.0;
    double var = 0.0;
    for (const repeat_metrics& m : result.per_repeat) {
        const double d = m.accuracy - mean;
        var += d * d;
    }
    CHECK(result.mean.accuracy == doctest::Approx(mean).epsilon(1e-12));
    CHECK(result.stddev.accuracy == doctest::Approx(std::sqrt(var / 3.0)).epsilon(1e-12));
}

TEST_CASE("experiment_spec validation") {
    experiment_spec spec;
    CHECK_NOTHROW(spec.validate());
    spec.tries_per_query = 0;
    CHECK_THROWS_AS(spec.validate(), config_error);
    spec = experiment_spec{};
    spec.query_limit = 0;
    CHECK_THROWS_AS(spec.validate(), config_error);
    spec = experiment_spec{};
    spec.n_repeats = 0;
    CHECK_THROWS_AS(spec.validate(), config_error);
    spec = experiment_spec{};
    spec.noise.lambda = 2.0;
    CHECK_THROWS_AS(spec.validate(), config_error);
}
