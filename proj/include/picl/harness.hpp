#pragma once

#include <cstdint>
#include <vector>

#include "picl/dataset.hpp"
#include "picl/decoder.hpp"
#include "picl/metrics.hpp"
#include "picl/model.hpp"
#include "picl/perturb.hpp"

namespace picl {

struct experiment_spec {
    std::int64_t k = 4;               // demonstrations per prompt
    std::int64_t tries_per_query = 2; // re-draws of demonstrations per query
    std::int64_t n_repeats = 10;      // noise redraws
    std::int64_t repeat_offset = 0;   // absolute index of the first repeat
    std::uint64_t master_seed = 0;    // drives demonstration sampling
    std::int64_t query_limit = -1;    // evaluate only the first N queries; -1 = all
    noise_config noise;               // lambda, sigma, and the noise master seed
    scoring_options scoring;
    prompt_options prompt;

    void validate() const;  // throws config_error
};

struct repeat_metrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double ece1 = 0.0;
};

struct run_result {
    // records[r] holds (queries - skips) * tries_per_query predictions, in
    // (query, try) order, for repeat r.
    std::vector<std::vector<prediction_record>> records;
    std::vector<repeat_metrics> per_repeat;
    repeat_metrics mean;
    repeat_metrics stddev;  // population standard deviation over repeats
    std::vector<std::int64_t> skipped_queries;  // indices into the split
    std::int64_t queries_evaluated = 0;
};

// Deterministic seed for the demonstrations of (k, query, try). Repeats are
// deliberately absent: repeats differ only in their noise draw.
std::uint64_t demo_stream_seed(std::uint64_t master_seed, std::int64_t k, std::int64_t query,
                               std::int64_t attempt);

// Noise seed for an absolute repeat index, so a run of repeats [0, 10) equals
// the concatenation of [0, 5) and a second invocation with repeat_offset 5.
std::uint64_t repeat_noise_seed(std::uint64_t noise_master, std::int64_t absolute_repeat);

// Full protocol: for each repeat, perturb the parameters with that repeat's
// noise seed, rebuild the model, and score every query `tries_per_query`
// times with freshly drawn demonstrations (same draws in every repeat).
// Queries whose prompt cannot fit the context are skipped wholesale and
// reported. Demonstrations come from the evaluated split itself, excluding
// the query record.
run_result run_experiment(const tensor_map& params, const model_config& mcfg,
                          const bpe_vocab& vocab, const task_dataset& split,
                          const experiment_spec& spec);

}  // namespace picl
