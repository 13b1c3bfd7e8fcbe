#include "picl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "picl/common.hpp"
#include "picl/prompt.hpp"

namespace picl {

void experiment_spec::validate() const {
    if (k < 0) throw config_error("k must be non-negative");
    if (tries_per_query < 1) throw config_error("tries_per_query must be at least 1");
    if (n_repeats < 1) throw config_error("n_repeats must be at least 1");
    if (repeat_offset < 0) throw config_error("repeat_offset must be non-negative");
    if (query_limit < -1 || query_limit == 0)
        throw config_error("query_limit must be -1 (all) or positive");
    noise.validate();
}

std::uint64_t demo_stream_seed(std::uint64_t master_seed, std::int64_t k, std::int64_t query,
                               std::int64_t attempt) {
    std::uint64_t s = derive_seed(master_seed, "demo");
    s = derive_seed(s, static_cast<std::uint64_t>(k));
    s = derive_seed(s, static_cast<std::uint64_t>(query));
    return derive_seed(s, static_cast<std::uint64_t>(attempt));
}

std::uint64_t repeat_noise_seed(std::uint64_t noise_master, std::int64_t absolute_repeat) {
    return derive_seed(derive_seed(noise_master, "noise"),
                       static_cast<std::uint64_t>(absolute_repeat));
}

namespace {

repeat_metrics metrics_of(std::span<const prediction_record> records, std::int32_t n_classes) {
    repeat_metrics m;
    m.accuracy = accuracy(records);
    m.macro_f1 = macro_f1(records, n_classes);
    m.ece1 = ece1(records);
    return m;
}

}  // namespace

run_result run_experiment(const tensor_map& params, const model_config& mcfg,
                          const bpe_vocab& vocab, const task_dataset& split,
                          const experiment_spec& spec) {
    spec.validate();
    split.validate();

    const std::int64_t n_records = static_cast<std::int64_t>(split.records.size());
    const std::int64_t n_queries =
        spec.query_limit < 0 ? n_records : std::min(spec.query_limit, n_records);

    // Demonstration draws ignore the repeat, so prompts can be prepared once.
    struct query_plan {
        std::int64_t query = 0;
        std::vector<prompt_string> prompts;  // one per try
    };
    std::vector<query_plan> plans;
    run_result result;

    std::size_t longest_continuation = 0;
    for (const std::string& v : split.label_space)
        longest_continuation =
            std::max(longest_continuation, encode(vocab, " " + v).size());
    const auto ctx = static_cast<std::size_t>(mcfg.max_context);

    for (std::int64_t q = 0; q < n_queries; ++q) {
        query_plan plan;
        plan.query = q;
        bool fits = true;
        for (std::int64_t t = 0; t < spec.tries_per_query; ++t) {
            rng_stream stream(demo_stream_seed(spec.master_seed, spec.k, q, t));
            const std::vector<task_record> demos = sample_demos(split, spec.k, stream, q);
            prompt_string p = build_prompt(demos, split.records[static_cast<std::size_t>(q)],
                                           split.label_space, split.category, spec.prompt);
            std::string prefix_text = p.text;
            if (!prefix_text.empty() && prefix_text.back() == ' ') prefix_text.pop_back();
            if (encode(vocab, prefix_text).size() + longest_continuation > ctx) {
                fits = false;
                break;
            }
            plan.prompts.push_back(std::move(p));
        }
        // Any overflowing try discards the query entirely, keeping the
        // record count uniform across evaluated queries.
        if (fits) plans.push_back(std::move(plan));
        else result.skipped_queries.push_back(q);
    }
    result.queries_evaluated = static_cast<std::int64_t>(plans.size());
    if (plans.empty())
        throw runtime_failure("every query overflowed the model context; nothing to evaluate");

    const auto n_classes = static_cast<std::int32_t>(split.label_space.size());

    // lambda = 0 leaves parameters untouched, so one model serves every
    // repeat; otherwise each repeat perturbs and rebuilds.
    std::unique_ptr<gpt2_model> shared_model;
    if (spec.noise.lambda == 0.0)
        shared_model = std::make_unique<gpt2_model>(params, mcfg);

    for (std::int64_t r = 0; r < spec.n_repeats; ++r) {
        std::unique_ptr<gpt2_model> repeat_model;
        const gpt2_model* model = shared_model.get();
        if (!model) {
            noise_config noise = spec.noise;
            noise.master_seed =
                repeat_noise_seed(spec.noise.master_seed, spec.repeat_offset + r);
            const tensor_map perturbed = perturb(params, noise);
            repeat_model = std::make_unique<gpt2_model>(perturbed, mcfg);
            model = repeat_model.get();
        }

        std::vector<prediction_record> records;
        records.reserve(plans.size() * static_cast<std::size_t>(spec.tries_per_query));
        for (const query_plan& plan : plans) {
            const task_record& query = split.records[static_cast<std::size_t>(plan.query)];
            for (const prompt_string& p : plan.prompts) {
                const label_distribution dist =
                    score_labels(*model, vocab, p, split.label_space, spec.scoring);
                prediction_record rec;
                rec.predicted = dist.predicted;
                rec.gold = query.label;
                rec.confidence = dist.confidence;
                rec.probs = dist.probs;
                records.push_back(std::move(rec));
            }
        }
        result.per_repeat.push_back(metrics_of(records, n_classes));
        result.records.push_back(std::move(records));
    }

    const auto n = static_cast<double>(spec.n_repeats);
    auto aggregate = [&](auto field) {
        double sum = 0.0;
        for (const repeat_metrics& m : result.per_repeat) sum += m.*field;
        const double mean = sum / n;
        double var = 0.0;
        for (const repeat_metrics& m : result.per_repeat) {
            const double d = m.*field - mean;
            var += d * d;
        }
        return std::pair<double, double>(mean, std::sqrt(var / n));
    };
    std::tie(result.mean.accuracy, result.stddev.accuracy) = aggregate(&repeat_metrics::accuracy);
    std::tie(result.mean.macro_f1, result.stddev.macro_f1) = aggregate(&repeat_metrics::macro_f1);
    std::tie(result.mean.ece1, result.stddev.ece1) = aggregate(&repeat_metrics::ece1);
    return result;
}

}  // namespace picl
