#include "picl/entropy.hpp"

#include <cmath>
#include <vector>

#include "picl/common.hpp"

namespace picl {

double normalized_entropy(std::span<const double> probs) {
    if (probs.size() < 2) throw runtime_failure("entropy needs a support of at least two");
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0 || !std::isfinite(p)) throw runtime_failure("invalid probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw runtime_failure("probabilities sum to " + std::to_string(sum) + ", not 1");
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h / std::log(static_cast<double>(probs.size()));
}

double frequency_entropy(std::span<const std::int64_t> counts) {
    if (counts.size() < 2) throw runtime_failure("entropy needs a support of at least two");
    std::int64_t total = 0;
    for (std::int64_t c : counts) {
        if (c < 0) throw runtime_failure("negative count");
        total += c;
    }
    if (total == 0) throw runtime_failure("all counts are zero");
    std::vector<double> probs(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        probs[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return normalized_entropy(probs);
}

double token_entropy(const gpt2_model& model, const bpe_vocab& vocab, std::string_view input) {
    const std::vector<token_id> tokens = encode(vocab, input);
    if (tokens.empty()) throw runtime_failure("probe input tokenizes to an empty sequence");
    std::vector<float> logits = model.forward(tokens);

    // Double-precision softmax + entropy over the vocabulary.
    const std::vector<double> lsm = log_softmax(logits);
    double h = 0.0;
    for (double lp : lsm) {
        const double p = std::exp(lp);
        if (p > 0.0) h -= p * lp;
    }
    return h / std::log(static_cast<double>(lsm.size()));
}

double label_entropy(const gpt2_model& model, const bpe_vocab& vocab, const task_dataset& ds,
                     std::int64_t k, std::int64_t tries, std::uint64_t seed, label_tally tally,
                     const scoring_options& scoring, const prompt_options& prompt) {
    if (ds.has_neutral)
        throw config_error(
            "label-marginal entropy is undefined for datasets with a neutral label: " + ds.name);
    if (tries < 1) throw config_error("label entropy needs at least one try");
    ds.validate();

    const std::size_t n_labels = ds.label_space.size();
    std::vector<std::int64_t> counts(n_labels, 0);
    std::vector<double> prob_sums(n_labels, 0.0);

    for (std::int64_t t = 0; t < tries; ++t) {
        rng_stream stream(derive_seed(derive_seed(seed, "try"), static_cast<std::uint64_t>(t)));
        const std::vector<task_record> demos = sample_demos(ds, k, stream);
        const prompt_string p = build_queryless_prompt(demos, ds.label_space, ds.category, prompt);
        const label_distribution dist = score_labels(model, vocab, p, ds.label_space, scoring);
        counts[static_cast<std::size_t>(dist.predicted)] += 1;
        for (std::size_t c = 0; c < n_labels; ++c) prob_sums[c] += dist.probs[c];
    }

    if (tally == label_tally::argmax) return frequency_entropy(counts);

    std::vector<double> mean(n_labels);
    for (std::size_t c = 0; c < n_labels; ++c)
        mean[c] = prob_sums[c] / static_cast<double>(tries);
    return normalized_entropy(mean);
}

}  // namespace picl
