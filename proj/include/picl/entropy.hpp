#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "picl/decoder.hpp"

namespace picl {

// Shannon entropy of a distribution normalized by ln(support size), so the
// result lies in [0, 1]; 0 * ln 0 counts as 0. Probabilities must be
// non-negative and sum to 1 within 1e-6.
double normalized_entropy(std::span<const double> probs);

// Entropy of the frequency distribution induced by integer counts, again
// normalized by ln(number of categories).
double frequency_entropy(std::span<const std::int64_t> counts);

// Next-token entropy over the full vocabulary after consuming `input`
// (a minimal context such as " " or "Label: ").
double token_entropy(const gpt2_model& model, const bpe_vocab& vocab, std::string_view input);

// How label predictions are tallied across the query-less prompts.
enum class label_tally { argmax, mean_probs };

// Label-marginal entropy: `tries` query-less prompts, each with k fresh
// demonstrations drawn from a per-try stream derived from the seed; the
// predicted-label frequencies (or mean probabilities) give the distribution.
// Datasets flagged as containing a neutral label are refused, since a
// neutral class makes "prefers no label" indistinguishable from "prefers
// the neutral label".
double label_entropy(const gpt2_model& model, const bpe_vocab& vocab, const task_dataset& ds,
                     std::int64_t k, std::int64_t tries, std::uint64_t seed,
                     label_tally tally = label_tally::argmax,
                     const scoring_options& scoring = {}, const prompt_options& prompt = {});

}  // namespace picl
