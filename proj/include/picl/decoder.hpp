#pragma once

#include <span>
#include <string>
#include <vector>

#include "picl/model.hpp"
#include "picl/prompt.hpp"

namespace picl {

// Multi-token verbalizer scoring rule: total log-probability, or the
// per-token mean (which removes the length penalty).
enum class length_norm { sum, mean };

struct scoring_options {
    length_norm norm = length_norm::sum;
};

struct label_distribution {
    std::vector<double> raw_scores;  // one per label, before normalization
    std::vector<double> probs;       // softmax over raw_scores
    std::int32_t predicted = 0;      // argmax; ties break to the lowest index
    double confidence = 0.0;         // probs[predicted]
};

// Scores every verbalizer as a continuation of the prompt and normalizes
// into a distribution over the label space. The prompt's single trailing
// space (when present) moves onto the continuation, so each verbalizer is
// scored as " " + verbalizer and tokenizes exactly as it does inside a
// demonstration line. The model runs once over the shared prefix; labels
// needing more than one token extend that pass.
label_distribution score_labels(const gpt2_model& model, const bpe_vocab& vocab,
                                const prompt_string& prompt,
                                std::span<const std::string> verbalizers,
                                const scoring_options& opts = {});

}  // namespace picl
