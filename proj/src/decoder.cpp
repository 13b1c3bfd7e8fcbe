#include "picl/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "picl/common.hpp"

namespace picl {

label_distribution score_labels(const gpt2_model& model, const bpe_vocab& vocab,
                                const prompt_string& prompt,
                                std::span<const std::string> verbalizers,
                                const scoring_options& opts) {
    if (verbalizers.size() < 2)
        throw data_error("label scoring needs at least two verbalizers");

    std::string prefix_text = prompt.text;
    if (!prefix_text.empty() && prefix_text.back() == ' ') prefix_text.pop_back();
    const std::vector<token_id> prefix = encode(vocab, prefix_text);
    if (prefix.empty()) throw runtime_failure("prompt tokenizes to an empty sequence");

    std::vector<std::vector<token_id>> continuations;
    std::size_t longest = 0;
    for (const std::string& v : verbalizers) {
        if (v.empty()) throw data_error("empty verbalizer");
        continuations.push_back(encode(vocab, " " + v));
        longest = std::max(longest, continuations.back().size());
    }

    const std::size_t ctx = static_cast<std::size_t>(model.config().max_context);
    if (prefix.size() + longest > ctx) throw context_overflow(prefix.size() + longest, ctx);

    // One pass over the shared prefix covers every label's first token; the
    // row is identical to what a full prefix+continuation pass would give at
    // that position, because each position's computation is self-contained.
    const std::int64_t last = static_cast<std::int64_t>(prefix.size()) - 1;
    const auto head_row = model.forward_at(prefix, std::span<const std::int64_t>(&last, 1));
    const std::vector<double> head_lsm = log_softmax(head_row[0]);

    label_distribution out;
    for (const std::vector<token_id>& cont : continuations) {
        double raw = head_lsm[static_cast<std::size_t>(cont[0])];
        if (cont.size() > 1) {
            std::vector<token_id> all(prefix.begin(), prefix.end());
            all.insert(all.end(), cont.begin(), cont.end());
            std::vector<std::int64_t> positions(cont.size() - 1);
            for (std::size_t j = 0; j + 1 < cont.size(); ++j)
                positions[j] = static_cast<std::int64_t>(prefix.size() + j);
            const auto rows = model.forward_at(all, positions);
            for (std::size_t j = 1; j < cont.size(); ++j)
                raw += log_softmax(rows[j - 1])[static_cast<std::size_t>(cont[j])];
        }
        if (opts.norm == length_norm::mean) raw /= static_cast<double>(cont.size());
        out.raw_scores.push_back(raw);
    }

    double mx = out.raw_scores[0];
    for (double s : out.raw_scores) mx = std::max(mx, s);
    double sum = 0.0;
    out.probs.resize(out.raw_scores.size());
    for (std::size_t i = 0; i < out.raw_scores.size(); ++i) {
        out.probs[i] = std::exp(out.raw_scores[i] - mx);
        sum += out.probs[i];
    }
    for (double& p : out.probs) p /= sum;

    out.predicted = 0;
    for (std::size_t i = 1; i < out.probs.size(); ++i)
        if (out.probs[i] > out.probs[static_cast<std::size_t>(out.predicted)])
            out.predicted = static_cast<std::int32_t>(i);
    out.confidence = out.probs[static_cast<std::size_t>(out.predicted)];
    return out;
}

}  // namespace picl
