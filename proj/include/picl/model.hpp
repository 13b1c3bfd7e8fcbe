#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "picl/bpe.hpp"
#include "picl/tensor.hpp"

namespace picl {

struct model_config {
    std::int64_t n_layers = 0;
    std::int64_t n_heads = 0;
    std::int64_t d_model = 0;
    std::int64_t vocab_size = 0;
    std::int64_t max_context = 0;
    float layernorm_eps = 1e-5f;

    // Reads the checkpoint's config.json (n_layer, n_head, n_embd,
    // vocab_size, n_positions or n_ctx, layer_norm_epsilon).
    static model_config from_json_file(const std::filesystem::path& path);
    void validate() const;  // throws config_error
};

// Loads a parameter container and canonicalizes names: an optional
// "transformer." prefix is stripped; attention mask buffers and the tied
// output head are dropped; anything else unrecognized is an error, as are
// missing parameters or wrong shapes.
tensor_map load_weights(const std::filesystem::path& path, const model_config& cfg);

// Shape/name validation used by load_weights, applicable to any candidate
// parameter set (for example a perturbed copy).
void validate_weights(const tensor_map& params, const model_config& cfg);

// Numerically stable log-softmax in double precision.
std::vector<double> log_softmax(std::span<const float> logits);

// Decoder-only transformer with pre-layernorm blocks, learned positional
// embeddings, and the token embedding reused as the output head. Weights are
// packed (projection matrices transposed to row-per-output) at construction.
// All methods are const and allocate their own scratch, so one instance can
// serve concurrent callers.
class gpt2_model {
public:
    gpt2_model(const tensor_map& params, const model_config& cfg);

    const model_config& config() const noexcept { return cfg_; }

    // Next-token logits after the final token.
    std::vector<float> forward(std::span<const token_id> tokens) const;

    // Logits at each requested position (ascending, in range). The head
    // projection runs only at those rows.
    std::vector<std::vector<float>> forward_at(std::span<const token_id> tokens,
                                               std::span<const std::int64_t> positions) const;

    // Sum over continuation tokens of log p(token | preceding tokens), with
    // the prefix as context. Both spans must be non-empty.
    double sequence_logprob(std::span<const token_id> prefix,
                            std::span<const token_id> continuation) const;

private:
    struct layer_weights {
        std::vector<float> ln1_g, ln1_b;
        std::vector<float> qkv_w, qkv_b;    // [3D, D], [3D]
        std::vector<float> attn_out_w, attn_out_b;  // [D, D], [D]
        std::vector<float> ln2_g, ln2_b;
        std::vector<float> fc_w, fc_b;      // [4D, D], [4D]
        std::vector<float> mlp_out_w, mlp_out_b;    // [D, 4D], [D]
    };

    // Runs the full stack, returning the final-layernormed hidden states
    // [T, D] for the given tokens.
    std::vector<float> hidden_states(std::span<const token_id> tokens) const;

    model_config cfg_;
    std::vector<float> wte_, wpe_, lnf_g_, lnf_b_;
    std::vector<layer_weights> layers_;
};

}  // namespace picl
