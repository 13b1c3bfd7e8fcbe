#include "picl/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "picl/common.hpp"
#include "picl/kernels.hpp"
#include "picl/safetensors.hpp"

namespace picl {

model_config model_config::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open model config: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed model config: " + std::string(e.what()));
    }
    model_config cfg;
    auto require = [&](const char* key) -> std::int64_t {
        if (!j.contains(key)) throw data_error(std::string("model config missing key: ") + key);
        return j[key].get<std::int64_t>();
    };
    cfg.n_layers = require("n_layer");
    cfg.n_heads = require("n_head");
    cfg.d_model = require("n_embd");
    cfg.vocab_size = require("vocab_size");
    cfg.max_context = j.contains("n_positions") ? j["n_positions"].get<std::int64_t>()
                                                : require("n_ctx");
    if (j.contains("layer_norm_epsilon")) cfg.layernorm_eps = j["layer_norm_epsilon"].get<float>();
    cfg.validate();
    return cfg;
}

void model_config::validate() const {
    if (n_layers <= 0 || n_heads <= 0 || d_model <= 0 || vocab_size <= 0 || max_context <= 0)
        throw config_error("model dimensions must be positive");
    if (d_model % n_heads != 0)
        throw config_error("d_model must be divisible by n_heads");
    if (!(layernorm_eps > 0.0f))
        throw config_error("layernorm epsilon must be positive");
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string shape_string(const std::vector<std::int64_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
}

}  // namespace

void validate_weights(const tensor_map& params, const model_config& cfg) {
    const std::int64_t d = cfg.d_model;
    std::vector<std::pair<std::string, std::vector<std::int64_t>>> expected = {
        {"wte.weight", {cfg.vocab_size, d}},
        {"wpe.weight", {cfg.max_context, d}},
        {"ln_f.weight", {d}},
        {"ln_f.bias", {d}},
    };
    for (std::int64_t l = 0; l < cfg.n_layers; ++l) {
        const std::string p = "h." + std::to_string(l) + ".";
        expected.emplace_back(p + "ln_1.weight", std::vector<std::int64_t>{d});
        expected.emplace_back(p + "ln_1.bias", std::vector<std::int64_t>{d});
        expected.emplace_back(p + "attn.c_attn.weight", std::vector<std::int64_t>{d, 3 * d});
        expected.emplace_back(p + "attn.c_attn.bias", std::vector<std::int64_t>{3 * d});
        expected.emplace_back(p + "attn.c_proj.weight", std::vector<std::int64_t>{d, d});
        expected.emplace_back(p + "attn.c_proj.bias", std::vector<std::int64_t>{d});
        expected.emplace_back(p + "ln_2.weight", std::vector<std::int64_t>{d});
        expected.emplace_back(p + "ln_2.bias", std::vector<std::int64_t>{d});
        expected.emplace_back(p + "mlp.c_fc.weight", std::vector<std::int64_t>{d, 4 * d});
        expected.emplace_back(p + "mlp.c_fc.bias", std::vector<std::int64_t>{4 * d});
        expected.emplace_back(p + "mlp.c_proj.weight", std::vector<std::int64_t>{4 * d, d});
        expected.emplace_back(p + "mlp.c_proj.bias", std::vector<std::int64_t>{d});
    }
    for (const auto& [name, t] : params) {
        const bool known = std::any_of(expected.begin(), expected.end(),
                                       [&](const auto& e) { return e.first == name; });
        if (!known) throw data_error("unexpected tensor in weights: " + name);
    }
    for (const auto& [name, shape] : expected) {
        if (!params.contains(name)) throw data_error("missing tensor: " + name);
        const tensor& t = params.at(name);
        if (t.shape != shape)
            throw data_error("unexpected shape for " + name + ": got " +
                             shape_string(t.shape) + ", want " + shape_string(shape));
    }
}

tensor_map load_weights(const std::filesystem::path& path, const model_config& cfg) {
    tensor_map raw = read_safetensors(path);
    tensor_map canonical;
    for (auto& [name, t] : raw) {
        std::string key = name;
        constexpr std::string_view prefix = "transformer.";
        if (key.rfind(prefix, 0) == 0) key = key.substr(prefix.size());
        if (key == "lm_head.weight") continue;  // tied to wte.weight
        if (ends_with(key, ".attn.bias") || ends_with(key, ".attn.masked_bias"))
            continue;  // causal mask buffers, not parameters
        canonical.insert(std::move(key), t);
    }
    validate_weights(canonical, cfg);
    return canonical;
}

std::vector<double> log_softmax(std::span<const float> logits) {
    float mx = logits[0];
    for (float v : logits)
        if (v > mx) mx = v;
    double sum = 0.0;
    for (float v : logits) sum += std::exp(static_cast<double>(v) - static_cast<double>(mx));
    const double lse = static_cast<double>(mx) + std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i)
        out[i] = static_cast<double>(logits[i]) - lse;
    return out;
}

namespace {

// Transposes an [in, out] projection into row-per-output [out, in].
std::vector<float> transpose_to_rows(const tensor& t) {
    const std::int64_t rows_in = t.shape[0];
    const std::int64_t cols_out = t.shape[1];
    std::vector<float> packed(static_cast<std::size_t>(rows_in * cols_out));
    for (std::int64_t i = 0; i < rows_in; ++i)
        for (std::int64_t j = 0; j < cols_out; ++j)
            packed[static_cast<std::size_t>(j * rows_in + i)] =
                t.data[static_cast<std::size_t>(i * cols_out + j)];
    return packed;
}

}  // namespace

gpt2_model::gpt2_model(const tensor_map& params, const model_config& cfg) : cfg_(cfg) {
    cfg_.validate();
    validate_weights(params, cfg_);
    params.validate_finite();

    wte_ = params.at("wte.weight").data;
    wpe_ = params.at("wpe.weight").data;
    lnf_g_ = params.at("ln_f.weight").data;
    lnf_b_ = params.at("ln_f.bias").data;

    layers_.resize(static_cast<std::size_t>(cfg_.n_layers));
    for (std::int64_t l = 0; l < cfg_.n_layers; ++l) {
        const std::string p = "h." + std::to_string(l) + ".";
        layer_weights& lw = layers_[static_cast<std::size_t>(l)];
        lw.ln1_g = params.at(p + "ln_1.weight").data;
        lw.ln1_b = params.at(p + "ln_1.bias").data;
        lw.qkv_w = transpose_to_rows(params.at(p + "attn.c_attn.weight"));
        lw.qkv_b = params.at(p + "attn.c_attn.bias").data;
        lw.attn_out_w = transpose_to_rows(params.at(p + "attn.c_proj.weight"));
        lw.attn_out_b = params.at(p + "attn.c_proj.bias").data;
        lw.ln2_g = params.at(p + "ln_2.weight").data;
        lw.ln2_b = params.at(p + "ln_2.bias").data;
        lw.fc_w = transpose_to_rows(params.at(p + "mlp.c_fc.weight"));
        lw.fc_b = params.at(p + "mlp.c_fc.bias").data;
        lw.mlp_out_w = transpose_to_rows(params.at(p + "mlp.c_proj.weight"));
        lw.mlp_out_b = params.at(p + "mlp.c_proj.bias").data;
    }
}

std::vector<float> gpt2_model::hidden_states(std::span<const token_id> tokens) const {
    const std::int64_t t = static_cast<std::int64_t>(tokens.size());
    const std::int64_t d = cfg_.d_model;
    if (t == 0) throw runtime_failure("forward pass requires at least one token");
    if (t > cfg_.max_context)
        throw context_overflow(static_cast<std::size_t>(t),
                               static_cast<std::size_t>(cfg_.max_context));
    for (token_id id : tokens)
        if (id < 0 || id >= cfg_.vocab_size)
            throw data_error("token id out of range: " + std::to_string(id));

    std::vector<float> x(static_cast<std::size_t>(t * d));
    for (std::int64_t i = 0; i < t; ++i) {
        const float* emb = wte_.data() + static_cast<std::int64_t>(tokens[i]) * d;
        const float* pos = wpe_.data() + i * d;
        float* row = x.data() + i * d;
        for (std::int64_t j = 0; j < d; ++j) row[j] = emb[j] + pos[j];
    }

    std::vector<float> normed(x.size());
    std::vector<float> qkv(static_cast<std::size_t>(t * 3 * d));
    std::vector<float> attn(x.size());
    std::vector<float> proj(x.size());
    std::vector<float> mlp_hidden(static_cast<std::size_t>(t * 4 * d));

    for (const layer_weights& lw : layers_) {
        kernels::layer_norm(x.data(), lw.ln1_g.data(), lw.ln1_b.data(), normed.data(), t, d,
                            cfg_.layernorm_eps);
        kernels::matmul_tn(normed.data(), lw.qkv_w.data(), lw.qkv_b.data(), qkv.data(), t,
                           3 * d, d);
        kernels::causal_attention(qkv.data(), attn.data(), t, d, cfg_.n_heads);
        kernels::matmul_tn(attn.data(), lw.attn_out_w.data(), lw.attn_out_b.data(),
                           proj.data(), t, d, d);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += proj[i];

        kernels::layer_norm(x.data(), lw.ln2_g.data(), lw.ln2_b.data(), normed.data(), t, d,
                            cfg_.layernorm_eps);
        kernels::matmul_tn(normed.data(), lw.fc_w.data(), lw.fc_b.data(), mlp_hidden.data(),
                           t, 4 * d, d);
        kernels::gelu(mlp_hidden.data(), t * 4 * d);
        kernels::matmul_tn(mlp_hidden.data(), lw.mlp_out_w.data(), lw.mlp_out_b.data(),
                           proj.data(), t, d, 4 * d);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += proj[i];
    }

    kernels::layer_norm(x.data(), lnf_g_.data(), lnf_b_.data(), normed.data(), t, d,
                        cfg_.layernorm_eps);
    return normed;
}

std::vector<std::vector<float>> gpt2_model::forward_at(
    std::span<const token_id> tokens, std::span<const std::int64_t> positions) const {
    const std::int64_t t = static_cast<std::int64_t>(tokens.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (positions[i] < 0 || positions[i] >= t)
            throw runtime_failure("logit position out of range");
        if (i > 0 && positions[i] <= positions[i - 1])
            throw runtime_failure("logit positions must be strictly ascending");
    }
    const std::vector<float> hidden = hidden_states(tokens);
    const std::int64_t d = cfg_.d_model;

    std::vector<float> rows(positions.size() * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < positions.size(); ++i)
        std::copy_n(hidden.data() + positions[i] * d, d, rows.data() + i * d);

    std::vector<float> logits(positions.size() * static_cast<std::size_t>(cfg_.vocab_size));
    kernels::matmul_tn(rows.data(), wte_.data(), nullptr, logits.data(),
                       static_cast<std::int64_t>(positions.size()), cfg_.vocab_size, d);

    std::vector<std::vector<float>> out(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i)
        out[i].assign(logits.begin() + i * cfg_.vocab_size,
                      logits.begin() + (i + 1) * cfg_.vocab_size);
    return out;
}

std::vector<float> gpt2_model::forward(std::span<const token_id> tokens) const {
    const std::int64_t last = static_cast<std::int64_t>(tokens.size()) - 1;
    return std::move(forward_at(tokens, std::span<const std::int64_t>(&last, 1)).front());
}

double gpt2_model::sequence_logprob(std::span<const token_id> prefix,
                                    std::span<const token_id> continuation) const {
    if (prefix.empty()) throw runtime_failure("sequence scoring requires a non-empty prefix");
    if (continuation.empty())
        throw runtime_failure("sequence scoring requires a non-empty continuation");

    std::vector<token_id> all(prefix.begin(), prefix.end());
    all.insert(all.end(), continuation.begin(), continuation.end());

    std::vector<std::int64_t> positions(continuation.size());
    for (std::size_t j = 0; j < continuation.size(); ++j)
        positions[j] = static_cast<std::int64_t>(prefix.size()) + static_cast<std::int64_t>(j) - 1;

    const auto rows = forward_at(all, positions);
    double total = 0.0;
    for (std::size_t j = 0; j < continuation.size(); ++j)
        total += log_softmax(rows[j])[static_cast<std::size_t>(continuation[j])];
    return total;
}

}  // namespace picl
