#include "picl/perturb.hpp"

#include <cmath>

#include "picl/common.hpp"
#include "picl/rng.hpp"

namespace picl {

void noise_config::validate() const {
    if (!(lambda >= 0.0) || !(lambda <= 1.0) || std::isnan(lambda))
        throw config_error("lambda must lie in [0, 1]");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw config_error("sigma must be positive and finite");
}

bool noise_config::selects(std::string_view name) const {
    if (include.empty()) return true;
    for (const std::string& pat : include)
        if (name.find(pat) != std::string_view::npos) return true;
    return false;
}

std::uint64_t derive_tensor_seed(std::uint64_t master_seed, std::string_view name) {
    return derive_seed(master_seed, name);
}

namespace {

inline float interpolate(float value, double lambda, double sigma, std::uint64_t seed,
                         std::uint64_t index) noexcept {
    const double n = sigma * gaussian_at(seed, index);
    return static_cast<float>((1.0 - lambda) * static_cast<double>(value) + lambda * n);
}

tensor_map perturb_impl(const tensor_map& params, const noise_config& cfg, bool parallel) {
    cfg.validate();
    tensor_map out;
    for (const auto& [name, t] : params) {
        tensor copy = t;
        if (cfg.lambda != 0.0 && cfg.selects(name)) {
            const std::uint64_t seed = derive_tensor_seed(cfg.master_seed, name);
            const std::int64_t n = t.numel();
            float* dst = copy.data.data();
            const float* src = t.data.data();
            if (parallel) {
#pragma omp parallel for schedule(static)
                for (std::int64_t i = 0; i < n; ++i)
                    dst[i] = interpolate(src[i], cfg.lambda, cfg.sigma, seed,
                                         static_cast<std::uint64_t>(i));
            } else {
                for (std::int64_t i = 0; i < n; ++i)
                    dst[i] = interpolate(src[i], cfg.lambda, cfg.sigma, seed,
                                         static_cast<std::uint64_t>(i));
            }
        }
        out.insert(name, std::move(copy));
    }
    return out;
}

}  // namespace

tensor_map perturb(const tensor_map& params, const noise_config& cfg) {
    return perturb_impl(params, cfg, true);
}

namespace ref {
tensor_map perturb(const tensor_map& params, const noise_config& cfg) {
    return perturb_impl(params, cfg, false);
}
}  // namespace ref

}  // namespace picl
