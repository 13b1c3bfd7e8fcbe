#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "picl/tensor.hpp"

namespace picl {

struct noise_config {
    double lambda = 0.0;   // interpolation weight in [0, 1]
    double sigma = 0.02;   // noise standard deviation, > 0
    std::uint64_t master_seed = 0;
    // Substring filters; empty means every tensor. Non-matching tensors copy
    // through unchanged.
    std::vector<std::string> include;

    void validate() const;  // throws config_error
    bool selects(std::string_view name) const;
};

// Per-tensor noise seed: the master seed combined with the tensor name, so
// each tensor draws an independent stream and renaming any one tensor leaves
// the others' noise unchanged.
std::uint64_t derive_tensor_seed(std::uint64_t master_seed, std::string_view name);

// Interpolates every selected element toward Gaussian noise:
//   out = (1 - lambda) * in + lambda * n,  n ~ N(0, sigma^2)
// addressed by (tensor seed, flat index). lambda = 0 returns a bitwise copy.
// Parallel over elements; bitwise reproducible at any thread count.
tensor_map perturb(const tensor_map& params, const noise_config& cfg);

namespace ref {
// Serial twin, same addressing; used as the determinism oracle.
tensor_map perturb(const tensor_map& params, const noise_config& cfg);
}

}  // namespace picl
