#include "picl/tensor.hpp"

#include <cmath>

#include "picl/common.hpp"

namespace picl {

tensor::tensor(std::vector<std::int64_t> shape_) : shape(std::move(shape_)) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
        if (d < 0) throw data_error("tensor shape has a negative dimension");
        n *= d;
    }
    data.assign(static_cast<std::size_t>(n), 0.0f);
}

std::int64_t tensor::numel() const noexcept {
    std::int64_t n = 1;
    for (std::int64_t d : shape) n *= d;
    return n;
}

bool tensor::same_shape(const tensor& other) const noexcept {
    return shape == other.shape;
}

bool tensor_map::contains(std::string_view name) const {
    return entries_.find(name) != entries_.end();
}

const tensor& tensor_map::at(std::string_view name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
        throw data_error("missing tensor: " + std::string(name));
    return it->second;
}

tensor& tensor_map::insert(std::string name, tensor t) {
    auto [it, fresh] = entries_.emplace(std::move(name), std::move(t));
    if (!fresh) throw data_error("duplicate tensor name: " + it->first);
    return it->second;
}

std::int64_t tensor_map::numel() const noexcept {
    std::int64_t n = 0;
    for (const auto& [name, t] : entries_) n += t.numel();
    return n;
}

void tensor_map::validate_finite() const {
    for (const auto& [name, t] : entries_) {
        for (float v : t.data) {
            if (!std::isfinite(v))
                throw data_error("non-finite value in tensor: " + name);
        }
    }
}

}  // namespace picl
