#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace picl {

// Dense row-major float32 tensor.
struct tensor {
    std::vector<std::int64_t> shape;
    std::vector<float> data;

    tensor() = default;
    explicit tensor(std::vector<std::int64_t> shape_);

    std::int64_t numel() const noexcept;
    bool same_shape(const tensor& other) const noexcept;
};

// Named parameter set. Sorted by name so that iteration order, serialization,
// and digests are reproducible regardless of insertion order.
class tensor_map {
public:
    using storage = std::map<std::string, tensor, std::less<>>;
    using const_iterator = storage::const_iterator;

    bool contains(std::string_view name) const;
    const tensor& at(std::string_view name) const;       // throws data_error if absent
    tensor& insert(std::string name, tensor t);          // throws data_error on duplicate
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    const_iterator begin() const noexcept { return entries_.begin(); }
    const_iterator end() const noexcept { return entries_.end(); }

    // Total element count across all tensors.
    std::int64_t numel() const noexcept;

    // Throws data_error naming the first tensor holding a NaN or infinity.
    void validate_finite() const;

private:
    storage entries_;
};

}  // namespace picl
