#pragma once

#include <filesystem>

#include "picl/tensor.hpp"

namespace picl {

// Reads a safetensors container: 8-byte little-endian header length, JSON
// header mapping tensor names to {dtype, shape, data_offsets}, then the raw
// buffer. F32 entries load; other dtypes are skipped (buffers such as
// attention masks are not parameters). Malformed headers, out-of-range or
// mis-sized offsets, and non-finite payloads raise data_error.
tensor_map read_safetensors(const std::filesystem::path& path);

// Writes all tensors as F32 in name order with contiguous offsets.
void write_safetensors(const std::filesystem::path& path, const tensor_map& tensors);

}  // namespace picl
