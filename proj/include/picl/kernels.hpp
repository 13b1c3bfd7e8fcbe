#pragma once

#include <cstdint>
#include <span>

namespace picl::kernels {

// Deterministic dot product: eight independent accumulator lanes over
// consecutive elements, combined in a fixed tree. The lane split keeps the
// reduction order independent of vectorization width and thread count.
float dot(const float* a, const float* b, std::int64_t n) noexcept;

// C[M,N] = A[M,K] * W[N,K]^T (+ bias[N] if non-null). W holds one output row
// per row of memory, so each C element is one dot; parallel over outputs.
void matmul_tn(const float* a, const float* w, const float* bias, float* c,
               std::int64_t m, std::int64_t n, std::int64_t k);

// Row-wise layer normalization with affine parameters; statistics in double.
void layer_norm(const float* x, const float* gamma, const float* beta, float* y,
                std::int64_t rows, std::int64_t cols, float eps);

// tanh-approximated GELU, elementwise in place.
void gelu(float* x, std::int64_t n);

// In-place softmax over one row; max-subtracted, double accumulation.
void softmax_row(float* x, std::int64_t n) noexcept;

// Causal multi-head self-attention. qkv is [T, 3*D] (query block, then key,
// then value, each split head-major into D/H lanes); out is [T, D].
// Parallel over (head, position) pairs, each computed independently.
void causal_attention(const float* qkv, float* out, std::int64_t t, std::int64_t d,
                      std::int64_t heads);

// Serial single-accumulator baselines used as test oracles and in the
// kernel benchmark. Same math, natural loop order, no threading.
namespace ref {
float dot(const float* a, const float* b, std::int64_t n) noexcept;
void matmul_tn(const float* a, const float* w, const float* bias, float* c,
               std::int64_t m, std::int64_t n, std::int64_t k);
void layer_norm(const float* x, const float* gamma, const float* beta, float* y,
                std::int64_t rows, std::int64_t cols, float eps);
void gelu(float* x, std::int64_t n);
void causal_attention(const float* qkv, float* out, std::int64_t t, std::int64_t d,
                      std::int64_t heads);
}  // namespace ref

}  // namespace picl::kernels
