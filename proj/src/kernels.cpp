#include "picl/kernels.hpp"

#include <cmath>
#include <vector>

namespace picl::kernels {

float dot(const float* a, const float* b, std::int64_t n) noexcept {
    float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc[0] += a[i + 0] * b[i + 0];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
        acc[4] += a[i + 4] * b[i + 4];
        acc[5] += a[i + 5] * b[i + 5];
        acc[6] += a[i + 6] * b[i + 6];
        acc[7] += a[i + 7] * b[i + 7];
    }
    float tail = 0.0f;
    for (; i < n; ++i) tail += a[i] * b[i];
    return (((acc[0] + acc[1]) + (acc[2] + acc[3])) +
            ((acc[4] + acc[5]) + (acc[6] + acc[7]))) + tail;
}

void matmul_tn(const float* a, const float* w, const float* bias, float* c,
               std::int64_t m, std::int64_t n, std::int64_t k) {
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) {
            float v = dot(a + i * k, w + j * k, k);
            if (bias) v += bias[j];
            c[i * n + j] = v;
        }
}

void layer_norm(const float* x, const float* gamma, const float* beta, float* y,
                std::int64_t rows, std::int64_t cols, float eps) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < rows; ++r) {
        const float* row = x + r * cols;
        double sum = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) sum += row[j];
        const double mean = sum / static_cast<double>(cols);
        double var = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) {
            const double d = row[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(cols);
        const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
        float* out = y + r * cols;
        for (std::int64_t j = 0; j < cols; ++j)
            out[j] = static_cast<float>((row[j] - mean) * inv) * gamma[j] + beta[j];
    }
}

namespace {
inline float gelu_tanh(float x) noexcept {
    const double xd = x;
    const double inner = 0.7978845608028654 * (xd + 0.044715 * xd * xd * xd);
    return static_cast<float>(0.5 * xd * (1.0 + std::tanh(inner)));
}
}  // namespace

void gelu(float* x, std::int64_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) x[i] = gelu_tanh(x[i]);
}

void softmax_row(float* x, std::int64_t n) noexcept {
    float mx = x[0];
    for (std::int64_t i = 1; i < n; ++i)
        if (x[i] > mx) mx = x[i];
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double e = std::exp(static_cast<double>(x[i]) - static_cast<double>(mx));
        x[i] = static_cast<float>(e);
        sum += e;
    }
    const double inv = 1.0 / sum;
    for (std::int64_t i = 0; i < n; ++i)
        x[i] = static_cast<float>(x[i] * inv);
}

namespace {

// One (head, query-position) cell: scores over keys 0..q, softmax, weighted
// value sum. Identical code runs in the parallel and serial variants, so the
// two agree bitwise.
void attention_cell(const float* qkv, float* out, std::int64_t d,
                    std::int64_t heads, std::int64_t h, std::int64_t q,
                    std::vector<float>& scores) {
    const std::int64_t hd = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    const std::int64_t stride = 3 * d;
    const float* qrow = qkv + q * stride + h * hd;

    scores.resize(static_cast<std::size_t>(q + 1));
    for (std::int64_t u = 0; u <= q; ++u) {
        const float* krow = qkv + u * stride + d + h * hd;
        scores[static_cast<std::size_t>(u)] =
            static_cast<float>(dot(qrow, krow, hd) * scale);
    }
    softmax_row(scores.data(), q + 1);

    float* orow = out + q * d + h * hd;
    for (std::int64_t j = 0; j < hd; ++j) orow[j] = 0.0f;
    for (std::int64_t u = 0; u <= q; ++u) {
        const float p = scores[static_cast<std::size_t>(u)];
        const float* vrow = qkv + u * stride + 2 * d + h * hd;
        for (std::int64_t j = 0; j < hd; ++j) orow[j] += p * vrow[j];
    }
}

}  // namespace

void causal_attention(const float* qkv, float* out, std::int64_t t, std::int64_t d,
                      std::int64_t heads) {
#pragma omp parallel
    {
        std::vector<float> scores;
#pragma omp for collapse(2) schedule(static)
        for (std::int64_t h = 0; h < heads; ++h)
            for (std::int64_t q = 0; q < t; ++q)
                attention_cell(qkv, out, d, heads, h, q, scores);
    }
}

namespace ref {

float dot(const float* a, const float* b, std::int64_t n) noexcept {
    float acc = 0.0f;
    for (std::int64_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void matmul_tn(const float* a, const float* w, const float* bias, float* c,
               std::int64_t m, std::int64_t n, std::int64_t k) {
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) {
            float v = dot(a + i * k, w + j * k, k);
            if (bias) v += bias[j];
            c[i * n + j] = v;
        }
}

void layer_norm(const float* x, const float* gamma, const float* beta, float* y,
                std::int64_t rows, std::int64_t cols, float eps) {
    for (std::int64_t r = 0; r < rows; ++r) {
        const float* row = x + r * cols;
        double sum = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) sum += row[j];
        const double mean = sum / static_cast<double>(cols);
        double var = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) {
            const double diff = row[j] - mean;
            var += diff * diff;
        }
        var /= static_cast<double>(cols);
        const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
        float* outr = y + r * cols;
        for (std::int64_t j = 0; j < cols; ++j)
            outr[j] = static_cast<float>((row[j] - mean) * inv) * gamma[j] + beta[j];
    }
}

void gelu(float* x, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) x[i] = gelu_tanh(x[i]);
}

void causal_attention(const float* qkv, float* out, std::int64_t t, std::int64_t d,
                      std::int64_t heads) {
    std::vector<float> scores;
    for (std::int64_t h = 0; h < heads; ++h)
        for (std::int64_t q = 0; q < t; ++q)
            attention_cell(qkv, out, d, heads, h, q, scores);
}

}  // namespace ref

}  // namespace picl::kernels
