#include <cmath>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "doctest.h"

#include "picl/kernels.hpp"
#include "picl/rng.hpp"

using namespace picl;
namespace k = picl::kernels;

namespace {

std::vector<float> randf(std::size_t n, std::uint64_t seed) {
    std::vector<float> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(gaussian_at(seed, i));
    return v;
}

bool bitwise(const std::vector<float>& a, const std::vector<float>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

template <typename F>
std::vector<float> with_threads(int n, F&& run) {
#ifdef _OPENMP
    const int before = omp_get_max_threads();
    omp_set_num_threads(n);
    std::vector<float> out = run();
    omp_set_num_threads(before);
    return out;
#else
    (void)n;
    return run();
#endif
}

}  // namespace

TEST_CASE("dot agrees with a double-precision reference") {
    for (std::int64_t n : {1, 7, 8, 9, 64, 1000}) {
        const auto a = randf(static_cast<std::size_t>(n), 1);
        const auto b = randf(static_cast<std::size_t>(n), 2);
        double want = 0.0;
        for (std::int64_t i = 0; i < n; ++i)
            want += static_cast<double>(a[static_cast<std::size_t>(i)]) *
                    static_cast<double>(b[static_cast<std::size_t>(i)]);
        CHECK(k::dot(a.data(), b.data(), n) ==
              doctest::Approx(want).epsilon(1e-5));
        CHECK(k::ref::dot(a.data(), b.data(), n) ==
              doctest::Approx(want).epsilon(1e-5));
    }
}

TEST_CASE("matmul_tn matches the serial reference within float rounding") {
    const std::int64_t m = 13, n = 17, kk = 96;
    const auto a = randf(static_cast<std::size_t>(m * kk), 3);
    const auto w = randf(static_cast<std::size_t>(n * kk), 4);
    const auto bias = randf(static_cast<std::size_t>(n), 5);
    std::vector<float> c(static_cast<std::size_t>(m * n));
    std::vector<float> cref(c.size());
    k::matmul_tn(a.data(), w.data(), bias.data(), c.data(), m, n, kk);
    k::ref::matmul_tn(a.data(), w.data(), bias.data(), cref.data(), m, n, kk);
    for (std::size_t i = 0; i < c.size(); ++i)
        CHECK(c[i] == doctest::Approx(cref[i]).epsilon(1e-4));

    // Null bias means no bias.
    std::vector<float> c0(c.size());
    k::matmul_tn(a.data(), w.data(), nullptr, c0.data(), m, n, kk);
    CHECK(c0[0] == doctest::Approx(c[0] - bias[0]).epsilon(1e-5));
}

TEST_CASE("matmul_tn is bitwise identical under 1 and 8 threads") {
    const std::int64_t m = 32, n = 48, kk = 64;
    const auto a = randf(static_cast<std::size_t>(m * kk), 6);
    const auto w = randf(static_cast<std::size_t>(n * kk), 7);
    auto run = [&] {
        std::vector<float> c(static_cast<std::size_t>(m * n));
        k::matmul_tn(a.data(), w.data(), nullptr, c.data(), m, n, kk);
        return c;
    };
    CHECK(bitwise(with_threads(1, run), with_threads(8, run)));
}

TEST_CASE("layer_norm normalizes rows and matches the reference bitwise") {
    const std::int64_t rows = 9, cols = 64;
    const auto x = randf(static_cast<std::size_t>(rows * cols), 8);
    std::vector<float> ones(static_cast<std::size_t>(cols), 1.0f);
    std::vector<float> zeros(static_cast<std::size_t>(cols), 0.0f);
    std::vector<float> y(x.size()), yref(x.size());
    k::layer_norm(x.data(), ones.data(), zeros.data(), y.data(), rows, cols, 1e-5f);
    k::ref::layer_norm(x.data(), ones.data(), zeros.data(), yref.data(), rows, cols, 1e-5f);
    CHECK(bitwise(y, yref));

    for (std::int64_t r = 0; r < rows; ++r) {
        double mean = 0.0, var = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) mean += y[static_cast<std::size_t>(r * cols + j)];
        mean /= static_cast<double>(cols);
        for (std::int64_t j = 0; j < cols; ++j) {
            const double d = y[static_cast<std::size_t>(r * cols + j)] - mean;
            var += d * d;
        }
        var /= static_cast<double>(cols);
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-5));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }

    auto run = [&] {
        std::vector<float> out(x.size());
        k::layer_norm(x.data(), ones.data(), zeros.data(), out.data(), rows, cols, 1e-5f);
        return out;
    };
    CHECK(bitwise(with_threads(1, run), with_threads(8, run)));
}

TEST_CASE("gelu matches the tanh approximation and the reference") {
    std::vector<float> x = {-3.0f, -1.0f, -0.5f, 0.0f, 0.5f, 1.0f, 3.0f};
    std::vector<float> xref = x;
    k::gelu(x.data(), static_cast<std::int64_t>(x.size()));
    k::ref::gelu(xref.data(), static_cast<std::int64_t>(xref.size()));
    CHECK(bitwise(x, xref));
    CHECK(x[3] == 0.0f);
    // Independent recomputation of the approximation.
    const double one = 0.5 * 1.0 * (1.0 + std::tanh(0.7978845608028654 * (1.0 + 0.044715)));
    CHECK(x[5] == doctest::Approx(one).epsilon(1e-6));
}

TEST_CASE("softmax_row produces a distribution and keeps the argmax") {
    auto x = randf(33, 9);
    const auto arg = static_cast<std::size_t>(
        std::max_element(x.begin(), x.end()) - x.begin());
    k::softmax_row(x.data(), static_cast<std::int64_t>(x.size()));
    double sum = 0.0;
    for (float v : x) {
        CHECK(v > 0.0f);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin()) == arg);
}

TEST_CASE("causal_attention matches the reference bitwise and respects causality") {
    const std::int64_t t = 11, d = 32, heads = 4;
    auto qkv = randf(static_cast<std::size_t>(t * 3 * d), 10);
    std::vector<float> out(static_cast<std::size_t>(t * d));
    std::vector<float> outref(out.size());
    k::causal_attention(qkv.data(), out.data(), t, d, heads);
    k::ref::causal_attention(qkv.data(), outref.data(), t, d, heads);
    CHECK(bitwise(out, outref));

    // Changing the last token must leave all earlier positions untouched.
    auto modified = qkv;
    for (std::int64_t j = 0; j < 3 * d; ++j)
        modified[static_cast<std::size_t>((t - 1) * 3 * d + j)] += 1.0f;
    std::vector<float> out2(out.size());
    k::causal_attention(modified.data(), out2.data(), t, d, heads);
    CHECK(std::memcmp(out.data(), out2.data(),
                      static_cast<std::size_t>((t - 1) * d) * sizeof(float)) == 0);
    CHECK_FALSE(bitwise(out, out2));

    auto run = [&] {
        std::vector<float> o(out.size());
        k::causal_attention(qkv.data(), o.data(), t, d, heads);
        return o;
    };
    CHECK(bitwise(with_threads(1, run), with_threads(8, run)));
}

TEST_CASE("attention at position 0 returns the value row") {
    const std::int64_t t = 1, d = 8, heads = 2;
    auto qkv = randf(static_cast<std::size_t>(t * 3 * d), 11);
    std::vector<float> out(static_cast<std::size_t>(t * d));
    k::causal_attention(qkv.data(), out.data(), t, d, heads);
    for (std::int64_t j = 0; j < d; ++j)
        CHECK(out[static_cast<std::size_t>(j)] ==
              doctest::Approx(qkv[static_cast<std::size_t>(2 * d + j)]).epsilon(1e-6));
}
