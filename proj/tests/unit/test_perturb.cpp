#include <cmath>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "doctest.h"

#include "picl/common.hpp"
#include "picl/perturb.hpp"
#include "picl/rng.hpp"
#include "picl/tensor.hpp"

using namespace picl;

namespace {

tensor_map random_map(std::uint64_t seed, int n_tensors) {
    tensor_map m;
    rng_stream rng(seed);
    for (int i = 0; i < n_tensors; ++i) {
        const std::int64_t rows = 1 + static_cast<std::int64_t>(rng.next_below(8));
        const std::int64_t cols = 1 + static_cast<std::int64_t>(rng.next_below(64));
        tensor t({rows, cols});
        const std::uint64_t vseed = rng.next();
        for (std::size_t j = 0; j < t.data.size(); ++j)
            t.data[j] = static_cast<float>(gaussian_at(vseed, j));
        m.insert("tensor_" + std::to_string(i) + ".weight", std::move(t));
    }
    return m;
}

bool maps_bitwise_equal(const tensor_map& a, const tensor_map& b) {
    if (a.size() != b.size()) return false;
    auto it = b.begin();
    for (const auto& [name, t] : a) {
        if (it->first != name || it->second.shape != t.shape) return false;
        if (std::memcmp(it->second.data.data(), t.data.data(),
                        t.data.size() * sizeof(float)) != 0)
            return false;
        ++it;
    }
    return true;
}

}  // namespace

TEST_CASE("lambda 0 is a bitwise identity") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const tensor_map m = random_map(seed, 4);
        noise_config cfg;
        cfg.lambda = 0.0;
        cfg.master_seed = seed * 31 + 7;
        CHECK(maps_bitwise_equal(perturb(m, cfg), m));
    }
}

TEST_CASE("lambda 1 replaces parameters with scaled Gaussian noise") {
    tensor t({1000, 100});
    for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = 123.0f;
    tensor_map m;
    m.insert("big.weight", std::move(t));

    noise_config cfg;
    cfg.lambda = 1.0;
    cfg.sigma = 0.02;
    cfg.master_seed = 99;
    const tensor_map out = perturb(m, cfg);
    const std::vector<float>& d = out.at("big.weight").data;

    double mean = 0.0;
    for (float v : d) mean += v;
    mean /= static_cast<double>(d.size());
    double var = 0.0;
    for (float v : d) {
        const double diff = v - mean;
        var += diff * diff;
    }
    var /= static_cast<double>(d.size());
    CHECK(std::fabs(mean) < 0.001);
    CHECK(std::sqrt(var) == doctest::Approx(0.02).epsilon(0.02));
}

TEST_CASE("perturbation is bitwise identical across thread counts") {
    const tensor_map m = random_map(5, 6);
    noise_config cfg;
    cfg.lambda = 0.37;
    cfg.master_seed = 11;
    auto run = [&] { return perturb(m, cfg); };
#ifdef _OPENMP
    const int before = omp_get_max_threads();
    omp_set_num_threads(1);
    const tensor_map one = run();
    omp_set_num_threads(8);
    const tensor_map eight = run();
    omp_set_num_threads(before);
    CHECK(maps_bitwise_equal(one, eight));
#endif
    CHECK(maps_bitwise_equal(run(), ref::perturb(m, cfg)));
}

TEST_CASE("same config twice gives the same result; other seeds differ") {
    const tensor_map m = random_map(6, 3);
    noise_config cfg;
    cfg.lambda = 0.5;
    cfg.master_seed = 1;
    CHECK(maps_bitwise_equal(perturb(m, cfg), perturb(m, cfg)));
    noise_config other = cfg;
    other.master_seed = 2;
    CHECK_FALSE(maps_bitwise_equal(perturb(m, cfg), perturb(m, other)));
}

TEST_CASE("tensor noise streams are independent of the rest of the map") {
    // The same-named tensor must receive the same noise whether or not other
    // tensors exist alongside it.
    tensor_map small;
    tensor t({4, 4});
    for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = 1.0f;
    {
        tensor copy;
        copy.shape = t.shape;
        copy.data = t.data;
        small.insert("shared.weight", std::move(copy));
    }
    tensor_map big;
    {
        tensor copy;
        copy.shape = t.shape;
        copy.data = t.data;
        big.insert("shared.weight", std::move(copy));
    }
    big.insert("other.weight", tensor({8}));

    noise_config cfg;
    cfg.lambda = 0.9;
    cfg.master_seed = 77;
    const tensor_map a = perturb(small, cfg);
    const tensor_map b = perturb(big, cfg);
    CHECK(std::memcmp(a.at("shared.weight").data.data(), b.at("shared.weight").data.data(),
                      t.data.size() * sizeof(float)) == 0);
}

TEST_CASE("include filters perturb only matching tensors") {
    const tensor_map m = random_map(7, 4);
    noise_config cfg;
    cfg.lambda = 0.8;
    cfg.master_seed = 3;
    cfg.include = {"tensor_1", "tensor_3"};
    CHECK(cfg.selects("tensor_1.weight"));
    CHECK_FALSE(cfg.selects("tensor_0.weight"));

    const tensor_map out = perturb(m, cfg);
    CHECK(std::memcmp(out.at("tensor_0.weight").data.data(),
                      m.at("tensor_0.weight").data.data(),
                      m.at("tensor_0.weight").data.size() * sizeof(float)) == 0);
    CHECK(std::memcmp(out.at("tensor_1.weight").data.data(),
                      m.at("tensor_1.weight").data.data(),
                      m.at("tensor_1.weight").data.size() * sizeof(float)) != 0);

    // The filtered tensor's noise matches the unfiltered run's noise for it.
    noise_config full = cfg;
    full.include.clear();
    const tensor_map all = perturb(m, full);
    CHECK(std::memcmp(out.at("tensor_1.weight").data.data(),
                      all.at("tensor_1.weight").data.data(),
                      m.at("tensor_1.weight").data.size() * sizeof(float)) == 0);
}

TEST_CASE("interpolation combines source and noise at intermediate lambda") {
    tensor t({64});
    for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = 2.0f;
    tensor_map m;
    m.insert("w", std::move(t));

    noise_config cfg;
    cfg.lambda = 0.25;
    cfg.sigma = 0.02;
    cfg.master_seed = 13;
    const tensor_map out = perturb(m, cfg);

    const std::uint64_t tseed = derive_tensor_seed(cfg.master_seed, "w");
    for (std::size_t i = 0; i < 64; ++i) {
        const float want = static_cast<float>(
            0.75 * 2.0 + 0.25 * (0.02 * gaussian_at(tseed, i)));
        CHECK(out.at("w").data[i] == want);
    }
}

TEST_CASE("noise_config validation") {
    noise_config cfg;
    cfg.lambda = -0.1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.lambda = 1.1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.lambda = 0.5;
    cfg.sigma = 0.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.sigma = 0.02;
    CHECK_NOTHROW(cfg.validate());
}
