#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ddcl/channel.hpp"
#include "ddcl/rng.hpp"

using namespace ddcl;

TEST_CASE("quantize with forced noise matches the hand-computed cases") {
    // z=0, eps=0.3: z'=0.3, floor(0.3/1) = 0
    CHECK(channel::detail::quantize_dim(0.0, 0.3, 1.0) == 0);
    // z=0, eps=-0.3: floor(-0.3) = -1
    CHECK(channel::detail::quantize_dim(0.0, -0.3, 1.0) == -1);
    // z=5, any eps in [-0.5, 0.5): m in {4, 5}
    for (double eps = -0.5; eps < 0.5; eps += 0.01) {
        const auto m = channel::detail::quantize_dim(5.0, eps, 1.0);
        CHECK(m >= 4);
        CHECK(m <= 5);
    }
}

TEST_CASE("reconstruct with forced noise matches the hand-computed cases") {
    // m=0, eps=0.3: (0+0.5)*1 - 0.3 = 0.2
    CHECK(channel::detail::reconstruct_dim(0, 0.3, 1.0) == doctest::Approx(0.2).epsilon(1e-15));
    // m=-1, eps=-0.3: (-1+0.5)*1 + 0.3 = -0.2
    CHECK(channel::detail::reconstruct_dim(-1, -0.3, 1.0) == doctest::Approx(-0.2).epsilon(1e-15));

    const channel::DiscreteMessage msg{{0}, 0.0, 1};
    const std::vector<double> eps{0.3};
    const std::vector<double> z{0.0};
    const auto rec = channel::detail::reconstruct_with_noise(msg, eps, 1.0, z);
    CHECK(rec.values[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(rec.error[0] == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("message carries both bit accountings") {
    const std::vector<double> eps{0.3, 0.3};
    const auto msg = channel::detail::quantize_with_noise({0.0, 1.4}, eps, 1.0);
    CHECK(msg.ints == std::vector<std::int32_t>{0, 1});
    CHECK(msg.ideal_bits == doctest::Approx(std::log2(3.0)).epsilon(1e-15));
    CHECK(msg.encoded_bits == 1 + 3);
}

TEST_CASE("round trip: z_hat = z + e with |e| <= delta/2") {
    for (double delta : {0.1, 0.5, 1.0, 15.0}) {
        for (std::uint32_t i = 0; i < 2000; ++i) {
            const rng::NoiseKey key{77, 0, i, 0};
            const channel::Signal z{-3.0 + 0.003 * i, 2.5, 0.0};
            const auto msg = channel::quantize(z, key, delta);
            const auto rec = channel::reconstruct(msg, key, delta, z);
            for (std::size_t k = 0; k < z.size(); ++k) {
                const double e = rec.values[k] - z[k];
                CHECK(std::fabs(e) <= delta / 2);
                CHECK(rec.error[k] == e);
            }
        }
    }
}

TEST_CASE("determinism: identical inputs give bit-identical outputs") {
    const channel::Signal z{1.7, -3.2, 100.25};
    const rng::NoiseKey key{5, 9, 1234, 0};
    const auto a = channel::channel_forward(z, key, 0.1);
    const auto b = channel::channel_forward(z, key, 0.1);
    CHECK(a.message.ints == b.message.ints);
    CHECK(a.reconstruction.values == b.reconstruction.values);

    const auto rec = channel::reconstruct(a.message, key, 0.1);
    CHECK(rec.values == a.reconstruction.values);
    CHECK(rec.error.empty());  // no z supplied, no error exposure
}

TEST_CASE("channel_forward stays within half a bin of z") {
    const channel::Signal z{0.0, 0.0, 0.0};
    for (std::uint32_t i = 0; i < 1000; ++i) {
        const auto result = channel::channel_forward(z, {3, 0, i, 0}, 0.5);
        for (double e : result.reconstruction.error) {
            CHECK(std::fabs(e) <= 0.25);
        }
    }
}

TEST_CASE("Monte Carlo: reconstruction is unbiased") {
    const channel::Signal z{1.7, -3.2};
    const double delta = 0.1;
    const std::size_t n = 100'000;
    std::vector<double> sums(z.size(), 0.0);
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto result = channel::channel_forward(z, {404, 0, i, 0}, delta);
        for (std::size_t k = 0; k < z.size(); ++k) {
            sums[k] += result.reconstruction.values[k];
        }
    }
    const double margin = 3.0 * delta / std::sqrt(12.0 * n);
    for (std::size_t k = 0; k < z.size(); ++k) {
        CHECK(std::fabs(sums[k] / n - z[k]) <= margin);
    }
}

TEST_CASE("Monte Carlo: magnitude law at z=10, delta=1") {
    // Floor binning puts m in {9, 10} with equal mass, so E|m| = 9.5 and
    // the bin centers satisfy E|m + 1/2| = 10 exactly.
    const std::size_t n = 100'000;
    double sum_raw = 0.0, sum_center = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto msg = channel::quantize({10.0}, {808, 0, i, 0}, 1.0);
        sum_raw += std::fabs(static_cast<double>(msg.ints[0]));
        sum_center += std::fabs(static_cast<double>(msg.ints[0]) + 0.5);
    }
    CHECK(sum_center / n == doctest::Approx(10.0).epsilon(0.01));
    CHECK(sum_raw / n == doctest::Approx(9.5).epsilon(0.01));
}

TEST_CASE("grad_passthrough is the identity") {
    const std::vector<double> g{1.0, 2.0};
    CHECK(channel::grad_passthrough(g) == g);
    const std::vector<double> zero{0.0};
    CHECK(channel::grad_passthrough(zero) == zero);
}

TEST_CASE("finite differences: d(z_hat)/dz = 1 within a bin") {
    const double h = 1e-5;
    const double delta = 1.0;
    int checked = 0;
    for (std::uint32_t i = 0; i < 200; ++i) {
        const rng::NoiseKey key{55, 0, i, 0};
        const double z = -4.0 + 0.04 * i;
        const auto a = channel::channel_forward({z}, key, delta);
        const auto b = channel::channel_forward({z + h}, key, delta);
        if (a.message.ints == b.message.ints) {  // same bin
            const double deriv =
                (b.reconstruction.values[0] - a.reconstruction.values[0]) / h;
            CHECK(std::fabs(deriv - 1.0) <= 1e-6);
            ++checked;
        }
    }
    CHECK(checked > 150);  // crossing a bin edge is rare at h=1e-5
}

TEST_CASE("input validation") {
    const rng::NoiseKey key{};
    CHECK_THROWS_AS(channel::quantize({1.0}, key, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(channel::quantize({1.0}, key, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(channel::quantize({std::nan("")}, key, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(channel::quantize({INFINITY}, key, 1.0), std::invalid_argument);
    // |m| past 2^31-1 must hard-error, not saturate
    CHECK_THROWS_AS(channel::quantize({3e9}, key, 1.0), std::overflow_error);
    CHECK_THROWS_AS(channel::quantize({-3e9}, key, 1.0), std::overflow_error);
    CHECK_NOTHROW(channel::quantize({2e9}, key, 1.0));
}

TEST_CASE("per-dim keys offset the base dim") {
    const rng::NoiseKey base{9, 1, 2, 10};
    const auto k0 = channel::key_for_dim(base, 0);
    const auto k3 = channel::key_for_dim(base, 3);
    CHECK(k0.dim == 10);
    CHECK(k3.dim == 13);
    CHECK(k0.seed == base.seed);
}
