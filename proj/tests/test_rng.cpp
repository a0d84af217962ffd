#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "ddcl/rng.hpp"
#include "ddcl/stats.hpp"

using namespace ddcl;

TEST_CASE("noise is deterministic and in range") {
    const rng::NoiseKey key{0, 0, 0, 0};
    const double v1 = rng::noise_at(key, 1.0);
    const double v2 = rng::noise_at(key, 1.0);
    CHECK(v1 == v2);
    CHECK(v1 >= -0.5);
    CHECK(v1 < 0.5);

    for (std::uint32_t i = 0; i < 10'000; ++i) {
        const rng::NoiseKey k{42, 1, i, i * 7};
        const double v = rng::noise_at(k, 2.5);
        CHECK(v >= -1.25);
        CHECK(v < 1.25);
    }
}

TEST_CASE("scaling is exact: noise_at(k, d) == d * noise_at(k, 1)") {
    for (std::uint32_t i = 0; i < 1000; ++i) {
        const rng::NoiseKey key{7, 3, i, 0};
        const double unit = rng::noise_at(key, 1.0);
        for (double delta : {0.1, 0.5, 2.0, 15.0, 1e-6, 1e6}) {
            CHECK(rng::noise_at(key, delta) == delta * unit);
        }
    }
}

TEST_CASE("delta validation") {
    const rng::NoiseKey key{};
    CHECK_THROWS_AS(rng::noise_at(key, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rng::noise_at(key, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(rng::noise_at(key, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(rng::noise_at(key, INFINITY), std::invalid_argument);
}

TEST_CASE("empirical mean of 10^6 samples is within 3 sigma of 0") {
    const std::size_t n = 1'000'000;
    const double delta = 1.0;
    double sum = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        sum += rng::noise_at({123, 0, 0, i}, delta);
    }
    const double mean = sum / static_cast<double>(n);
    // std of U(-1/2, 1/2) is 1/sqrt(12)
    CHECK(std::fabs(mean) <= 3.0 * delta / std::sqrt(12.0 * n));
}

TEST_CASE("chi-square uniformity over 64 bins, delta=2") {
    const std::size_t n = 1'000'000;
    std::vector<double> samples;
    samples.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        samples.push_back(rng::noise_at({99, 2, i, 5}, 2.0));
    }
    const auto report = stats::chi_square_uniform("rng_uniform", samples, -1.0, 1.0, 64);
    CHECK(report.pass);
    CHECK(report.p_value > 0.01);
}

TEST_CASE("values from keys differing in one field are uncorrelated") {
    const std::size_t n = 100'000;
    std::vector<double> a, b, c, d;
    for (std::uint32_t i = 0; i < n; ++i) {
        a.push_back(rng::noise_at({11, 0, i, 0}, 1.0));
        b.push_back(rng::noise_at({11, 0, i, 1}, 1.0));   // dim + 1
        c.push_back(rng::noise_at({11, 1, i, 0}, 1.0));   // edge + 1
        d.push_back(rng::noise_at({12, 0, i, 0}, 1.0));   // seed + 1
    }
    const double bound = 3.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(stats::pearson(a, b)) < bound);
    CHECK(std::fabs(stats::pearson(a, c)) < bound);
    CHECK(std::fabs(stats::pearson(a, d)) < bound);
}

TEST_CASE("golden values match the frozen file") {
    std::ifstream f(std::string(DDCL_SOURCE_DIR) + "/data/noise_golden.csv");
    REQUIRE(f.good());
    std::string line;
    REQUIRE(std::getline(f, line));  // header
    std::size_t rows = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() == 6);
        const rng::NoiseKey key{
            std::stoull(fields[0]),
            static_cast<std::uint32_t>(std::stoul(fields[1])),
            static_cast<std::uint32_t>(std::stoul(fields[2])),
            static_cast<std::uint32_t>(std::stoul(fields[3]))};
        CHECK(rng::noise_word(key) == std::stoull(fields[4], nullptr, 16));
        CHECK(rng::noise_at(key, 1.0) == std::strtod(fields[5].c_str(), nullptr));
        ++rows;
    }
    CHECK(rows == 100);
}

TEST_CASE("counter stream bounded draws stay in range") {
    rng::CounterStream s(7);
    for (int i = 0; i < 10'000; ++i) {
        CHECK(s.next_below(63) < 63);
        const double u = s.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}
