#include <doctest.h>

#include <complex>
#include <vector>

#include "oracles.hpp"
#include "tvkl/fft.hpp"
#include "tvkl/rng.hpp"

using tvkl::fft::cdouble;

namespace {

std::vector<cdouble> random_signal(std::size_t n, std::uint64_t seed) {
    tvkl::Philox4x32 rng(seed, tvkl::make_stream(tvkl::StreamTag::test, 1));
    std::vector<cdouble> x(n);
    for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    return x;
}

} // namespace

TEST_CASE("fft matches the direct DFT for power-of-two and general lengths") {
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 11u, 12u, 16u, 31u, 64u, 100u}) {
        auto x = random_signal(n, 42 + n);
        const auto expect = oracle::dft(x);
        tvkl::fft::Plan1D plan(n);
        plan.forward(x.data());
        double scale = 0.0;
        for (const auto& v : expect) scale = std::max(scale, std::abs(v));
        for (std::size_t k = 0; k < n; ++k)
            CHECK(std::abs(x[k] - expect[k]) <= 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("fft inverse round-trips") {
    for (std::size_t n : {4u, 9u, 30u, 128u}) {
        const auto x0 = random_signal(n, 7 * n);
        auto x = x0;
        tvkl::fft::Plan1D plan(n);
        plan.forward(x.data());
        plan.inverse(x.data());
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(x[k] - x0[k]) <= 1e-12);
    }
}

TEST_CASE("2-D fft equals row-column direct DFT (pow2 and general shapes)") {
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{16, 8}, {12, 9}, {8, 11}}) {
        auto x = random_signal(rows * cols, 99 * rows + cols);
        auto expect = x;
        for (std::size_t i = 0; i < rows; ++i) {
            std::vector<cdouble> row(expect.begin() + long(i * cols),
                                     expect.begin() + long((i + 1) * cols));
            row = oracle::dft(row);
            std::copy(row.begin(), row.end(), expect.begin() + long(i * cols));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            std::vector<cdouble> col(rows);
            for (std::size_t i = 0; i < rows; ++i) col[i] = expect[i * cols + j];
            col = oracle::dft(col);
            for (std::size_t i = 0; i < rows; ++i) expect[i * cols + j] = col[i];
        }
        tvkl::fft::Plan2D plan(rows, cols);
        plan.forward(x.data());
        for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(x[k] - expect[k]) <= 1e-9);

        plan.inverse(x.data());
        // back to the original signal
        auto orig = random_signal(rows * cols, 99 * rows + cols);
        for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(x[k] - orig[k]) <= 1e-11);
    }
}

TEST_CASE("parseval holds") {
    const std::size_t n = 48;
    auto x = random_signal(n, 1234);
    double time_energy = 0.0;
    for (const auto& v : x) time_energy += std::norm(v);
    tvkl::fft::Plan1D plan(n);
    plan.forward(x.data());
    double freq_energy = 0.0;
    for (const auto& v : x) freq_energy += std::norm(v);
    CHECK(freq_energy / double(n) == doctest::Approx(time_energy).epsilon(1e-12));
}
