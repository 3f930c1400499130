#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tvkl/metrics.hpp"
#include "tvkl/phantoms.hpp"

using tvkl::ImageGrid;

TEST_CASE("snr: constant estimate gives 0 dB, scaling follows the log law") {
    ImageGrid truth = oracle::random_image(8, 8, 1, 0.0, 1.0);
    ImageGrid flat(8, 8, truth.mean());
    CHECK(tvkl::snr(flat, truth) == doctest::Approx(0.0).epsilon(1e-10));

    ImageGrid noisy(8, 8), noisier(8, 8);
    const ImageGrid noise = oracle::random_image(8, 8, 2, -0.1, 0.1);
    for (std::size_t k = 0; k < 64; ++k) {
        noisy[k] = truth[k] + noise[k];
        noisier[k] = truth[k] + 10.0 * noise[k];
    }
    CHECK(tvkl::snr(noisy, truth) - tvkl::snr(noisier, truth) == doctest::Approx(20.0));

    CHECK(std::isinf(tvkl::snr(truth, truth)));
}

TEST_CASE("snr: hand-computed 2x2 case") {
    ImageGrid truth(2, 2, std::vector<double>{0, 1, 0, 1});
    ImageGrid est(2, 2, std::vector<double>{0, 1, 0, 0.5});
    CHECK(tvkl::snr(est, truth) == doctest::Approx(10.0 * std::log10(1.0 / 0.25)));
    CHECK(tvkl::snr(est, truth) == doctest::Approx(6.0206).epsilon(1e-4));
}

TEST_CASE("snr strictly decreases as independent noise grows") {
    const ImageGrid truth = tvkl::shepp_logan_phantom(32, 32);
    const ImageGrid noise = oracle::random_image(32, 32, 3, -1.0, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double amp : {0.001, 0.01, 0.1, 0.5}) {
        ImageGrid est(32, 32);
        for (std::size_t k = 0; k < est.size(); ++k) est[k] = truth[k] + amp * noise[k];
        const double s = tvkl::snr(est, truth);
        CHECK(s < prev);
        prev = s;
    }
}

TEST_CASE("ssim: identity, inversion, tiny perturbation, symmetry") {
    const ImageGrid img = tvkl::shepp_logan_phantom(32, 32);
    CHECK(tvkl::ssim(img, img) == doctest::Approx(1.0));

    // inverted binary image has strongly negative structure terms
    ImageGrid binary(32, 32);
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 32; ++j) binary(i, j) = ((i / 8 + j / 8) % 2) ? 1.0 : 0.0;
    ImageGrid inverted(32, 32);
    for (std::size_t k = 0; k < binary.size(); ++k) inverted[k] = 1.0 - binary[k];
    CHECK(tvkl::ssim(inverted, binary) < 0.2);

    // constant against constant-plus-tiny-noise stays close to 1
    ImageGrid c(16, 16, 0.5);
    ImageGrid c2 = c;
    const ImageGrid noise = oracle::random_image(16, 16, 4, -1e-4, 1e-4);
    for (std::size_t k = 0; k < c2.size(); ++k) c2[k] += noise[k];
    CHECK(tvkl::ssim(c2, c) > 0.99);

    const ImageGrid a = oracle::random_image(16, 16, 5, 0.0, 1.0);
    const ImageGrid b = oracle::random_image(16, 16, 6, 0.0, 1.0);
    CHECK(std::fabs(tvkl::ssim(a, b) - tvkl::ssim(b, a)) <= 1e-12);

    CHECK_THROWS_AS(tvkl::ssim(ImageGrid(8, 8, 0.1), ImageGrid(8, 8, 0.2)),
                    std::invalid_argument);
}

TEST_CASE("ssim of an affine copy against itself is exactly 1") {
    const ImageGrid base = tvkl::cells_phantom(24, 24);
    ImageGrid affine(24, 24);
    for (std::size_t k = 0; k < base.size(); ++k) affine[k] = 0.37 * base[k] + 0.11;
    CHECK(tvkl::ssim(affine, affine) == doctest::Approx(1.0));
}
