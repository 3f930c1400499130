#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tvkl/poisson.hpp"
#include "tvkl/whiteness.hpp"

using tvkl::ImageGrid;

TEST_CASE("forward_lambda: identity background, beer-lambert analytics") {
    auto ident = std::make_shared<tvkl::IdentityOperator>(4, 4);
    const auto model = tvkl::make_identity_model(ident, 0.002);
    const ImageGrid zero(4, 4, 0.0);
    const ImageGrid lam = tvkl::forward_lambda(zero, model);
    for (std::size_t k = 0; k < lam.size(); ++k) CHECK(lam[k] == doctest::Approx(0.002));

    const auto ct = tvkl::make_beer_lambert_model(ident, 10.0);
    const ImageGrid lam2 = tvkl::forward_lambda(zero, ct);
    for (std::size_t k = 0; k < lam2.size(); ++k) CHECK(lam2[k] == doctest::Approx(10.0));

    const auto ct2 = tvkl::make_beer_lambert_model(ident, 1000.0);
    ImageGrid xln2(4, 4, std::log(2.0));
    const ImageGrid lam3 = tvkl::forward_lambda(xln2, ct2);
    for (std::size_t k = 0; k < lam3.size(); ++k)
        CHECK(lam3[k] == doctest::Approx(500.0).epsilon(1e-12));

    ImageGrid neg(4, 4, -0.5);
    CHECK_THROWS_AS(tvkl::forward_lambda(neg, model), std::invalid_argument);
}

TEST_CASE("beer-lambert model rejects nonzero background") {
    auto ident = std::make_shared<tvkl::IdentityOperator>(2, 2);
    tvkl::ForwardModel m;
    m.op = ident;
    m.g = tvkl::Nonlinearity::beer_lambert;
    m.i0 = 10.0;
    m.background.assign(4, 0.1);
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("sample_poisson: determinism, degenerate mean, moment bands") {
    ImageGrid tiny(100, 100, 1e-12);
    const ImageGrid s0 = tvkl::sample_poisson(tiny, 5);
    double total = 0.0;
    for (std::size_t k = 0; k < s0.size(); ++k) total += s0[k];
    CHECK(total / double(s0.size()) < 1e-5);

    ImageGrid lam4(1000, 1000, 4.0);
    const ImageGrid a = tvkl::sample_poisson(lam4, 99);
    const ImageGrid b = tvkl::sample_poisson(lam4, 99);
    double mean = 0.0;
    bool identical = true;
    for (std::size_t k = 0; k < a.size(); ++k) {
        identical = identical && a[k] == b[k];
        mean += a[k];
    }
    CHECK(identical);
    mean /= double(a.size());
    double var = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) var += (a[k] - mean) * (a[k] - mean);
    var /= double(a.size() - 1);
    CHECK(mean > 3.99);
    CHECK(mean < 4.01);
    CHECK(var > 3.96);
    CHECK(var < 4.04);

    ImageGrid bad(2, 2, 0.0);
    CHECK_THROWS_AS(tvkl::sample_poisson(bad, 1), std::invalid_argument);
}

TEST_CASE("transformed-rejection branch has the right moments too") {
    ImageGrid lam(500, 500, 47.5);
    const ImageGrid a = tvkl::sample_poisson(lam, 123);
    double mean = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) mean += a[k];
    mean /= double(a.size());
    double var = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) var += (a[k] - mean) * (a[k] - mean);
    var /= double(a.size() - 1);
    CHECK(mean == doctest::Approx(47.5).epsilon(0.002));
    CHECK(var == doctest::Approx(47.5).epsilon(0.02));
}

TEST_CASE("kl divergence: identity case, scalar values, validation") {
    ImageGrid y(2, 2, std::vector<double>{1, 2, 3, 4});
    CHECK(tvkl::kl_divergence(y, y) == 0.0);

    ImageGrid lam(1, 1, 2.0), obs(1, 1, 1.0);
    CHECK(tvkl::kl_divergence(lam, obs) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-12));

    ImageGrid lam1(1, 1, 1.0), zero(1, 1, 0.0);
    CHECK(tvkl::kl_divergence(lam1, zero) == doctest::Approx(1.0));

    ImageGrid bad(1, 1, 0.0);
    CHECK_THROWS_AS(tvkl::kl_divergence(bad, zero), std::invalid_argument);
}

TEST_CASE("kl divergence is nonnegative, zero only at equality, convex in lambda") {
    tvkl::Philox4x32 rng(5, tvkl::make_stream(tvkl::StreamTag::test, 2));
    for (int trial = 0; trial < 50; ++trial) {
        ImageGrid y(3, 3), lam(3, 3);
        for (std::size_t k = 0; k < 9; ++k) {
            y[k] = std::floor(rng.uniform(0.0, 9.0));
            lam[k] = rng.uniform(0.05, 8.0);
        }
        CHECK(tvkl::kl_divergence(lam, y) >= 0.0);
        bool equal = true;
        for (std::size_t k = 0; k < 9; ++k) equal = equal && lam[k] == y[k];
        if (!equal) CHECK(tvkl::kl_divergence(lam, y) > 0.0);

        // convexity along a random segment
        ImageGrid lam2(3, 3);
        for (std::size_t k = 0; k < 9; ++k) lam2[k] = rng.uniform(0.05, 8.0);
        const double alpha = rng.uniform();
        ImageGrid mix(3, 3);
        for (std::size_t k = 0; k < 9; ++k) mix[k] = alpha * lam[k] + (1 - alpha) * lam2[k];
        CHECK(tvkl::kl_divergence(mix, y) <= alpha * tvkl::kl_divergence(lam, y) +
                                                 (1 - alpha) * tvkl::kl_divergence(lam2, y) +
                                                 1e-10);
    }
}

TEST_CASE("standardize: exact values, inverse map, degenerate error") {
    ImageGrid y(1, 2, std::vector<double>{6.0, 4.0});
    ImageGrid lam(1, 2, std::vector<double>{4.0, 4.0});
    const auto z = tvkl::standardize(y, lam);
    CHECK(z.z(0, 0) == doctest::Approx(1.0));
    CHECK(z.z(0, 1) == 0.0);

    // bijectivity: y = sqrt(lambda) z + lambda
    tvkl::Philox4x32 rng(8, tvkl::make_stream(tvkl::StreamTag::test, 3));
    ImageGrid yy(5, 5), ll(5, 5);
    for (std::size_t k = 0; k < 25; ++k) {
        yy[k] = std::floor(rng.uniform(0.0, 30.0));
        ll[k] = rng.uniform(0.1, 20.0);
    }
    const auto zz = tvkl::standardize(yy, ll);
    for (std::size_t k = 0; k < 25; ++k)
        CHECK(std::sqrt(ll[k]) * zz.z[k] + ll[k] == doctest::Approx(yy[k]).epsilon(1e-12));

    ImageGrid lbad(1, 2, std::vector<double>{4.0, 0.0});
    try {
        tvkl::standardize(y, lbad);
        FAIL("expected degenerate_lambda_error");
    } catch (const tvkl::degenerate_lambda_error& e) {
        CHECK(e.row() == 0);
        CHECK(e.col() == 1);
    }
}

TEST_CASE("standardized residual of a true sample has unit moments") {
    ImageGrid lam(256, 256, 10.0);
    const ImageGrid y = tvkl::sample_poisson(lam, 31);
    const auto z = tvkl::standardize(y, lam);
    double mean = 0.0;
    for (std::size_t k = 0; k < z.z.size(); ++k) mean += z.z[k];
    mean /= double(z.z.size());
    double var = 0.0;
    for (std::size_t k = 0; k < z.z.size(); ++k) var += (z.z[k] - mean) * (z.z[k] - mean);
    var /= double(z.z.size() - 1);
    CHECK(mean > -0.02);
    CHECK(mean < 0.02);
    CHECK(var > 0.97);
    CHECK(var < 1.03);
}

TEST_CASE("mc_expected_kl: single sample identity, gaussian limit, low-count bias") {
    ImageGrid lam(4, 4, 3.7);
    {
        // n_samples = 1 equals the divergence at that one draw
        const double one = tvkl::mc_expected_kl(lam, 1, 77);
        tvkl::Philox4x32 rng(77, tvkl::make_stream(tvkl::StreamTag::mc_discrepancy));
        ImageGrid y(4, 4);
        for (std::size_t k = 0; k < 16; ++k) y[k] = double(tvkl::poisson_draw(rng, 3.7));
        CHECK(one == doctest::Approx(tvkl::kl_divergence(lam, y)).epsilon(1e-12));
    }

    // high-count limit: E[KL] -> m/2
    ImageGrid big(32, 32, 1e4);
    const double est = tvkl::mc_expected_kl(big, 200, 5);
    CHECK(est == doctest::Approx(512.0).epsilon(0.02));

    // low-count regime sits well below m/2
    ImageGrid small(100, 100, 0.1);
    const double low = tvkl::mc_expected_kl(small, 50, 6);
    CHECK(low < 0.9 * 5000.0);
}
