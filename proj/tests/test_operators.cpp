#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "tvkl/operators.hpp"

using tvkl::BlurOperator;
using tvkl::ImageGrid;

TEST_CASE("gaussian kernel: degenerate and limiting cases") {
    const auto k1 = tvkl::make_gaussian_kernel(1, 1.0);
    CHECK(k1.taps(0, 0) == doctest::Approx(1.0));

    const auto flat = tvkl::make_gaussian_kernel(3, 1e6);
    for (std::size_t i = 0; i < flat.taps.size(); ++i)
        CHECK(flat.taps[i] == doctest::Approx(1.0 / 9.0).epsilon(1e-9));

    // center tap of the band=5, sigma=1 kernel, from scalar evaluation of the
    // bivariate Gaussian on the 5x5 offset grid followed by normalization
    const auto k5 = tvkl::make_gaussian_kernel(5, 1.0);
    double sum = 0.0;
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j) sum += std::exp(-(i * i + j * j) / 2.0);
    CHECK(k5.taps(2, 2) == doctest::Approx(1.0 / sum).epsilon(1e-12));
    CHECK(k5.taps(2, 2) == doctest::Approx(0.16210).epsilon(1e-4));

    CHECK_THROWS_AS(tvkl::make_gaussian_kernel(4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(tvkl::make_gaussian_kernel(5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(tvkl::make_gaussian_kernel(5, -1.0), std::invalid_argument);
}

TEST_CASE("kernel taps are nonnegative, unit sum, and 180-degree symmetric") {
    for (int band : {1, 3, 5, 9}) {
        const auto k = tvkl::make_gaussian_kernel(band, 0.7 + band * 0.3);
        double sum = 0.0;
        for (std::size_t i = 0; i < k.taps.size(); ++i) {
            CHECK(k.taps[i] >= 0.0);
            sum += k.taps[i];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
        const std::size_t b = std::size_t(band);
        for (std::size_t i = 0; i < b; ++i)
            for (std::size_t j = 0; j < b; ++j)
                CHECK(k.taps(i, j) == doctest::Approx(k.taps(b - 1 - i, b - 1 - j)));
    }
}

TEST_CASE("blur fixes constants and reproduces the wrapped impulse response") {
    const auto k = tvkl::make_gaussian_kernel(5, 1.0);
    ImageGrid constant(8, 8, 3.25);
    const ImageGrid blurred = tvkl::apply_blur(constant, k);
    for (std::size_t i = 0; i < blurred.size(); ++i)
        CHECK(blurred[i] == doctest::Approx(3.25).epsilon(1e-12));

    ImageGrid delta(8, 8, 0.0);
    delta(1, 1) = 1.0; // near the corner, so the response wraps
    const ImageGrid resp = tvkl::apply_blur(delta, k);
    for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) {
            const std::size_t i = std::size_t((1 + a + 8) % 8);
            const std::size_t j = std::size_t((1 + b + 8) % 8);
            CHECK(resp(i, j) ==
                  doctest::Approx(k.taps(std::size_t(a + 2), std::size_t(b + 2))).epsilon(1e-10));
        }

    // adjoint impulse response is the flipped kernel (same here by symmetry,
    // so check against a deliberately asymmetric stencil instead)
    tvkl::BlurKernel asym;
    asym.band = 3;
    asym.sigma = 1.0;
    asym.taps = ImageGrid(3, 3, std::vector<double>{0.5, 0.1, 0.0, 0.2, 0.1, 0.0, 0.1, 0.0, 0.0});
    ImageGrid d2(6, 6, 0.0);
    d2(3, 3) = 1.0;
    const ImageGrid fwd = tvkl::apply_blur(d2, asym);
    const ImageGrid adj = tvkl::apply_blur_adjoint(d2, asym);
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            CHECK(adj(std::size_t(3 + a), std::size_t(3 + b)) ==
                  doctest::Approx(fwd(std::size_t(3 - a), std::size_t(3 - b))).epsilon(1e-10));
}

TEST_CASE("blur equals the dense matrix built from impulses") {
    const auto k = tvkl::make_gaussian_kernel(5, 1.2);
    const BlurOperator H(8, 8, k);
    const auto M = oracle::dense_matrix(H);
    const ImageGrid x = oracle::random_image(8, 8, 17);
    const ImageGrid y = H.apply(x);
    for (std::size_t i = 0; i < 64; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 64; ++j) acc += M[i][j] * x[j];
        CHECK(y[i] == doctest::Approx(acc).epsilon(1e-10));
    }
}

TEST_CASE("blur via fft equals dense multiplication on every shape up to 12x12") {
    const auto k = tvkl::make_gaussian_kernel(5, 0.9);
    for (std::size_t rows = 5; rows <= 12; ++rows) {
        for (std::size_t cols = 5; cols <= 12; ++cols) {
            const BlurOperator H(rows, cols, k);
            const auto M = oracle::dense_matrix(H);
            const ImageGrid x = oracle::random_image(rows, cols, rows * 100 + cols);
            const ImageGrid y = H.apply(x);
            for (std::size_t i = 0; i < y.size(); ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < x.size(); ++j) acc += M[i][j] * x[j];
                CHECK(std::fabs(y[i] - acc) <= 1e-10);
            }
        }
    }
}

TEST_CASE("blur adjoint satisfies the inner-product identity") {
    const auto k = tvkl::make_gaussian_kernel(5, 1.0);
    const BlurOperator H(8, 8, k);
    for (int trial = 0; trial < 100; ++trial) {
        const ImageGrid x = oracle::random_image(8, 8, 1000 + trial);
        const ImageGrid r = oracle::random_image(8, 8, 2000 + trial);
        const ImageGrid hx = H.apply(x);
        const ImageGrid htr = H.apply_adjoint(r);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < 64; ++i) {
            lhs += hx[i] * r[i];
            rhs += x[i] * htr[i];
        }
        CHECK(std::fabs(lhs - rhs) <= 1e-8 * x.norm() * r.norm());
    }
    // symmetric kernel: adjoint equals forward
    const ImageGrid z = oracle::random_image(8, 8, 3000);
    const ImageGrid a = H.apply(z), b = H.apply_adjoint(z);
    for (std::size_t i = 0; i < 64; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
}

TEST_CASE("gradient: constants vanish, adjoint identity, dense assembly") {
    ImageGrid constant(6, 7, 2.5);
    const auto g = tvkl::apply_gradient(constant);
    for (std::size_t i = 0; i < g.dh.size(); ++i) {
        CHECK(g.dh[i] == 0.0);
        CHECK(g.dv[i] == 0.0);
    }

    for (int trial = 0; trial < 100; ++trial) {
        const ImageGrid x = oracle::random_image(6, 7, 40 + trial);
        tvkl::GradientField t{oracle::random_image(6, 7, 140 + trial),
                              oracle::random_image(6, 7, 240 + trial)};
        const auto dx = tvkl::apply_gradient(x);
        const ImageGrid dtt = tvkl::apply_gradient_adjoint(t);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            lhs += dx.dh[i] * t.dh[i] + dx.dv[i] * t.dv[i];
            rhs += x[i] * dtt[i];
        }
        CHECK(std::fabs(lhs - rhs) <= 1e-10 * (1.0 + x.norm()));
    }

    // D^T D on a 4x4 equals the dense product with explicitly assembled D
    const std::size_t n1 = 4, n2 = 4, n = n1 * n2;
    Eigen::MatrixXd D(2 * n, n);
    D.setZero();
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            const std::size_t p = i * n2 + j;
            D(long(p), long(i * n2 + (j + 1) % n2)) += 1.0;
            D(long(p), long(p)) -= 1.0;
            D(long(n + p), long(((i + 1) % n1) * n2 + j)) += 1.0;
            D(long(n + p), long(p)) -= 1.0;
        }
    const ImageGrid x = oracle::random_image(n1, n2, 77);
    Eigen::VectorXd xv(n);
    for (std::size_t i = 0; i < n; ++i) xv[long(i)] = x[i];
    const Eigen::VectorXd want = D.transpose() * (D * xv);
    const auto dx = tvkl::apply_gradient(x);
    const ImageGrid got = tvkl::apply_gradient_adjoint(dx);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(got[i] - want[long(i)]) <= 1e-12);
}

TEST_CASE("operator_norm_sq: identity, gradient spectrum, dense SVD oracle") {
    // identity alone
    auto ident = [](const std::vector<double>& x, std::vector<double>& out) { out = x; };
    CHECK(tvkl::operator_norm_sq(ident, 64) == doctest::Approx(1.01).epsilon(1e-4));

    // D^T D on a periodic grid: eigenvalues 4 sin^2(pi k/n1) + 4 sin^2(pi l/n2)
    const std::size_t n1 = 8, n2 = 8;
    std::vector<double> gh(n1 * n2), gv(n1 * n2);
    auto lap = [&](const std::vector<double>& x, std::vector<double>& out) {
        tvkl::grad::forward(x.data(), gh.data(), gv.data(), n1, n2);
        tvkl::grad::adjoint(gh.data(), gv.data(), out.data(), n1, n2);
    };
    double expect = 0.0;
    for (std::size_t k = 0; k < n1; ++k)
        for (std::size_t l = 0; l < n2; ++l) {
            const double s = 4.0 * std::pow(std::sin(M_PI * double(k) / n1), 2) +
                             4.0 * std::pow(std::sin(M_PI * double(l) / n2), 2);
            expect = std::max(expect, s);
        }
    CHECK(expect == doctest::Approx(8.0));
    CHECK(tvkl::operator_norm_sq(lap, n1 * n2) == doctest::Approx(8.08).epsilon(1e-3));

    // small dense operator vs Eigen SVD
    tvkl::Philox4x32 rng(99, tvkl::make_stream(tvkl::StreamTag::test, 9));
    Eigen::MatrixXd A(7, 5);
    for (long i = 0; i < 7; ++i)
        for (long j = 0; j < 5; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
    auto normal = [&](const std::vector<double>& x, std::vector<double>& out) {
        Eigen::VectorXd xv(5);
        for (int i = 0; i < 5; ++i) xv[i] = x[std::size_t(i)];
        const Eigen::VectorXd r = A.transpose() * (A * xv);
        for (int i = 0; i < 5; ++i) out[std::size_t(i)] = r[i];
    };
    const double smax = A.jacobiSvd().singularValues()[0];
    CHECK(tvkl::operator_norm_sq(normal, 5) ==
          doctest::Approx(1.01 * smax * smax).epsilon(0.01));
}

TEST_CASE("norm estimate majorizes the Rayleigh quotient of random vectors") {
    const auto k = tvkl::make_gaussian_kernel(5, 1.0);
    const auto H = std::make_shared<BlurOperator>(12, 12, k);
    const double bound = tvkl::m1_operator_norm_sq(*H);
    const std::size_t n = 144;
    std::vector<double> gh(n), gv(n), lap(n), hx(n), hth(n);
    for (int trial = 0; trial < 100; ++trial) {
        const ImageGrid v = oracle::random_image(12, 12, 500 + trial);
        tvkl::grad::forward(v.data(), gh.data(), gv.data(), 12, 12);
        H->apply(v.data(), hx.data());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num += gh[i] * gh[i] + gv[i] * gv[i] + hx[i] * hx[i] + v[i] * v[i];
            den += v[i] * v[i];
        }
        CHECK(bound >= num / den);
    }
}

TEST_CASE("shape mismatches are rejected") {
    const auto k = tvkl::make_gaussian_kernel(3, 1.0);
    const BlurOperator H(8, 8, k);
    CHECK_THROWS_AS(H.apply(ImageGrid(4, 4)), std::invalid_argument);
    CHECK_THROWS_AS(H.apply_adjoint(ImageGrid(9, 8)), std::invalid_argument);
}
