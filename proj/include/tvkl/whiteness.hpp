#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tvkl/fft.hpp"
#include "tvkl/image.hpp"

namespace tvkl {

/// Normalized sample autocorrelation over all lags
/// (l, m) in [-(m1-1), m1-1] x [-(m2-1), m2-1], stored row-major with the
/// zero lag at the center. s(0,0) == 1 and s(l,m) == s(-l,-m) hold exactly.
struct AutocorrelationMap {
    std::size_t rows = 0; // 2*m1 - 1
    std::size_t cols = 0; // 2*m2 - 1
    std::vector<double> s;

    std::size_t m1() const noexcept { return (rows + 1) / 2; }
    std::size_t m2() const noexcept { return (cols + 1) / 2; }

    double at(long l, long m) const {
        const long i = l + long(m1()) - 1;
        const long j = m + long(m2()) - 1;
        if (i < 0 || j < 0 || i >= long(rows) || j >= long(cols))
            throw std::out_of_range("AutocorrelationMap::at: lag outside L");
        return s[std::size_t(i) * cols + std::size_t(j)];
    }
};

/// Sample normalized autocorrelation of a non-zero matrix:
///   s(l,m) = (1/||Z||^2) * sum_{(i,j), (i+l,j+m) in bounds} z_{i,j} z_{i+l,j+m}.
/// Lags are zero-padded (non-periodic); the sum runs only over in-bounds
/// pairs. Computed as a linear cross-correlation via a padded FFT.
inline AutocorrelationMap sample_autocorrelation(const ImageGrid& Z) {
    const std::size_t m1 = Z.rows(), m2 = Z.cols();
    if (m1 == 0 || m2 == 0) throw std::invalid_argument("sample_autocorrelation: empty matrix");
    double norm_sq = 0.0;
    for (std::size_t k = 0; k < Z.size(); ++k) norm_sq += Z[k] * Z[k];
    if (!(norm_sq > 0.0))
        throw std::invalid_argument("sample_autocorrelation: requires a non-zero matrix");

    const std::size_t p1 = std::bit_ceil(2 * m1 - 1);
    const std::size_t p2 = std::bit_ceil(2 * m2 - 1);
    fft::Plan2D plan(p1, p2);
    std::vector<fft::cdouble> buf(p1 * p2, fft::cdouble{0.0, 0.0});
    for (std::size_t i = 0; i < m1; ++i)
        for (std::size_t j = 0; j < m2; ++j) buf[i * p2 + j] = {Z(i, j), 0.0};
    plan.forward(buf.data());
    for (auto& v : buf) v = {std::norm(v), 0.0};
    plan.inverse(buf.data());

    AutocorrelationMap map;
    map.rows = 2 * m1 - 1;
    map.cols = 2 * m2 - 1;
    map.s.assign(map.rows * map.cols, 0.0);
    const double inv = 1.0 / norm_sq;
    for (long l = 0; l < long(m1); ++l) {
        for (long m = -(long(m2) - 1); m < long(m2); ++m) {
            const std::size_t bi = std::size_t(l);
            const std::size_t bj = std::size_t((m + long(p2)) % long(p2));
            const double v = buf[bi * p2 + bj].real() * inv;
            // write both (l,m) and the mirrored (-l,-m) so symmetry is exact
            map.s[std::size_t(l + long(m1) - 1) * map.cols + std::size_t(m + long(m2) - 1)] = v;
            map.s[std::size_t(-l + long(m1) - 1) * map.cols + std::size_t(-m + long(m2) - 1)] = v;
        }
    }
    map.s[(m1 - 1) * map.cols + (m2 - 1)] = 1.0;
    return map;
}

/// Scalar whiteness measure W = sum over lags of s(l,m)^2; the zero lag
/// contributes exactly 1, so W >= 1, with equality only for a 1x1 input.
/// max_lag < 0 sums the full lag set; otherwise only |l|,|m| <= max_lag.
inline double whiteness_measure(const ImageGrid& Z, long max_lag = -1) {
    const AutocorrelationMap map = sample_autocorrelation(Z);
    const long m1 = long(map.m1()), m2 = long(map.m2());
    double w = 0.0;
    for (long l = -(m1 - 1); l <= m1 - 1; ++l) {
        if (max_lag >= 0 && std::labs(l) > max_lag) continue;
        for (long m = -(m2 - 1); m <= m2 - 1; ++m) {
            if (max_lag >= 0 && std::labs(m) > max_lag) continue;
            const double v = map.s[std::size_t(l + m1 - 1) * map.cols + std::size_t(m + m2 - 1)];
            w += v * v;
        }
    }
    return w;
}

} // namespace tvkl
