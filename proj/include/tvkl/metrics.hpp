#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tvkl/image.hpp"

namespace tvkl {

/// SNR(x_hat, x_bar) = 10 log10( ||x_bar - mean(x_bar)||^2 / ||x_bar - x_hat||^2 ),
/// in dB. Identical images map to +infinity.
inline double snr(const ImageGrid& x_hat, const ImageGrid& x_bar) {
    require_same_shape(x_hat, x_bar, "snr");
    const double mean = x_bar.mean();
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < x_bar.size(); ++k) {
        const double c = x_bar[k] - mean;
        const double e = x_bar[k] - x_hat[k];
        num += c * c;
        den += e * e;
    }
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(num / den);
}

struct SsimConfig {
    int window = 11;
    double window_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

struct QualityReport {
    double snr = 0.0;  // dB
    double ssim = 0.0; // in [-1, 1]
};

namespace detail {

// Gaussian-weighted local filtering with symmetric (mirror) boundary.
class SsimFilter {
public:
    SsimFilter(std::size_t rows, std::size_t cols, int window, double sigma)
        : rows_(rows), cols_(cols), half_(window / 2) {
        w_.resize(std::size_t(window));
        double sum = 0.0;
        for (int k = 0; k < window; ++k) {
            const double d = k - half_;
            w_[std::size_t(k)] = std::exp(-d * d / (2.0 * sigma * sigma));
            sum += w_[std::size_t(k)];
        }
        for (auto& v : w_) v /= sum;
    }

    // separable pass: rows then columns
    std::vector<double> operator()(const std::vector<double>& img) const {
        std::vector<double> tmp(img.size()), out(img.size());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) {
                double acc = 0.0;
                for (int k = -half_; k <= half_; ++k)
                    acc += w_[std::size_t(k + half_)] * img[i * cols_ + mirror(long(j) + k, cols_)];
                tmp[i * cols_ + j] = acc;
            }
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) {
                double acc = 0.0;
                for (int k = -half_; k <= half_; ++k)
                    acc += w_[std::size_t(k + half_)] * tmp[mirror(long(i) + k, rows_) * cols_ + j];
                out[i * cols_ + j] = acc;
            }
        return out;
    }

private:
    static std::size_t mirror(long idx, std::size_t n) {
        if (idx < 0) idx = -1 - idx;
        if (idx >= long(n)) idx = 2 * long(n) - 1 - idx;
        return std::size_t(idx);
    }

    std::size_t rows_, cols_;
    int half_;
    std::vector<double> w_;
};

} // namespace detail

/// Mean structural similarity with an 11x11 Gaussian window (sigma 1.5) and
/// the standard stabilization constants; all of them overridable via config.
inline double ssim(const ImageGrid& x_hat, const ImageGrid& x_bar, SsimConfig cfg = {}) {
    require_same_shape(x_hat, x_bar, "ssim");
    if (x_hat.rows() < std::size_t(cfg.window) || x_hat.cols() < std::size_t(cfg.window))
        throw std::invalid_argument("ssim: image smaller than the filter window");
    const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
    const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);

    const std::size_t sz = x_hat.size();
    std::vector<double> a(x_hat.vec()), b(x_bar.vec()), aa(sz), bb(sz), ab(sz);
    for (std::size_t k = 0; k < sz; ++k) {
        aa[k] = a[k] * a[k];
        bb[k] = b[k] * b[k];
        ab[k] = a[k] * b[k];
    }
    detail::SsimFilter filt(x_hat.rows(), x_hat.cols(), cfg.window, cfg.window_sigma);
    const auto mu_a = filt(a), mu_b = filt(b), m_aa = filt(aa), m_bb = filt(bb), m_ab = filt(ab);

    double acc = 0.0;
    for (std::size_t k = 0; k < sz; ++k) {
        const double va = m_aa[k] - mu_a[k] * mu_a[k];
        const double vb = m_bb[k] - mu_b[k] * mu_b[k];
        const double vab = m_ab[k] - mu_a[k] * mu_b[k];
        acc += ((2.0 * mu_a[k] * mu_b[k] + c1) * (2.0 * vab + c2)) /
               ((mu_a[k] * mu_a[k] + mu_b[k] * mu_b[k] + c1) * (va + vb + c2));
    }
    return acc / double(sz);
}

inline QualityReport score_reconstruction(const ImageGrid& x_hat, const ImageGrid& x_bar,
                                          SsimConfig cfg = {}) {
    return {snr(x_hat, x_bar), ssim(x_hat, x_bar, cfg)};
}

} // namespace tvkl
