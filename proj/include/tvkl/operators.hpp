#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "tvkl/fft.hpp"
#include "tvkl/image.hpp"
#include "tvkl/rng.hpp"

namespace tvkl {

// ---------------------------------------------------------------------------
// Blur kernel
// ---------------------------------------------------------------------------

/// Square convolution stencil with odd support, nonnegative taps, unit sum.
struct BlurKernel {
    ImageGrid taps; // band x band
    int band = 1;
    double sigma = 1.0;
};

/// Isotropic Gaussian sampled at integer offsets from the center tap and
/// normalized to unit sum (flux preserving, same convention as fspecial).
inline BlurKernel make_gaussian_kernel(int band, double sigma) {
    if (band < 1 || band % 2 == 0)
        throw std::invalid_argument("make_gaussian_kernel: band must be odd and >= 1");
    if (!(sigma > 0.0))
        throw std::invalid_argument("make_gaussian_kernel: sigma must be positive");
    BlurKernel k;
    k.band = band;
    k.sigma = sigma;
    k.taps = ImageGrid(std::size_t(band), std::size_t(band));
    const int c = band / 2;
    double sum = 0.0;
    for (int i = 0; i < band; ++i) {
        for (int j = 0; j < band; ++j) {
            const double di = i - c, dj = j - c;
            const double v = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
            k.taps(std::size_t(i), std::size_t(j)) = v;
            sum += v;
        }
    }
    for (std::size_t idx = 0; idx < k.taps.size(); ++idx) k.taps[idx] /= sum;
    return k;
}

// ---------------------------------------------------------------------------
// Imaging operator interface
// ---------------------------------------------------------------------------

/// Linear map from an n1 x n2 image to an m1 x m2 data grid, with adjoint.
/// Immutable after construction; concurrent read-only use is safe.
class ImagingOperator {
public:
    virtual ~ImagingOperator() = default;

    virtual std::size_t in_rows() const noexcept = 0;
    virtual std::size_t in_cols() const noexcept = 0;
    virtual std::size_t out_rows() const noexcept = 0;
    virtual std::size_t out_cols() const noexcept = 0;
    std::size_t n() const noexcept { return in_rows() * in_cols(); }
    std::size_t m() const noexcept { return out_rows() * out_cols(); }

    virtual void apply(const double* x, double* y) const = 0;
    virtual void apply_adjoint(const double* y, double* x) const = 0;

    /// True when the operator is diagonalized by the 2-D DFT on its input
    /// grid (periodic convolution); spectrum() is then valid.
    virtual bool fourier_diagonal() const noexcept { return false; }
    virtual const std::vector<fft::cdouble>& spectrum() const {
        throw std::logic_error("spectrum() only available for Fourier-diagonal operators");
    }

    ImageGrid apply(const ImageGrid& x) const {
        if (x.rows() != in_rows() || x.cols() != in_cols())
            throw std::invalid_argument("ImagingOperator::apply: shape mismatch");
        ImageGrid y(out_rows(), out_cols());
        apply(x.data(), y.data());
        return y;
    }
    ImageGrid apply_adjoint(const ImageGrid& y) const {
        if (y.rows() != out_rows() || y.cols() != out_cols())
            throw std::invalid_argument("ImagingOperator::apply_adjoint: shape mismatch");
        ImageGrid x(in_rows(), in_cols());
        apply_adjoint(y.data(), x.data());
        return x;
    }
};

/// Periodic (circular) convolution with a BlurKernel, executed in the Fourier
/// domain with a cached transfer function.
class BlurOperator final : public ImagingOperator {
public:
    using ImagingOperator::apply;
    using ImagingOperator::apply_adjoint;

    BlurOperator(std::size_t rows, std::size_t cols, BlurKernel kernel)
        : rows_(rows), cols_(cols), kernel_(std::move(kernel)), plan_(rows, cols) {
        if (rows_ == 0 || cols_ == 0)
            throw std::invalid_argument("BlurOperator: empty image shape");
        if (std::size_t(kernel_.band) > rows_ || std::size_t(kernel_.band) > cols_)
            throw std::invalid_argument("BlurOperator: kernel support exceeds image");
        // Wrap the centered stencil to the origin, then transform once.
        std::vector<fft::cdouble> buf(rows_ * cols_, fft::cdouble{0.0, 0.0});
        const int c = kernel_.band / 2;
        for (int a = 0; a < kernel_.band; ++a) {
            for (int b = 0; b < kernel_.band; ++b) {
                const std::size_t i = std::size_t(((a - c) % int(rows_) + int(rows_)) % int(rows_));
                const std::size_t j = std::size_t(((b - c) % int(cols_) + int(cols_)) % int(cols_));
                buf[i * cols_ + j] += kernel_.taps(std::size_t(a), std::size_t(b));
            }
        }
        plan_.forward(buf.data());
        spectrum_ = std::move(buf);
    }

    std::size_t in_rows() const noexcept override { return rows_; }
    std::size_t in_cols() const noexcept override { return cols_; }
    std::size_t out_rows() const noexcept override { return rows_; }
    std::size_t out_cols() const noexcept override { return cols_; }

    void apply(const double* x, double* y) const override { convolve(x, y, false); }
    void apply_adjoint(const double* y, double* x) const override { convolve(y, x, true); }

    bool fourier_diagonal() const noexcept override { return true; }
    const std::vector<fft::cdouble>& spectrum() const noexcept override { return spectrum_; }
    const fft::Plan2D& plan() const noexcept { return plan_; }
    const BlurKernel& kernel() const noexcept { return kernel_; }

private:
    void convolve(const double* in, double* out, bool adjoint) const {
        std::vector<fft::cdouble> buf = fft::to_complex(in, rows_ * cols_);
        plan_.forward(buf.data());
        for (std::size_t k = 0; k < buf.size(); ++k)
            buf[k] *= adjoint ? std::conj(spectrum_[k]) : spectrum_[k];
        plan_.inverse(buf.data());
        for (std::size_t k = 0; k < buf.size(); ++k) out[k] = buf[k].real();
    }

    std::size_t rows_;
    std::size_t cols_;
    BlurKernel kernel_;
    fft::Plan2D plan_;
    std::vector<fft::cdouble> spectrum_;
};

/// H = I (pure denoising); Fourier-diagonal with a flat unit spectrum.
class IdentityOperator final : public ImagingOperator {
public:
    using ImagingOperator::apply;
    using ImagingOperator::apply_adjoint;

    IdentityOperator(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), spectrum_(rows * cols, fft::cdouble{1.0, 0.0}) {}

    std::size_t in_rows() const noexcept override { return rows_; }
    std::size_t in_cols() const noexcept override { return cols_; }
    std::size_t out_rows() const noexcept override { return rows_; }
    std::size_t out_cols() const noexcept override { return cols_; }

    void apply(const double* x, double* y) const override {
        for (std::size_t k = 0; k < rows_ * cols_; ++k) y[k] = x[k];
    }
    void apply_adjoint(const double* y, double* x) const override { apply(y, x); }

    bool fourier_diagonal() const noexcept override { return true; }
    const std::vector<fft::cdouble>& spectrum() const noexcept override { return spectrum_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<fft::cdouble> spectrum_;
};

/// One-shot circular blur; solver loops hold a BlurOperator instead.
inline ImageGrid apply_blur(const ImageGrid& x, const BlurKernel& k) {
    return BlurOperator(x.rows(), x.cols(), k).apply(x);
}

inline ImageGrid apply_blur_adjoint(const ImageGrid& r, const BlurKernel& k) {
    return BlurOperator(r.rows(), r.cols(), k).apply_adjoint(r);
}

// ---------------------------------------------------------------------------
// Discrete gradient (periodic forward differences)
// ---------------------------------------------------------------------------

/// (D_h x)_{i,j} = x_{i,j+1} - x_{i,j}, (D_v x)_{i,j} = x_{i+1,j} - x_{i,j},
/// indices wrapping periodically. D^T D is then the (negated) periodic
/// 5-point Laplacian, diagonal in the 2-D Fourier basis.
namespace grad {

inline void forward(const double* x, double* gh, double* gv, std::size_t n1, std::size_t n2) {
    for (std::size_t i = 0; i < n1; ++i) {
        const std::size_t in = (i + 1 == n1) ? 0 : i + 1;
        for (std::size_t j = 0; j < n2; ++j) {
            const std::size_t jn = (j + 1 == n2) ? 0 : j + 1;
            gh[i * n2 + j] = x[i * n2 + jn] - x[i * n2 + j];
            gv[i * n2 + j] = x[in * n2 + j] - x[i * n2 + j];
        }
    }
}

inline void adjoint(const double* gh, const double* gv, double* x, std::size_t n1,
                    std::size_t n2) {
    for (std::size_t i = 0; i < n1; ++i) {
        const std::size_t ip = (i == 0) ? n1 - 1 : i - 1;
        for (std::size_t j = 0; j < n2; ++j) {
            const std::size_t jp = (j == 0) ? n2 - 1 : j - 1;
            x[i * n2 + j] = gh[i * n2 + jp] - gh[i * n2 + j] + gv[ip * n2 + j] - gv[i * n2 + j];
        }
    }
}

} // namespace grad

struct GradientField {
    ImageGrid dh;
    ImageGrid dv;
};

inline GradientField apply_gradient(const ImageGrid& x) {
    GradientField g{ImageGrid(x.rows(), x.cols()), ImageGrid(x.rows(), x.cols())};
    grad::forward(x.data(), g.dh.data(), g.dv.data(), x.rows(), x.cols());
    return g;
}

inline ImageGrid apply_gradient_adjoint(const GradientField& g) {
    require_same_shape(g.dh, g.dv, "apply_gradient_adjoint");
    ImageGrid x(g.dh.rows(), g.dh.cols());
    grad::adjoint(g.dh.data(), g.dv.data(), x.data(), x.rows(), x.cols());
    return x;
}

// ---------------------------------------------------------------------------
// Operator norm estimation
// ---------------------------------------------------------------------------

struct PowerIterationInfo {
    int iterations = 0;
    bool converged = false;
};

/// Largest eigenvalue of a symmetric PSD operator v -> normal_apply(v), by
/// power iteration from a fixed pseudo-random start. The estimate is inflated
/// by 1.01 so callers get a value certified >= the true norm despite finite
/// iteration.
inline double operator_norm_sq(
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& normal_apply,
    std::size_t n, PowerIterationInfo* info = nullptr, double rel_tol = 1e-6,
    int max_iter = 500) {
    if (n == 0) throw std::invalid_argument("operator_norm_sq: empty operator");
    std::vector<double> v(n), w(n);
    Philox4x32 start(0x5EEDF00Du, make_stream(StreamTag::power_iteration));
    for (std::size_t k = 0; k < n; ++k) v[k] = start.uniform() - 0.5;
    double vnorm = 0.0;
    for (double val : v) vnorm += val * val;
    vnorm = std::sqrt(vnorm);
    for (std::size_t k = 0; k < n; ++k) v[k] /= vnorm;

    double lambda = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < max_iter; ++it) {
        normal_apply(v, w);
        double rayleigh = 0.0, wnorm = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            rayleigh += v[k] * w[k];
            wnorm += w[k] * w[k];
        }
        wnorm = std::sqrt(wnorm);
        if (wnorm <= 0.0) {
            lambda = 0.0;
            converged = true;
            ++it;
            break;
        }
        for (std::size_t k = 0; k < n; ++k) v[k] = w[k] / wnorm;
        if (it > 0 && std::fabs(rayleigh - lambda) <= rel_tol * std::fabs(rayleigh)) {
            lambda = rayleigh;
            converged = true;
            ++it;
            break;
        }
        lambda = rayleigh;
    }
    if (info) {
        info->iterations = it;
        info->converged = converged;
    }
    return 1.01 * lambda;
}

/// ||M1||^2 for the stacked operator M1 = (D; H; I) used by the solver.
inline double m1_operator_norm_sq(const ImagingOperator& H, PowerIterationInfo* info = nullptr) {
    const std::size_t n1 = H.in_rows(), n2 = H.in_cols(), n = n1 * n2, m = H.m();
    std::vector<double> gh(n), gv(n), lap(n), hx(m), hth(n);
    auto normal = [&](const std::vector<double>& x, std::vector<double>& out) {
        grad::forward(x.data(), gh.data(), gv.data(), n1, n2);
        grad::adjoint(gh.data(), gv.data(), lap.data(), n1, n2);
        H.apply(x.data(), hx.data());
        H.apply_adjoint(hx.data(), hth.data());
        for (std::size_t k = 0; k < n; ++k) out[k] = lap[k] + hth[k] + x[k];
    };
    return operator_norm_sq(normal, n, info);
}

} // namespace tvkl
