#pragma once

#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace tvkl::fft {

using cdouble = std::complex<double>;

/// Complex DFT plan for one fixed length. Power-of-two lengths run the
/// iterative radix-2 kernel; everything else goes through Bluestein's
/// chirp-z reduction onto a padded power-of-two transform, so any length
/// is supported with O(n log n) cost.
class Plan1D {
public:
    explicit Plan1D(std::size_t n) : n_(n) {
        if (n == 0) throw std::invalid_argument("Plan1D: zero length");
        pow2_ = (n & (n - 1)) == 0;
        if (pow2_) {
            init_radix2();
        } else {
            init_bluestein();
        }
    }

    std::size_t size() const noexcept { return n_; }

    /// In-place unnormalized forward DFT: X_j = sum_k x_k e^{-2*pi*i*jk/n}.
    void forward(cdouble* x) const {
        if (pow2_) {
            radix2(x, n_, bitrev_, roots_);
        } else {
            bluestein(x);
        }
    }

    /// In-place inverse DFT, normalized by 1/n.
    void inverse(cdouble* x) const {
        for (std::size_t k = 0; k < n_; ++k) x[k] = std::conj(x[k]);
        forward(x);
        const double scale = 1.0 / double(n_);
        for (std::size_t k = 0; k < n_; ++k) x[k] = std::conj(x[k]) * scale;
    }

private:
    void init_radix2() {
        bitrev_.resize(n_);
        std::size_t log2n = 0;
        while ((std::size_t(1) << log2n) < n_) ++log2n;
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t r = 0;
            for (std::size_t bit = 0; bit < log2n; ++bit)
                if (i & (std::size_t(1) << bit)) r |= std::size_t(1) << (log2n - 1 - bit);
            bitrev_[i] = r;
        }
        roots_.resize(n_ / 2);
        for (std::size_t k = 0; k < n_ / 2; ++k) {
            const double ang = -2.0 * kPi * double(k) / double(n_);
            roots_[k] = {std::cos(ang), std::sin(ang)};
        }
    }

    static void radix2(cdouble* x, std::size_t n, const std::vector<std::size_t>& bitrev,
                       const std::vector<cdouble>& roots) {
        for (std::size_t i = 0; i < n; ++i)
            if (bitrev[i] > i) std::swap(x[i], x[bitrev[i]]);
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t stride = n / len;
            const std::size_t half = len / 2;
            for (std::size_t start = 0; start < n; start += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    const cdouble w = roots[k * stride];
                    const cdouble u = x[start + k];
                    const cdouble v = x[start + k + half] * w;
                    x[start + k] = u + v;
                    x[start + k + half] = u - v;
                }
            }
        }
    }

    void init_bluestein() {
        pad_plan_ = std::make_unique<Plan1D>(std::bit_ceil(2 * n_ - 1));
        const std::size_t pad = pad_plan_->size();
        chirp_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            // k^2 mod 2n keeps the phase argument small and exact.
            const std::uint64_t q = (std::uint64_t(k) * k) % (2 * n_);
            const double ang = -kPi * double(q) / double(n_);
            chirp_[k] = {std::cos(ang), std::sin(ang)};
        }
        chirp_fft_.assign(pad, cdouble{0.0, 0.0});
        chirp_fft_[0] = std::conj(chirp_[0]);
        for (std::size_t k = 1; k < n_; ++k) {
            chirp_fft_[k] = std::conj(chirp_[k]);
            chirp_fft_[pad - k] = std::conj(chirp_[k]);
        }
        pad_plan_->forward(chirp_fft_.data());
    }

    void bluestein(cdouble* x) const {
        const std::size_t pad = pad_plan_->size();
        std::vector<cdouble> work(pad, cdouble{0.0, 0.0});
        for (std::size_t k = 0; k < n_; ++k) work[k] = x[k] * chirp_[k];
        pad_plan_->forward(work.data());
        for (std::size_t k = 0; k < pad; ++k) work[k] *= chirp_fft_[k];
        pad_plan_->inverse(work.data());
        for (std::size_t j = 0; j < n_; ++j) x[j] = work[j] * chirp_[j];
    }

    static constexpr double kPi = 3.141592653589793238462643383279502884;

    std::size_t n_;
    bool pow2_ = false;
    std::vector<std::size_t> bitrev_;
    std::vector<cdouble> roots_;
    std::unique_ptr<Plan1D> pad_plan_;
    std::vector<cdouble> chirp_;
    std::vector<cdouble> chirp_fft_;
};

/// Row-column 2-D transform over a row-major buffer of rows*cols complex
/// values. Power-of-two row counts run the column pass in place, with the
/// butterfly inner loop over the contiguous row index; other row counts fall
/// back to a per-column scratch transform.
class Plan2D {
public:
    Plan2D(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), row_plan_(cols), col_plan_(rows) {
        rows_pow2_ = (rows_ & (rows_ - 1)) == 0;
        if (rows_pow2_) {
            std::size_t log2n = 0;
            while ((std::size_t(1) << log2n) < rows_) ++log2n;
            row_bitrev_.resize(rows_);
            for (std::size_t i = 0; i < rows_; ++i) {
                std::size_t r = 0;
                for (std::size_t bit = 0; bit < log2n; ++bit)
                    if (i & (std::size_t(1) << bit)) r |= std::size_t(1) << (log2n - 1 - bit);
                row_bitrev_[i] = r;
            }
            col_roots_.resize(rows_ / 2);
            for (std::size_t k = 0; k < rows_ / 2; ++k) {
                const double ang = -2.0 * 3.141592653589793238462643383279502884 * double(k) /
                                   double(rows_);
                col_roots_[k] = {std::cos(ang), std::sin(ang)};
            }
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    void forward(cdouble* x) const { transform(x, true); }
    void inverse(cdouble* x) const { transform(x, false); }

private:
    void transform(cdouble* x, bool fwd) const {
        for (std::size_t i = 0; i < rows_; ++i) {
            if (fwd)
                row_plan_.forward(x + i * cols_);
            else
                row_plan_.inverse(x + i * cols_);
        }
        if (rows_pow2_) {
            column_pass(x, fwd);
            return;
        }
        std::vector<cdouble> col(rows_);
        for (std::size_t j = 0; j < cols_; ++j) {
            for (std::size_t i = 0; i < rows_; ++i) col[i] = x[i * cols_ + j];
            if (fwd)
                col_plan_.forward(col.data());
            else
                col_plan_.inverse(col.data());
            for (std::size_t i = 0; i < rows_; ++i) x[i * cols_ + j] = col[i];
        }
    }

    // all columns at once: butterflies over whole rows keep accesses contiguous
    void column_pass(cdouble* x, bool fwd) const {
        for (std::size_t i = 0; i < rows_; ++i)
            if (row_bitrev_[i] > i)
                for (std::size_t j = 0; j < cols_; ++j)
                    std::swap(x[i * cols_ + j], x[row_bitrev_[i] * cols_ + j]);
        for (std::size_t len = 2; len <= rows_; len <<= 1) {
            const std::size_t stride = rows_ / len;
            const std::size_t half = len / 2;
            for (std::size_t start = 0; start < rows_; start += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    cdouble w = col_roots_[k * stride];
                    if (!fwd) w = std::conj(w);
                    cdouble* a = x + (start + k) * cols_;
                    cdouble* b = x + (start + k + half) * cols_;
                    for (std::size_t j = 0; j < cols_; ++j) {
                        const cdouble u = a[j];
                        const cdouble v = b[j] * w;
                        a[j] = u + v;
                        b[j] = u - v;
                    }
                }
            }
        }
        if (!fwd) {
            const double scale = 1.0 / double(rows_);
            for (std::size_t k = 0; k < rows_ * cols_; ++k) x[k] *= scale;
        }
    }

    std::size_t rows_;
    std::size_t cols_;
    Plan1D row_plan_;
    Plan1D col_plan_;
    bool rows_pow2_ = false;
    std::vector<std::size_t> row_bitrev_;
    std::vector<cdouble> col_roots_;
};

inline std::vector<cdouble> to_complex(const double* x, std::size_t n) {
    std::vector<cdouble> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = {x[k], 0.0};
    return out;
}

} // namespace tvkl::fft
