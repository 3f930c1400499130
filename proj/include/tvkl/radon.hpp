#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tvkl/operators.hpp"

namespace tvkl {

enum class BeamKind { parallel, fan };

/// Acquisition geometry for the discrete Radon transform. Lengths in mm.
/// Angles are ray propagation directions measured from the +x axis; the
/// detector coordinate runs along (-sin a, cos a). The fan-beam detector is
/// flat (the curvature convention is recorded in run manifests).
struct RadonGeometry {
    std::size_t n_angles = 0;
    std::vector<double> angles; // radians, strictly increasing in [0, 2*pi)
    std::size_t n_detectors = 0;
    double detector_pixel_size = 1.0;
    double image_pixel_size = 1.0;
    double source_to_center = 0.0;   // fan only
    double center_to_detector = 0.0; // fan only
    BeamKind beam = BeamKind::parallel;

    void validate() const {
        if (n_angles == 0 || angles.size() != n_angles)
            throw std::invalid_argument("RadonGeometry: angle list does not match n_angles");
        for (std::size_t a = 0; a < n_angles; ++a) {
            if (angles[a] < 0.0 || angles[a] >= 2.0 * kPi)
                throw std::invalid_argument("RadonGeometry: angles must lie in [0, 2*pi)");
            if (a > 0 && !(angles[a] > angles[a - 1]))
                throw std::invalid_argument("RadonGeometry: angles must be strictly increasing");
        }
        if (n_detectors == 0) throw std::invalid_argument("RadonGeometry: n_detectors == 0");
        if (!(detector_pixel_size > 0.0) || !(image_pixel_size > 0.0))
            throw std::invalid_argument("RadonGeometry: pixel sizes must be positive");
        if (beam == BeamKind::fan && (!(source_to_center > 0.0) || !(center_to_detector > 0.0)))
            throw std::invalid_argument("RadonGeometry: fan beam needs positive distances");
    }

    static constexpr double kPi = 3.141592653589793238462643383279502884;
};

/// n equally spaced angles covering [0, span).
inline std::vector<double> equally_spaced_angles(std::size_t n, double span) {
    std::vector<double> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = span * double(k) / double(n);
    return a;
}

/// Compressed sparse rows; value type kept at double for exact adjoints.
struct SparseMatrixCSR {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr; // rows + 1
    std::vector<std::uint32_t> col_idx;
    std::vector<double> values;

    std::size_t nnz() const noexcept { return values.size(); }

    void apply(const double* x, double* y) const {
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
                acc += values[k] * x[col_idx[k]];
            y[r] = acc;
        }
    }

    SparseMatrixCSR transposed() const {
        SparseMatrixCSR t;
        t.rows = cols;
        t.cols = rows;
        t.row_ptr.assign(cols + 1, 0);
        for (std::uint32_t c : col_idx) ++t.row_ptr[c + 1];
        for (std::size_t c = 0; c < cols; ++c) t.row_ptr[c + 1] += t.row_ptr[c];
        t.col_idx.resize(nnz());
        t.values.resize(nnz());
        std::vector<std::size_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
                const std::size_t pos = cursor[col_idx[k]]++;
                t.col_idx[pos] = std::uint32_t(r);
                t.values[pos] = values[k];
            }
        }
        return t;
    }
};

namespace detail {

struct Ray {
    double px, py; // a point on the ray
    double dx, dy; // unit direction
};

/// Siddon exact-intersection walk: appends (pixel, chord length) pairs for
/// one ray crossing the pixel grid. Returns false when the ray misses.
inline bool trace_ray(const Ray& ray, std::size_t n1, std::size_t n2, double pixel,
                      std::vector<std::uint32_t>& cols, std::vector<double>& vals) {
    const double x_min = -0.5 * double(n2) * pixel;
    const double y_max = 0.5 * double(n1) * pixel;
    const double x_max = -x_min, y_min = -y_max;
    const double eps = 1e-12 * pixel * double(std::max(n1, n2));

    double t_enter = -1e300, t_exit = 1e300;
    if (std::fabs(ray.dx) < 1e-14) {
        if (ray.px <= x_min || ray.px >= x_max) return false;
    } else {
        const double t0 = (x_min - ray.px) / ray.dx;
        const double t1 = (x_max - ray.px) / ray.dx;
        t_enter = std::max(t_enter, std::min(t0, t1));
        t_exit = std::min(t_exit, std::max(t0, t1));
    }
    if (std::fabs(ray.dy) < 1e-14) {
        if (ray.py <= y_min || ray.py >= y_max) return false;
    } else {
        const double t0 = (y_min - ray.py) / ray.dy;
        const double t1 = (y_max - ray.py) / ray.dy;
        t_enter = std::max(t_enter, std::min(t0, t1));
        t_exit = std::min(t_exit, std::max(t0, t1));
    }
    if (!(t_enter < t_exit - eps)) return false;

    // Crossing parameters per axis; direction is unit length, so parameter
    // increments are chord lengths in mm.
    double t = t_enter;
    double tx_next, ty_next, tx_step, ty_step;
    if (std::fabs(ray.dx) < 1e-14) {
        tx_next = 1e300;
        tx_step = 0.0;
    } else {
        tx_step = pixel / std::fabs(ray.dx);
        const double x_at = ray.px + t * ray.dx;
        double cell = (x_at - x_min) / pixel;
        const double next_plane = ray.dx > 0 ? std::floor(cell) + 1.0 : std::ceil(cell) - 1.0;
        tx_next = ((x_min + next_plane * pixel) - ray.px) / ray.dx;
        if (tx_next <= t + eps) tx_next += tx_step;
    }
    if (std::fabs(ray.dy) < 1e-14) {
        ty_next = 1e300;
        ty_step = 0.0;
    } else {
        ty_step = pixel / std::fabs(ray.dy);
        const double y_at = ray.py + t * ray.dy;
        double cell = (y_at - y_min) / pixel;
        const double next_plane = ray.dy > 0 ? std::floor(cell) + 1.0 : std::ceil(cell) - 1.0;
        ty_next = ((y_min + next_plane * pixel) - ray.py) / ray.dy;
        if (ty_next <= t + eps) ty_next += ty_step;
    }

    bool hit = false;
    while (t < t_exit - eps) {
        const double t_next = std::min({tx_next, ty_next, t_exit});
        const double len = t_next - t;
        if (len > eps) {
            const double tm = 0.5 * (t + t_next);
            const double xm = ray.px + tm * ray.dx;
            const double ym = ray.py + tm * ray.dy;
            const long j = long(std::floor((xm - x_min) / pixel));
            const long i = long(std::floor((y_max - ym) / pixel)); // row 0 at top
            if (i >= 0 && i < long(n1) && j >= 0 && j < long(n2)) {
                cols.push_back(std::uint32_t(i * long(n2) + j));
                vals.push_back(len);
                hit = true;
            }
        }
        if (tx_next <= ty_next) {
            t = tx_next;
            tx_next += tx_step;
        } else {
            t = ty_next;
            ty_next += ty_step;
        }
        if (t_next >= t_exit) break;
    }
    return hit;
}

} // namespace detail

/// Discrete Radon transform stored sparse; rows are (angle, detector) pairs
/// in angle-major order, entries are exact ray/pixel intersection lengths.
class RadonOperator final : public ImagingOperator {
public:
    using ImagingOperator::apply;
    using ImagingOperator::apply_adjoint;

    RadonOperator(RadonGeometry geom, std::size_t n1, std::size_t n2)
        : geom_(std::move(geom)), n1_(n1), n2_(n2) {
        geom_.validate();
        if (n1_ == 0 || n2_ == 0) throw std::invalid_argument("RadonOperator: empty image");
        build();
        adjoint_ = matrix_.transposed();
    }

    std::size_t in_rows() const noexcept override { return n1_; }
    std::size_t in_cols() const noexcept override { return n2_; }
    std::size_t out_rows() const noexcept override { return geom_.n_angles; }
    std::size_t out_cols() const noexcept override { return geom_.n_detectors; }

    void apply(const double* x, double* y) const override { matrix_.apply(x, y); }
    void apply_adjoint(const double* y, double* x) const override { adjoint_.apply(y, x); }

    const SparseMatrixCSR& matrix() const noexcept { return matrix_; }
    const RadonGeometry& geometry() const noexcept { return geom_; }
    /// Rays that miss the pixel grid entirely (their rows are all zero).
    std::size_t zero_ray_count() const noexcept { return zero_rays_; }

private:
    void build() {
        matrix_.rows = geom_.n_angles * geom_.n_detectors;
        matrix_.cols = n1_ * n2_;
        matrix_.row_ptr.assign(matrix_.rows + 1, 0);
        const double half = (double(geom_.n_detectors) - 1.0) / 2.0;
        for (std::size_t a = 0; a < geom_.n_angles; ++a) {
            const double ang = geom_.angles[a];
            const double ux = std::cos(ang), uy = std::sin(ang);
            const double wx = -uy, wy = ux; // detector axis
            for (std::size_t d = 0; d < geom_.n_detectors; ++d) {
                const double s = (double(d) - half) * geom_.detector_pixel_size;
                detail::Ray ray;
                if (geom_.beam == BeamKind::parallel) {
                    ray = {s * wx, s * wy, ux, uy};
                } else {
                    const double sx = -geom_.source_to_center * ux;
                    const double sy = -geom_.source_to_center * uy;
                    const double px = geom_.center_to_detector * ux + s * wx;
                    const double py = geom_.center_to_detector * uy + s * wy;
                    const double len = std::hypot(px - sx, py - sy);
                    ray = {sx, sy, (px - sx) / len, (py - sy) / len};
                }
                const std::size_t before = matrix_.values.size();
                if (!detail::trace_ray(ray, n1_, n2_, geom_.image_pixel_size, matrix_.col_idx,
                                       matrix_.values))
                    ++zero_rays_;
                matrix_.row_ptr[a * geom_.n_detectors + d + 1] =
                    matrix_.row_ptr[a * geom_.n_detectors + d] +
                    (matrix_.values.size() - before);
            }
        }
    }

    RadonGeometry geom_;
    std::size_t n1_;
    std::size_t n2_;
    SparseMatrixCSR matrix_;
    SparseMatrixCSR adjoint_;
    std::size_t zero_rays_ = 0;
};

inline RadonOperator build_radon(RadonGeometry geom, std::size_t n1, std::size_t n2) {
    return RadonOperator(std::move(geom), n1, n2);
}

} // namespace tvkl
