#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvkl/image.hpp"
#include "tvkl/rng.hpp"

namespace tvkl {

namespace detail {

struct Ellipse {
    double value, a, b, x0, y0, phi_deg;
};

inline bool inside(const Ellipse& e, double x, double y) {
    const double rad = e.phi_deg * 3.141592653589793238462643383279502884 / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    const double xr = c * (x - e.x0) + s * (y - e.y0);
    const double yr = -s * (x - e.x0) + c * (y - e.y0);
    return (xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0;
}

} // namespace detail

/// Analytic Shepp-Logan head phantom (modified intensities), values in [0, 1].
inline ImageGrid shepp_logan_phantom(std::size_t rows, std::size_t cols) {
    static const std::vector<detail::Ellipse> ellipses = {
        {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},      {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
        {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},  {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
        {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},     {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
        {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},   {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
        {0.1, 0.023, 0.023, 0.0, -0.606, 0.0}, {0.1, 0.023, 0.046, 0.06, -0.605, 0.0}};
    ImageGrid img(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const double y = 1.0 - 2.0 * (double(i) + 0.5) / double(rows);
        for (std::size_t j = 0; j < cols; ++j) {
            const double x = 2.0 * (double(j) + 0.5) / double(cols) - 1.0;
            double v = 0.0;
            for (const auto& e : ellipses)
                if (detail::inside(e, x, y)) v += e.value;
            img(i, j) = std::min(std::max(v, 0.0), 1.0);
        }
    }
    return img;
}

/// Piecewise-constant blob phantom: flat elliptical cells painted over a dim
/// background, later cells overwriting earlier ones. Deterministic in the
/// seed.
inline ImageGrid cells_phantom(std::size_t rows, std::size_t cols, std::uint64_t seed = 1234) {
    Philox4x32 rng(seed, make_stream(StreamTag::phantom));
    ImageGrid img(rows, cols, 0.08);
    const int n_cells = 14;
    for (int c = 0; c < n_cells; ++c) {
        detail::Ellipse e;
        e.x0 = rng.uniform(-0.75, 0.75);
        e.y0 = rng.uniform(-0.75, 0.75);
        e.a = rng.uniform(0.06, 0.28);
        e.b = rng.uniform(0.06, 0.28);
        e.phi_deg = rng.uniform(0.0, 180.0);
        e.value = rng.uniform(0.30, 1.0);
        for (std::size_t i = 0; i < rows; ++i) {
            const double y = 1.0 - 2.0 * (double(i) + 0.5) / double(rows);
            for (std::size_t j = 0; j < cols; ++j) {
                const double x = 2.0 * (double(j) + 0.5) / double(cols) - 1.0;
                if (detail::inside(e, x, y)) img(i, j) = e.value;
            }
        }
    }
    return img;
}

/// Sparse bright structure on an empty sky: body, dish, gridded solar panels
/// and beacons. About two thirds of the pixels are exactly zero.
inline ImageGrid satellite_phantom(std::size_t rows, std::size_t cols) {
    ImageGrid img(rows, cols, 0.0);
    auto paint_rect = [&](double x0, double x1, double y0, double y1, double v) {
        for (std::size_t i = 0; i < rows; ++i) {
            const double y = (double(i) + 0.5) / double(rows);
            for (std::size_t j = 0; j < cols; ++j) {
                const double x = (double(j) + 0.5) / double(cols);
                if (x >= x0 && x <= x1 && y >= y0 && y <= y1) img(i, j) = v;
            }
        }
    };
    auto paint_disk = [&](double cx, double cy, double r, double v) {
        for (std::size_t i = 0; i < rows; ++i) {
            const double y = (double(i) + 0.5) / double(rows);
            for (std::size_t j = 0; j < cols; ++j) {
                const double x = (double(j) + 0.5) / double(cols);
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) img(i, j) = v;
            }
        }
    };
    paint_rect(0.06, 0.42, 0.32, 0.68, 0.7); // left panel
    paint_rect(0.58, 0.94, 0.32, 0.68, 0.7); // right panel
    for (double gx = 0.10; gx < 0.42; gx += 0.06) paint_rect(gx, gx + 0.015, 0.32, 0.68, 0.95);
    for (double gx = 0.62; gx < 0.94; gx += 0.06) paint_rect(gx, gx + 0.015, 0.32, 0.68, 0.95);
    paint_rect(0.42, 0.58, 0.46, 0.54, 1.0); // strut
    paint_rect(0.44, 0.56, 0.38, 0.62, 0.9); // body
    paint_disk(0.50, 0.24, 0.08, 0.8);       // dish
    paint_disk(0.50, 0.24, 0.025, 1.0);
    paint_disk(0.20, 0.85, 0.02, 1.0); // beacons
    paint_disk(0.84, 0.12, 0.02, 1.0);
    return img;
}

enum class PhantomKind { cells, satellite, shepp_logan, file };

inline PhantomKind parse_phantom_kind(const std::string& name) {
    if (name == "cells") return PhantomKind::cells;
    if (name == "satellite") return PhantomKind::satellite;
    if (name == "shepp-logan" || name == "shepp_logan") return PhantomKind::shepp_logan;
    return PhantomKind::file;
}

} // namespace tvkl
