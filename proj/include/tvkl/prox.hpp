#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tvkl/image.hpp"

namespace tvkl {

/// Parameters shared by the data-term proximal kernels. tau = mu / beta.
struct ProxParams {
    double beta = 1.0;
    double tau = 1.0;
    double i0 = 1.0; // beer_lambert only
};

/// Proximal map of the Euclidean norm on R^2, applied per pixel to the
/// stacked gradient pair (gh_i, gv_i):
///   t_i = max(||q_i|| - 1/beta, 0) * q_i / ||q_i||,   0 * 0/0 = 0.
inline void prox_tv_pair(double qh, double qv, double beta, double& th, double& tv_out) {
    // plain sqrt: gradient magnitudes live far from the over/underflow range
    const double r = std::sqrt(qh * qh + qv * qv);
    const double shrunk = r - 1.0 / beta;
    if (shrunk <= 0.0 || r == 0.0) {
        th = 0.0;
        tv_out = 0.0;
        return;
    }
    const double scale = shrunk / r;
    th = qh * scale;
    tv_out = qv * scale;
}

/// Vector form on a 2n block laid out as [horizontal; vertical].
inline std::vector<double> prox_tv(const std::vector<double>& q, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("prox_tv: beta must be positive");
    if (q.size() % 2 != 0) throw std::invalid_argument("prox_tv: expected 2n entries");
    const std::size_t n = q.size() / 2;
    std::vector<double> t(q.size());
    for (std::size_t i = 0; i < n; ++i) prox_tv_pair(q[i], q[n + i], beta, t[i], t[n + i]);
    return t;
}

/// Scalar prox of t -> tau*(t - y ln(t+b)) + (t-q)^2/2 on t in (-b, inf),
/// i.e. the KL data term under g(t) = t. Larger root of
/// t^2 + (tau+b-q) t + (b tau - b q - tau y) = 0, evaluated in the
/// cancellation-free branch; the discriminant equals (b+q-tau)^2 + 4 tau y.
inline double prox_kl_identity(double q, double y, double b, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("prox_kl_identity: tau must be positive");
    if (y < 0.0 || b < 0.0) throw std::invalid_argument("prox_kl_identity: negative y or b");
    const double p = tau + b - q;
    const double disc = (b + q - tau) * (b + q - tau) + 4.0 * tau * y;
    const double root = std::sqrt(disc);
    double t;
    if (p <= 0.0) {
        t = 0.5 * (-p + root);
    } else {
        const double c = b * tau - b * q - tau * y;
        t = (p + root) > 0.0 ? -2.0 * c / (p + root) : 0.0;
    }
    // stays in the domain closure; boundary is only reached at y = 0
    if (!(t >= -b - 1e-14 * (1.0 + b)))
        throw std::domain_error("prox_kl_identity: root left the domain");
    return t;
}

/// Principal-branch Lambert W on x >= 0: the w >= 0 with w e^w = x.
/// Halley iteration from the series-matched initial guess
/// w0 = ln(1+x) (1 - ln(1+ln(1+x)) / (2 + ln(1+x))).
inline double lambert_w0(double x) {
    if (!(x >= 0.0)) throw std::invalid_argument("lambert_w0: requires x >= 0");
    if (x == 0.0) return 0.0;
    const double l1 = std::log1p(x);
    double w = l1 * (1.0 - std::log1p(l1) / (2.0 + l1));
    for (int it = 0; it < 20; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        if (std::fabs(f) <= 1e-13 * std::max(1.0, x)) break;
        const double d1 = ew * (w + 1.0);
        const double step = f / (d1 - f * (w + 2.0) / (2.0 * (w + 1.0)));
        w -= step;
        if (std::fabs(step) <= 1e-16 * std::max(1.0, std::fabs(w))) break;
    }
    return w;
}

/// W(e^u), stable for any u including ranges where e^u overflows. For
/// moderate u this defers to lambert_w0; for large u it solves
/// w + ln w = u by Newton, seeded with the asymptotic u - ln u.
inline double lambert_w0_exp_arg(double u) {
    if (u < -700.0) return 0.0; // W(e^u) ~ e^u, below double underflow here
    if (u <= 1.0) return lambert_w0(std::exp(u));
    double w = u - std::log(u) + std::log(u) / u;
    for (int it = 0; it < 20; ++it) {
        const double g = w + std::log(w) - u;
        const double step = g * w / (w + 1.0);
        w -= step;
        if (std::fabs(step) <= 1e-15 * w) break;
    }
    return w;
}

/// Scalar prox of t -> tau*(I0 e^{-t} + y t) + (t-q)^2/2 (KL data term under
/// the Beer-Lambert g with zero background):
///   t = -(tau y - q) + W(tau I0 e^{tau y - q}).
/// When tau*y - q exceeds ~700 the exponential overflows; the W(e^u) form
/// absorbs that range, and such pixels are counted through overflow_count.
inline double prox_kl_exponential(double q, double y, double i0, double tau,
                                  long* overflow_count = nullptr) {
    if (!(tau > 0.0) || !(i0 > 0.0))
        throw std::invalid_argument("prox_kl_exponential: tau and I0 must be positive");
    if (y < 0.0) throw std::invalid_argument("prox_kl_exponential: negative count");
    const double a = tau * y - q;
    if (a > 700.0 && overflow_count) ++(*overflow_count);
    const double u = std::log(tau * i0) + a;
    return -a + lambert_w0_exp_arg(u);
}

/// Euclidean projection onto the nonnegative orthant.
inline void project_nonneg(const double* q, double* t, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) t[k] = q[k] > 0.0 ? q[k] : 0.0;
}

inline std::vector<double> project_nonneg(const std::vector<double>& q) {
    std::vector<double> t(q.size());
    project_nonneg(q.data(), t.data(), q.size());
    return t;
}

} // namespace tvkl
