#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tvkl/errors.hpp"
#include "tvkl/fft.hpp"
#include "tvkl/image.hpp"
#include "tvkl/operators.hpp"
#include "tvkl/poisson.hpp"
#include "tvkl/prox.hpp"

namespace tvkl {

enum class XUpdateMode { automatic, exact_fft, linearized };

/// Knobs of the two-block ADMM on the splitting t1 = Dx, t2 = Hx, t3 = x.
/// beta and eta must be positive when given; unset beta falls back to
/// 0.1*mu (identity g) or 1.0 (beer_lambert), unset eta to the estimated
/// ||M1||^2 when the linearized update is in play.
struct SolverConfig {
    double mu = 1.0;
    std::optional<double> beta;
    double tol = 1e-6;
    int max_iter = 3000;
    XUpdateMode x_update = XUpdateMode::automatic;
    std::optional<double> eta;
    bool record_trace = true;
};

struct TraceRow {
    int iter = 0;
    double delta_x = 0.0;
    double primal_residual = 0.0;
    double objective = 0.0;
};

struct SolveResult {
    ImageGrid x_star; // the reported nonnegative block t3
    int iterations = 0;
    bool converged = false;
    double final_delta_x = 0.0;
    double final_constraint_residual = 0.0;
    double objective_initial = 0.0;
    double objective_final = 0.0;
    double beta_used = 0.0;
    double eta_used = 0.0;
    XUpdateMode mode_used = XUpdateMode::automatic;
    long lambert_overflows = 0;
    std::vector<TraceRow> trace;
};

/// Flags a diverging run: delta_x rising for 50 consecutive iterations while
/// gaining more than 10x over that window, once the relative step itself is
/// pathologically large (a converging run shows transient small-scale rises
/// that must not trip this). Non-finite deltas are reported immediately.
class DivergenceDetector {
public:
    bool update(double delta) {
        if (!std::isfinite(delta)) return true;
        if (count_ > 0 && delta > history_[(count_ - 1) % kWindow])
            ++streak_;
        else
            streak_ = 0;
        history_[count_ % kWindow] = delta;
        ++count_;
        if (streak_ >= kWindow - 1 && count_ > kWindow && delta > 10.0) {
            const double old = history_[count_ % kWindow]; // 50 updates ago
            if (delta > 10.0 * old) return true;
        }
        return false;
    }

private:
    static constexpr int kWindow = 51;
    double history_[kWindow] = {};
    int streak_ = 0;
    long count_ = 0;
};

/// ADMM variables. rho is the stacked multiplier partitioned to match
/// t = (t1; t2; t3).
struct SolverState {
    std::vector<double> x;    // n
    std::vector<double> t1;   // 2n, [horizontal; vertical]
    std::vector<double> t2;   // m
    std::vector<double> t3;   // n
    std::vector<double> rho1; // 2n
    std::vector<double> rho2; // m
    std::vector<double> rho3; // n
    int iter = 0;
    double delta_x = 0.0;
};

/// Two-block ADMM for min TV(x) + mu KL(g(Hx)+b; y) s.t. x >= 0.
/// The x-subproblem is solved exactly in the Fourier domain when H is a
/// periodic convolution, and by one majorant gradient step (linearized ADMM)
/// otherwise. Exposed as a class so tests can drive single updates.
class AdmmSolver {
public:
    AdmmSolver(ForwardModel model, ImageGrid y, SolverConfig config)
        : model_(std::move(model)), y_(std::move(y)), cfg_(config) {
        model_.validate();
        if (!(cfg_.mu > 0.0)) throw std::invalid_argument("AdmmSolver: mu must be positive");
        if (!(cfg_.tol > 0.0)) throw std::invalid_argument("AdmmSolver: tol must be positive");
        if (cfg_.max_iter < 1) throw std::invalid_argument("AdmmSolver: max_iter must be >= 1");
        const ImagingOperator& H = *model_.op;
        if (y_.rows() != H.out_rows() || y_.cols() != H.out_cols())
            throw std::invalid_argument("AdmmSolver: data shape does not match operator");
        for (std::size_t k = 0; k < y_.size(); ++k)
            if (y_[k] < 0.0 || y_[k] != std::floor(y_[k]))
                throw std::invalid_argument("AdmmSolver: counts must be nonnegative integers");

        n1_ = H.in_rows();
        n2_ = H.in_cols();
        n_ = n1_ * n2_;
        m_ = H.m();

        mode_ = cfg_.x_update;
        if (mode_ == XUpdateMode::automatic)
            mode_ = H.fourier_diagonal() ? XUpdateMode::exact_fft : XUpdateMode::linearized;
        if (mode_ == XUpdateMode::exact_fft && !H.fourier_diagonal())
            throw unsupported_configuration_error(
                "exact_fft x-update needs a periodic convolution operator");

        if (cfg_.beta && !(*cfg_.beta > 0.0))
            throw std::invalid_argument("AdmmSolver: beta must be positive");
        if (cfg_.eta && !(*cfg_.eta > 0.0))
            throw std::invalid_argument("AdmmSolver: eta must be positive");
        // default penalties, floored so the TV-dominated (small mu) regime
        // still enforces its constraints at a useful rate
        beta_ = cfg_.beta ? *cfg_.beta
                          : (model_.g == Nonlinearity::identity
                                 ? std::max(0.1 * cfg_.mu, 0.1)
                                 : std::max(3.0 * cfg_.mu, 0.3));
        prox_ = {beta_, cfg_.mu / beta_, model_.i0};
        if (mode_ == XUpdateMode::linearized)
            eta_ = cfg_.eta ? *cfg_.eta : m1_operator_norm_sq(H);

        if (mode_ == XUpdateMode::exact_fft) {
            plan_ = std::make_unique<fft::Plan2D>(n1_, n2_);
            build_transfer();
        }

        allocate();
        initialize();
    }

    SolveResult run() {
        SolveResult res;
        res.beta_used = beta_;
        res.eta_used = eta_;
        res.mode_used = mode_;
        res.objective_initial = objective_at_current_x();

        DivergenceDetector detector;
        bool converged = false;

        for (int k = 1; k <= cfg_.max_iter; ++k) {
            x_prev_ = st_.x;
            x_update();
            t_update();
            dual_update();
            st_.iter = k;

            double diff = 0.0, base = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                const double d = st_.x[i] - x_prev_[i];
                diff += d * d;
                base += x_prev_[i] * x_prev_[i];
            }
            st_.delta_x = std::sqrt(diff) / std::max(std::sqrt(base), 1e-300);

            if (cfg_.record_trace)
                res.trace.push_back(
                    {k, st_.delta_x, constraint_residual(), objective_at_current_x()});

            if (!std::isfinite(diff) || detector.update(st_.delta_x))
                throw solver_divergence_error(beta_, k);

            // t0 = M1 x0 makes the first x-update a fixed point, so delta_x
            // only becomes meaningful from the second sweep on
            if (k > 1 && st_.delta_x < cfg_.tol) {
                converged = true;
                break;
            }
        }

        res.iterations = st_.iter;
        res.converged = converged;
        res.final_delta_x = st_.delta_x;
        res.final_constraint_residual = constraint_residual();
        res.lambert_overflows = lambert_overflows_;
        res.x_star = ImageGrid(n1_, n2_, st_.t3);
        res.objective_final = objective_at(res.x_star);
        return res;
    }

    // --- single-update API (used by the solver loop and by tests) ---

    void x_update() {
        if (mode_ == XUpdateMode::exact_fft)
            x_update_exact();
        else
            x_update_linearized();
    }

    /// Exact minimizer of (1/2)||M1 x - v||^2: solves
    /// (D^T D + H^T H + I) x = M1^T v through the 2-D DFT diagonalization.
    void x_update_exact() {
        // rhs_spatial = Dh^T v1h + Dv^T v1v + v3
        for (std::size_t k = 0; k < 2 * n_; ++k) v1_[k] = st_.t1[k] - st_.rho1[k] / beta_;
        for (std::size_t k = 0; k < m_; ++k) v2_[k] = st_.t2[k] - st_.rho2[k] / beta_;
        for (std::size_t k = 0; k < n_; ++k) v3_[k] = st_.t3[k] - st_.rho3[k] / beta_;
        grad::adjoint(v1_.data(), v1_.data() + n_, work_n_.data(), n1_, n2_);
        for (std::size_t k = 0; k < n_; ++k) work_n_[k] += v3_[k];

        auto& fx = cbuf_a_;
        auto& fv2 = cbuf_b_;
        for (std::size_t k = 0; k < n_; ++k) fx[k] = {work_n_[k], 0.0};
        plan_->forward(fx.data());
        for (std::size_t k = 0; k < m_; ++k) fv2[k] = {v2_[k], 0.0};
        plan_->forward(fv2.data());

        const auto& spec = model_.op->spectrum();
        for (std::size_t k = 0; k < n_; ++k) {
            fx[k] = (fx[k] + std::conj(spec[k]) * fv2[k]) / transfer_[k];
            fv2[k] = spec[k] * fx[k]; // spectrum of H x, reused below
        }
        plan_->inverse(fx.data());
        plan_->inverse(fv2.data());
        for (std::size_t k = 0; k < n_; ++k) st_.x[k] = fx[k].real();
        for (std::size_t k = 0; k < m_; ++k) hx_[k] = fv2[k].real();
        grad::forward(st_.x.data(), dx_.data(), dx_.data() + n_, n1_, n2_);
    }

    /// One gradient step on the quadratic tangent majorant:
    /// x+ = x - (1/eta) M1^T (M1 x - v), valid whenever eta >= ||M1||^2.
    void x_update_linearized() {
        for (std::size_t k = 0; k < 2 * n_; ++k)
            v1_[k] = dx_[k] - (st_.t1[k] - st_.rho1[k] / beta_);
        for (std::size_t k = 0; k < m_; ++k) v2_[k] = hx_[k] - (st_.t2[k] - st_.rho2[k] / beta_);
        for (std::size_t k = 0; k < n_; ++k)
            v3_[k] = st_.x[k] - (st_.t3[k] - st_.rho3[k] / beta_);

        grad::adjoint(v1_.data(), v1_.data() + n_, work_n_.data(), n1_, n2_);
        model_.op->apply_adjoint(v2_.data(), work_n2_.data());
        const double inv_eta = 1.0 / eta_;
        for (std::size_t k = 0; k < n_; ++k)
            st_.x[k] -= inv_eta * (work_n_[k] + work_n2_[k] + v3_[k]);

        grad::forward(st_.x.data(), dx_.data(), dx_.data() + n_, n1_, n2_);
        model_.op->apply(st_.x.data(), hx_.data());
    }

    /// Separable prox updates of the three t-blocks at q = M1 x + rho/beta.
    void t_update() {
        const double inv_beta = 1.0 / prox_.beta;
        for (std::size_t i = 0; i < n_; ++i) {
            const double qh = dx_[i] + st_.rho1[i] * inv_beta;
            const double qv = dx_[n_ + i] + st_.rho1[n_ + i] * inv_beta;
            prox_tv_pair(qh, qv, prox_.beta, st_.t1[i], st_.t1[n_ + i]);
        }
        if (model_.g == Nonlinearity::identity) {
            for (std::size_t k = 0; k < m_; ++k) {
                const double q = hx_[k] + st_.rho2[k] * inv_beta;
                st_.t2[k] = prox_kl_identity(q, y_[k], model_.background_at(k), prox_.tau);
            }
        } else {
            for (std::size_t k = 0; k < m_; ++k) {
                const double q = hx_[k] + st_.rho2[k] * inv_beta;
                st_.t2[k] =
                    prox_kl_exponential(q, y_[k], prox_.i0, prox_.tau, &lambert_overflows_);
            }
        }
        for (std::size_t k = 0; k < n_; ++k) {
            const double q = st_.x[k] + st_.rho3[k] * inv_beta;
            st_.t3[k] = q > 0.0 ? q : 0.0;
        }
    }

    /// rho <- rho + beta (M1 x - t).
    void dual_update() {
        for (std::size_t k = 0; k < 2 * n_; ++k) st_.rho1[k] += beta_ * (dx_[k] - st_.t1[k]);
        for (std::size_t k = 0; k < m_; ++k) st_.rho2[k] += beta_ * (hx_[k] - st_.t2[k]);
        for (std::size_t k = 0; k < n_; ++k) st_.rho3[k] += beta_ * (st_.x[k] - st_.t3[k]);
    }

    SolverState& state() noexcept { return st_; }
    const SolverState& state() const noexcept { return st_; }
    double beta() const noexcept { return beta_; }
    double eta() const noexcept { return eta_; }
    double tau() const noexcept { return prox_.tau; }
    const ProxParams& prox_params() const noexcept { return prox_; }
    XUpdateMode mode() const noexcept { return mode_; }

    /// Refresh the cached Dx and Hx after tests mutate state().x directly.
    void sync_caches() {
        grad::forward(st_.x.data(), dx_.data(), dx_.data() + n_, n1_, n2_);
        model_.op->apply(st_.x.data(), hx_.data());
    }

    /// TV-KL objective at an arbitrary nonnegative image.
    double objective_at(const ImageGrid& x) const {
        ImageGrid lam = forward_lambda(x, model_);
        GradientField g = apply_gradient(x);
        double tv = 0.0;
        for (std::size_t k = 0; k < n_; ++k) tv += std::hypot(g.dh[k], g.dv[k]);
        double kl = 0.0;
        for (std::size_t k = 0; k < m_; ++k) {
            const double l = std::max(lam[k], 1e-300);
            kl += l - y_[k];
            if (y_[k] > 0.0) kl += y_[k] * std::log(y_[k] / l);
        }
        return tv + cfg_.mu * kl;
    }

private:
    void allocate() {
        st_.x.assign(n_, 0.0);
        st_.t1.assign(2 * n_, 0.0);
        st_.t2.assign(m_, 0.0);
        st_.t3.assign(n_, 0.0);
        st_.rho1.assign(2 * n_, 0.0);
        st_.rho2.assign(m_, 0.0);
        st_.rho3.assign(n_, 0.0);
        x_prev_.assign(n_, 0.0);
        dx_.assign(2 * n_, 0.0);
        hx_.assign(m_, 0.0);
        v1_.assign(2 * n_, 0.0);
        v2_.assign(m_, 0.0);
        v3_.assign(n_, 0.0);
        work_n_.assign(n_, 0.0);
        work_n2_.assign(n_, 0.0);
        if (mode_ == XUpdateMode::exact_fft) {
            cbuf_a_.assign(n_, fft::cdouble{0.0, 0.0});
            cbuf_b_.assign(n_, fft::cdouble{0.0, 0.0});
        }
    }

    /// x0: adjoint back-projection rescaled to the data mean (restoration)
    /// or a flat image at the crude mean attenuation (transmission CT);
    /// t0 = M1 x0, rho0 = 0. The iteration is insensitive to this choice,
    /// it only has to be deterministic.
    void initialize() {
        if (model_.g == Nonlinearity::identity) {
            model_.op->apply_adjoint(y_.data(), st_.x.data());
            double ymean = 0.0, xmean = 0.0;
            for (std::size_t k = 0; k < m_; ++k) ymean += y_[k];
            for (std::size_t k = 0; k < n_; ++k) xmean += st_.x[k];
            ymean /= double(m_);
            xmean /= double(n_);
            if (xmean > 0.0 && ymean > 0.0) {
                const double s = ymean / xmean;
                for (std::size_t k = 0; k < n_; ++k) st_.x[k] = std::max(st_.x[k] * s, 0.0);
            } else {
                std::fill(st_.x.begin(), st_.x.end(), std::max(ymean, 1e-6));
            }
        } else {
            std::vector<double> ones(n_, 1.0), path(m_);
            model_.op->apply(ones.data(), path.data());
            double num = 0.0, den = 0.0;
            for (std::size_t k = 0; k < m_; ++k) {
                if (path[k] <= 0.0) continue;
                num += std::max(0.0, -std::log((y_[k] + 0.5) / model_.i0));
                den += path[k];
            }
            const double atten = den > 0.0 ? num / den : 0.0;
            std::fill(st_.x.begin(), st_.x.end(), atten);
        }
        sync_caches();
        std::copy(dx_.begin(), dx_.end(), st_.t1.begin());
        std::copy(hx_.begin(), hx_.end(), st_.t2.begin());
        std::copy(st_.x.begin(), st_.x.end(), st_.t3.begin());
    }

    void build_transfer() {
        transfer_.assign(n_, 0.0);
        const auto& spec = model_.op->spectrum();
        constexpr double two_pi = 6.283185307179586476925286766559;
        for (std::size_t i = 0; i < n1_; ++i) {
            const double sv = 2.0 - 2.0 * std::cos(two_pi * double(i) / double(n1_));
            for (std::size_t j = 0; j < n2_; ++j) {
                const double sh = 2.0 - 2.0 * std::cos(two_pi * double(j) / double(n2_));
                transfer_[i * n2_ + j] = sh + sv + std::norm(spec[i * n2_ + j]) + 1.0;
            }
        }
    }

    double constraint_residual() const {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < 2 * n_; ++k) {
            const double d = dx_[k] - st_.t1[k];
            num += d * d;
            den += st_.t1[k] * st_.t1[k];
        }
        for (std::size_t k = 0; k < m_; ++k) {
            const double d = hx_[k] - st_.t2[k];
            num += d * d;
            den += st_.t2[k] * st_.t2[k];
        }
        for (std::size_t k = 0; k < n_; ++k) {
            const double d = st_.x[k] - st_.t3[k];
            num += d * d;
            den += st_.t3[k] * st_.t3[k];
        }
        return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
    }

    /// Objective evaluated with the cached Dx and Hx; the iterate may dip
    /// negative, so lambda is floored for the log only.
    double objective_at_current_x() const {
        double tv = 0.0;
        for (std::size_t i = 0; i < n_; ++i) tv += std::hypot(dx_[i], dx_[n_ + i]);
        double kl = 0.0;
        for (std::size_t k = 0; k < m_; ++k) {
            double l = model_.g == Nonlinearity::identity
                           ? hx_[k] + model_.background_at(k)
                           : model_.i0 * std::exp(-hx_[k]);
            l = std::max(l, 1e-300);
            kl += l - y_[k];
            if (y_[k] > 0.0) kl += y_[k] * std::log(y_[k] / l);
        }
        return tv + cfg_.mu * kl;
    }

    ForwardModel model_;
    ImageGrid y_;
    SolverConfig cfg_;
    std::size_t n1_ = 0, n2_ = 0, n_ = 0, m_ = 0;
    XUpdateMode mode_ = XUpdateMode::automatic;
    double beta_ = 0.0, eta_ = 0.0;
    ProxParams prox_;
    long lambert_overflows_ = 0;

    SolverState st_;
    std::vector<double> x_prev_, dx_, hx_, v1_, v2_, v3_, work_n_, work_n2_;
    std::unique_ptr<fft::Plan2D> plan_;
    std::vector<double> transfer_;
    std::vector<fft::cdouble> cbuf_a_, cbuf_b_;
};

/// One-call front end: run the ADMM to convergence for a given mu.
inline SolveResult solve(const ForwardModel& model, const ImageGrid& y,
                         const SolverConfig& config) {
    AdmmSolver solver(model, y, config);
    return solver.run();
}

} // namespace tvkl
