#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvkl/admm.hpp"
#include "tvkl/image.hpp"
#include "tvkl/metrics.hpp"
#include "tvkl/poisson.hpp"
#include "tvkl/threading.hpp"
#include "tvkl/whiteness.hpp"

namespace tvkl {

/// Strictly increasing, positive mu values (log-spaced by default).
struct MuGrid {
    std::vector<double> values;

    void validate() const {
        if (values.empty()) throw std::invalid_argument("MuGrid: empty grid");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0)) throw std::invalid_argument("MuGrid: mu must be positive");
            if (i > 0 && !(values[i] > values[i - 1]))
                throw std::invalid_argument("MuGrid: values must be strictly increasing");
        }
    }

    static MuGrid log_spaced(double lo, double hi, std::size_t count) {
        if (!(lo > 0.0) || !(hi > lo) || count < 1)
            throw std::invalid_argument("MuGrid::log_spaced: need 0 < lo < hi, count >= 1");
        MuGrid g;
        g.values.resize(count);
        if (count == 1) {
            g.values[0] = lo;
            return g;
        }
        const double llo = std::log(lo), lhi = std::log(hi);
        for (std::size_t k = 0; k < count; ++k)
            g.values[k] = std::exp(llo + (lhi - llo) * double(k) / double(count - 1));
        return g;
    }
};

struct SolverDiagnostics {
    int iterations = 0;
    bool converged = false;
    double final_delta_x = 0.0;
    double final_constraint_residual = 0.0;
    long lambert_overflows = 0;
    int lambda_clamped = 0; // non-positive lambda entries floored in the record
};

/// Everything the selection rules need about one mu: the reconstruction, the
/// whiteness of its standardized residual, the discrepancy, the Monte-Carlo
/// discrepancy target and the (ground-truth) quality scores.
struct SelectionRecord {
    double mu = 0.0;
    ImageGrid x_star;
    double whiteness = 0.0;
    double discrepancy = 0.0;
    double mc_delta = 0.0;
    double snr = std::numeric_limits<double>::quiet_NaN();
    double ssim = std::numeric_limits<double>::quiet_NaN();
    SolverDiagnostics diag;
};

struct EvaluateOptions {
    int mc_samples = 100;
    std::uint64_t seed = 1;
    long whiteness_max_lag = -1;        // -1: all lags
    const ImageGrid* ground_truth = nullptr;
    double truth_scale = 1.0;           // x_star/truth_scale is scored against the truth
    SsimConfig ssim_config = {};
};

/// Residual statistics of a candidate reconstruction, shared by the solver
/// path and by oracle tests that bypass the solver. mu_index keys the
/// Monte-Carlo stream so grid evaluations are order- and thread-independent.
inline SelectionRecord make_record(double mu, ImageGrid x, const ForwardModel& model,
                                   const ImageGrid& y, const EvaluateOptions& opts,
                                   std::size_t mu_index = 0) {
    SelectionRecord rec;
    rec.mu = mu;
    rec.x_star = std::move(x);

    ImageGrid lambda = forward_lambda(rec.x_star, model);
    for (std::size_t k = 0; k < lambda.size(); ++k) {
        if (!(lambda[k] > 0.0)) {
            lambda[k] = 1e-12;
            ++rec.diag.lambda_clamped;
        }
    }
    const StandardizedResidual z = standardize(y, lambda);
    rec.whiteness = whiteness_measure(z.z, opts.whiteness_max_lag);
    rec.discrepancy = kl_divergence(lambda, y);
    rec.mc_delta = mc_expected_kl(lambda, opts.mc_samples, opts.seed,
                                  make_stream(StreamTag::mc_discrepancy, mu_index));
    if (opts.ground_truth) {
        ImageGrid scaled = rec.x_star;
        if (opts.truth_scale != 1.0)
            for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] /= opts.truth_scale;
        const QualityReport q =
            score_reconstruction(scaled, *opts.ground_truth, opts.ssim_config);
        rec.snr = q.snr;
        rec.ssim = q.ssim;
    }
    return rec;
}

/// Solve at one mu and assemble its SelectionRecord.
inline SelectionRecord evaluate_mu(double mu, const ForwardModel& model, const ImageGrid& y,
                                   SolverConfig config, const EvaluateOptions& opts,
                                   std::size_t mu_index = 0) {
    config.mu = mu;
    config.record_trace = false;
    const SolveResult sol = solve(model, y, config);
    SelectionRecord rec = make_record(mu, sol.x_star, model, y, opts, mu_index);
    rec.diag.iterations = sol.iterations;
    rec.diag.converged = sol.converged;
    rec.diag.final_delta_x = sol.final_delta_x;
    rec.diag.final_constraint_residual = sol.final_constraint_residual;
    rec.diag.lambert_overflows = sol.lambert_overflows;
    return rec;
}

/// Evaluate a whole grid; eta is estimated once and shared. Workers claim
/// grid points in any order, results land by index.
inline std::vector<SelectionRecord> evaluate_grid(const MuGrid& grid, const ForwardModel& model,
                                                  const ImageGrid& y, SolverConfig config,
                                                  const EvaluateOptions& opts,
                                                  unsigned n_threads = 1) {
    grid.validate();
    model.validate();
    if (!config.eta && !model.op->fourier_diagonal() &&
        config.x_update != XUpdateMode::exact_fft)
        config.eta = m1_operator_norm_sq(*model.op);
    std::vector<SelectionRecord> records(grid.values.size());
    parallel_for(grid.values.size(), n_threads, [&](std::size_t i) {
        records[i] = evaluate_mu(grid.values[i], model, y, config, opts, i);
    });
    return records;
}

struct Selection {
    double mu = 0.0;
    std::size_t index = 0;
    bool no_crossing = false; // discrepancy never reached its target on the grid
};

/// Poisson whiteness principle: argmin of W(mu); ties resolve toward the
/// larger mu (stronger regularization).
inline Selection select_pwp(const std::vector<SelectionRecord>& records) {
    if (records.empty()) throw std::invalid_argument("select_pwp: empty grid");
    std::size_t best = 0;
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].whiteness <= records[best].whiteness) best = i;
    return {records[best].mu, best, false};
}

/// Discrepancy principle with the half-pixel-count target: the grid value
/// minimizing |D(mu) - m/2|. When D never crosses m/2 the boundary point is
/// returned with a warning flag.
inline Selection select_adp(const std::vector<SelectionRecord>& records, std::size_t m_pixels) {
    if (records.empty()) throw std::invalid_argument("select_adp: empty grid");
    const double target = double(m_pixels) / 2.0;
    std::size_t best = 0;
    bool above = false, below = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].discrepancy > target) above = true;
        if (records[i].discrepancy < target) below = true;
        if (std::fabs(records[i].discrepancy - target) <
            std::fabs(records[best].discrepancy - target))
            best = i;
    }
    return {records[best].mu, best, !(above && below)};
}

/// Bisection refinement of the ADP crossing between adjacent grid points,
/// re-running the solver through `eval`; stops at a relative mu width of
/// rel_tol. Falls back to the grid answer when there is no sign change.
inline Selection refine_adp(const std::vector<SelectionRecord>& records, std::size_t m_pixels,
                            const std::function<SelectionRecord(double)>& eval,
                            double rel_tol = 1e-2) {
    Selection coarse = select_adp(records, m_pixels);
    if (coarse.no_crossing) return coarse;
    const double target = double(m_pixels) / 2.0;
    // locate a bracketing pair around the best index
    std::size_t lo_i = coarse.index, hi_i = coarse.index;
    const auto sign = [&](std::size_t i) { return records[i].discrepancy >= target; };
    if (coarse.index > 0 && sign(coarse.index - 1) != sign(coarse.index))
        lo_i = coarse.index - 1;
    else if (coarse.index + 1 < records.size() && sign(coarse.index + 1) != sign(coarse.index))
        hi_i = coarse.index + 1;
    else
        return coarse;

    double lo = records[lo_i].mu, hi = records[hi_i].mu;
    bool lo_side = sign(lo_i);
    while (hi / lo - 1.0 > rel_tol) {
        const double mid = std::sqrt(lo * hi);
        const SelectionRecord rec = eval(mid);
        if ((rec.discrepancy >= target) == lo_side)
            lo = mid;
        else
            hi = mid;
    }
    Selection out = coarse;
    out.mu = std::sqrt(lo * hi);
    return out;
}

/// Monte-Carlo discrepancy rule: the grid value minimizing
/// |D(mu) - mc_delta(mu)|, with mc_delta the sampled expected discrepancy at
/// lambda*(mu). Shares ADP's no-crossing reporting.
inline Selection select_mcdp(const std::vector<SelectionRecord>& records) {
    if (records.empty()) throw std::invalid_argument("select_mcdp: empty grid");
    std::size_t best = 0;
    bool above = false, below = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double gap = records[i].discrepancy - records[i].mc_delta;
        if (gap > 0.0) above = true;
        if (gap < 0.0) below = true;
        if (std::fabs(gap) < std::fabs(records[best].discrepancy - records[best].mc_delta))
            best = i;
    }
    return {records[best].mu, best, !(above && below)};
}

} // namespace tvkl
