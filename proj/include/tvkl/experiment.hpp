#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tvkl/admm.hpp"
#include "tvkl/errors.hpp"
#include "tvkl/io.hpp"
#include "tvkl/phantoms.hpp"
#include "tvkl/poisson.hpp"
#include "tvkl/radon.hpp"
#include "tvkl/selection.hpp"

namespace tvkl {

inline constexpr const char* kVersion = "tvkl 0.1.0";

/// Everything a run needs, as flat key = value pairs. Unknown keys are
/// rejected so config typos fail loudly.
struct ExperimentConfig {
    std::string task = "ir"; // ir | ct
    std::string phantom;     // cells | satellite | shepp-logan | <file.pgm>
    std::size_t rows = 64, cols = 64;
    double counts = -1.0;     // kappa (ir) or I0 (ct); task default if < 0
    double background = -1.0; // task default if < 0: 2e-3 (ir), 0 (ct)
    int blur_band = 5;
    double blur_sigma = 1.0;
    std::size_t n_angles = 60;
    double angle_span = -1.0; // task default: pi (parallel), 2*pi (fan)
    std::size_t n_detectors = 95;
    double detector_pixel_size = 0.2;
    double image_pixel_size = 0.2;
    std::string beam = "parallel";
    double source_to_center = 300.0;
    double center_to_detector = 200.0;
    double grid_min = -1.0, grid_max = -1.0;
    std::size_t grid_count = 30;
    double beta = 0.0; // 0: solver default policy
    double tol = 1e-6;
    int max_iter = 0; // 0: task default (ir 3000, ct 20000)
    std::vector<std::uint64_t> seeds = {1};
    std::string out = "out";
    unsigned threads = 0; // 0: hardware concurrency
    int mc_samples = 100;
    long whiteness_max_lag = -1;
    bool adp_refine = false;
    std::uint64_t phantom_seed = 1234;
    bool export_autocorr = false;
    bool export_trace = false;
    std::string export_projector;

    void set(const std::string& key, const std::string& value) {
        try {
            if (key == "task")
                task = value;
            else if (key == "phantom")
                phantom = value;
            else if (key == "rows")
                rows = std::stoul(value);
            else if (key == "cols")
                cols = std::stoul(value);
            else if (key == "counts")
                counts = std::stod(value);
            else if (key == "background")
                background = std::stod(value);
            else if (key == "blur_band")
                blur_band = std::stoi(value);
            else if (key == "blur_sigma")
                blur_sigma = std::stod(value);
            else if (key == "n_angles")
                n_angles = std::stoul(value);
            else if (key == "angle_span")
                angle_span = parse_span(value);
            else if (key == "n_detectors")
                n_detectors = std::stoul(value);
            else if (key == "detector_pixel_size")
                detector_pixel_size = std::stod(value);
            else if (key == "image_pixel_size")
                image_pixel_size = std::stod(value);
            else if (key == "beam")
                beam = value;
            else if (key == "grid")
                parse_grid(value);
            else if (key == "source_to_center")
                source_to_center = std::stod(value);
            else if (key == "center_to_detector")
                center_to_detector = std::stod(value);
            else if (key == "beta")
                beta = std::stod(value);
            else if (key == "tol")
                tol = std::stod(value);
            else if (key == "max_iter")
                max_iter = std::stoi(value);
            else if (key == "seeds")
                parse_seeds(value);
            else if (key == "out")
                out = value;
            else if (key == "threads")
                threads = unsigned(std::stoul(value));
            else if (key == "mc_samples")
                mc_samples = std::stoi(value);
            else if (key == "whiteness_max_lag")
                whiteness_max_lag = std::stol(value);
            else if (key == "adp_refine")
                adp_refine = parse_bool(value);
            else if (key == "phantom_seed")
                phantom_seed = std::stoull(value);
            else if (key == "export_autocorr")
                export_autocorr = parse_bool(value);
            else if (key == "export_trace")
                export_trace = parse_bool(value);
            else if (key == "export_projector")
                export_projector = value;
            else
                throw config_error("unknown config key: " + key);
        } catch (const config_error&) {
            throw;
        } catch (const std::exception&) {
            throw config_error("bad value for key '" + key + "': " + value);
        }
    }

    void load_file(const std::filesystem::path& path) {
        for (const auto& [k, v] : io::read_key_values(path)) set(k, v);
    }

    /// Fill task-dependent defaults and validate cross-field constraints.
    void finalize() {
        if (task != "ir" && task != "ct") throw config_error("task must be 'ir' or 'ct'");
        if (beam != "parallel" && beam != "fan")
            throw config_error("beam must be 'parallel' or 'fan'");
        const bool ct = task == "ct";
        if (phantom.empty()) phantom = ct ? "shepp-logan" : "cells";
        if (counts < 0.0) counts = ct ? 1000.0 : 5.0;
        if (background < 0.0) background = ct ? 0.0 : 2e-3;
        if (angle_span < 0.0)
            angle_span = beam == "fan" ? 2.0 * RadonGeometry::kPi : RadonGeometry::kPi;
        if (grid_min < 0.0) grid_min = ct ? 1e-3 : 1e-2;
        if (grid_max < 0.0) grid_max = 1e2;
        if (max_iter == 0) max_iter = ct ? 20000 : 3000;
        if (ct) {
            if (background != 0.0) throw config_error("ct requires background = 0");
            if (!(counts > 0.0)) throw config_error("ct requires positive counts (I0)");
        } else {
            if (!(counts > 0.0) && !(background > 0.0))
                throw config_error("ir requires counts > 0 or background > 0");
            if (counts < 0.0) throw config_error("counts must be nonnegative");
        }
        if (rows == 0 || cols == 0) throw config_error("rows and cols must be positive");
        if (seeds.empty()) throw config_error("need at least one seed");
        if (mc_samples < 1) throw config_error("mc_samples must be >= 1");
        if (!(tol > 0.0)) throw config_error("tol must be positive");
        if (max_iter < 1) throw config_error("max_iter must be >= 1");
        if (!(grid_min > 0.0) || !(grid_max >= grid_min) || grid_count < 1)
            throw config_error("grid must satisfy 0 < min <= max, count >= 1");
    }

    std::vector<std::pair<std::string, std::string>> echo() const {
        std::vector<std::pair<std::string, std::string>> kv;
        kv.emplace_back("task", task);
        kv.emplace_back("phantom", phantom);
        kv.emplace_back("rows", std::to_string(rows));
        kv.emplace_back("cols", std::to_string(cols));
        kv.emplace_back("counts", io::fmt(counts));
        kv.emplace_back("background", io::fmt(background));
        if (task == "ir") {
            kv.emplace_back("blur_band", std::to_string(blur_band));
            kv.emplace_back("blur_sigma", io::fmt(blur_sigma));
        } else {
            kv.emplace_back("n_angles", std::to_string(n_angles));
            kv.emplace_back("angle_span", io::fmt(angle_span));
            kv.emplace_back("n_detectors", std::to_string(n_detectors));
            kv.emplace_back("detector_pixel_size", io::fmt(detector_pixel_size));
            kv.emplace_back("image_pixel_size", io::fmt(image_pixel_size));
            kv.emplace_back("beam", beam);
            if (beam == "fan") {
                kv.emplace_back("source_to_center", io::fmt(source_to_center));
                kv.emplace_back("center_to_detector", io::fmt(center_to_detector));
            }
        }
        kv.emplace_back("grid", io::fmt(grid_min) + "," + io::fmt(grid_max) + "," +
                                    std::to_string(grid_count));
        kv.emplace_back("beta", io::fmt(beta));
        kv.emplace_back("tol", io::fmt(tol));
        kv.emplace_back("max_iter", std::to_string(max_iter));
        std::string slist;
        for (std::size_t i = 0; i < seeds.size(); ++i)
            slist += (i ? "," : "") + std::to_string(seeds[i]);
        kv.emplace_back("seeds", slist);
        kv.emplace_back("out", out);
        kv.emplace_back("threads", std::to_string(threads));
        kv.emplace_back("mc_samples", std::to_string(mc_samples));
        kv.emplace_back("whiteness_max_lag", std::to_string(whiteness_max_lag));
        kv.emplace_back("adp_refine", adp_refine ? "true" : "false");
        kv.emplace_back("phantom_seed", std::to_string(phantom_seed));
        kv.emplace_back("export_autocorr", export_autocorr ? "true" : "false");
        kv.emplace_back("export_trace", export_trace ? "true" : "false");
        if (!export_projector.empty()) kv.emplace_back("export_projector", export_projector);
        return kv;
    }

private:
    static bool parse_bool(const std::string& v) {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw config_error("expected boolean, got: " + v);
    }
    static double parse_span(const std::string& v) {
        if (v == "pi") return RadonGeometry::kPi;
        if (v == "2pi") return 2.0 * RadonGeometry::kPi;
        return std::stod(v);
    }
    void parse_grid(const std::string& v) {
        std::istringstream ss(v);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw config_error("grid expects min,max,count");
        grid_min = std::stod(a);
        grid_max = std::stod(b);
        grid_count = std::stoul(c);
    }
    void parse_seeds(const std::string& v) {
        seeds.clear();
        std::istringstream ss(v);
        std::string tok;
        while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
    }
};

// ---------------------------------------------------------------------------
// Problem assembly
// ---------------------------------------------------------------------------

struct BuiltProblem {
    ImageGrid truth; // phantom in [0, 1]
    ForwardModel model;
    double truth_scale = 1.0; // reconstructions estimate truth * truth_scale
};

inline ImageGrid make_phantom(const ExperimentConfig& cfg) {
    switch (parse_phantom_kind(cfg.phantom)) {
    case PhantomKind::cells:
        return cells_phantom(cfg.rows, cfg.cols, cfg.phantom_seed);
    case PhantomKind::satellite:
        return satellite_phantom(cfg.rows, cfg.cols);
    case PhantomKind::shepp_logan:
        return shepp_logan_phantom(cfg.rows, cfg.cols);
    case PhantomKind::file:
        break;
    }
    ImageGrid img = io::read_pgm(cfg.phantom);
    if (img.rows() != cfg.rows || img.cols() != cfg.cols)
        throw config_error("phantom file shape " + std::to_string(img.rows()) + "x" +
                           std::to_string(img.cols()) + " does not match rows/cols");
    return img;
}

inline BuiltProblem build_problem(const ExperimentConfig& cfg) {
    BuiltProblem p;
    p.truth = make_phantom(cfg);
    if (cfg.task == "ir") {
        auto op = std::make_shared<BlurOperator>(
            cfg.rows, cfg.cols, make_gaussian_kernel(cfg.blur_band, cfg.blur_sigma));
        p.model = make_identity_model(op, cfg.background);
        p.truth_scale = cfg.counts;
    } else {
        RadonGeometry geom;
        geom.n_angles = cfg.n_angles;
        geom.angles = equally_spaced_angles(cfg.n_angles, cfg.angle_span);
        geom.n_detectors = cfg.n_detectors;
        geom.detector_pixel_size = cfg.detector_pixel_size;
        geom.image_pixel_size = cfg.image_pixel_size;
        geom.beam = cfg.beam == "fan" ? BeamKind::fan : BeamKind::parallel;
        geom.source_to_center = cfg.source_to_center;
        geom.center_to_detector = cfg.center_to_detector;
        auto op = std::make_shared<RadonOperator>(std::move(geom), cfg.rows, cfg.cols);
        p.model = make_beer_lambert_model(op, cfg.counts);
        p.truth_scale = 1.0;
    }
    return p;
}

/// Noise-free data for the configured problem: H(kappa x) + b or I0 e^{-Hx}.
inline ImageGrid expected_counts(const BuiltProblem& p) {
    ImageGrid scaled = p.truth;
    for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] *= p.truth_scale;
    return forward_lambda(scaled, p.model);
}

inline SolverConfig solver_config_of(const ExperimentConfig& cfg) {
    SolverConfig sc;
    if (cfg.beta > 0.0) sc.beta = cfg.beta; // 0 in the config means "policy default"
    sc.tol = cfg.tol;
    sc.max_iter = cfg.max_iter;
    sc.record_trace = false;
    return sc;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

/// The manifest doubles as a config file: settable keys are plain key = value
/// lines (feed it back through --config to replay the run), run metadata goes
/// into comments.
inline void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg,
                           const std::vector<std::pair<std::string, std::string>>& extra) {
    auto f = io::open_out(path);
    f << "# " << kVersion << " run manifest\n";
    for (const auto& [k, v] : cfg.echo()) f << k << " = " << v << "\n";
    if (cfg.task == "ct" && cfg.beam == "fan") f << "# fan_detector = flat\n";
    for (const auto& [k, v] : extra) f << "# " << k << " = " << v << "\n";
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

inline std::filesystem::path seed_dir(const ExperimentConfig& cfg, std::uint64_t seed) {
    return std::filesystem::path(cfg.out) / ("seed_" + std::to_string(seed));
}

/// Build the phantom, sample one observation per seed and write everything
/// needed to reproduce or sweep the run.
inline void run_generate(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    BuiltProblem p = build_problem(cfg);
    const ImageGrid lambda = expected_counts(p);
    std::filesystem::create_directories(cfg.out);

    io::ObservationHeader hdr;
    hdr.rows = lambda.rows();
    hdr.cols = lambda.cols();
    hdr.model_kind = p.model.g == Nonlinearity::identity ? "identity" : "beer_lambert";
    hdr.counts = cfg.counts;
    hdr.background = cfg.background;

    for (std::uint64_t seed : cfg.seeds) {
        const auto dir = seed_dir(cfg, seed);
        std::filesystem::create_directories(dir);
        const ImageGrid y = sample_poisson(lambda, seed);
        hdr.seed = seed;
        io::write_observation(dir / "y.txt", y, hdr);
        io::write_pgm16(dir / "y.pgm", y);
        io::write_raw_f64(dir / "truth.f64", p.truth);
        io::write_pgm16(dir / "truth.pgm", p.truth);
        io::write_raw_f64(dir / "lambda.f64", lambda);
    }
    if (!cfg.export_projector.empty()) {
        const auto* radon = dynamic_cast<const RadonOperator*>(p.model.op.get());
        if (!radon) throw config_error("export_projector is only meaningful for task = ct");
        io::write_sparse_coo(cfg.export_projector, radon->matrix());
    }

    std::vector<std::pair<std::string, std::string>> extra;
    extra.emplace_back("stage", "generate");
    if (const auto* radon = dynamic_cast<const RadonOperator*>(p.model.op.get()))
        extra.emplace_back("zero_rays", std::to_string(radon->zero_ray_count()));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    extra.emplace_back("wall_seconds", io::fmt(secs));
    write_manifest(std::filesystem::path(cfg.out) / "manifest.txt", cfg, extra);
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepOutcome {
    std::vector<SelectionRecord> records;
    Selection pwp, adp, mcdp;
    bool interior_minimum = true; // false: W is smallest at a grid endpoint
};

/// Evaluate the model over the mu grid and apply all three selection rules.
inline SweepOutcome run_sweep(const ForwardModel& model, const ImageGrid& y, const MuGrid& grid,
                              const SolverConfig& solver_cfg, const EvaluateOptions& opts,
                              unsigned threads = 1, bool adp_refine = false) {
    SweepOutcome out;
    out.records = evaluate_grid(grid, model, y, solver_cfg, opts, threads);
    out.pwp = select_pwp(out.records);
    out.adp = select_adp(out.records, y.size());
    out.mcdp = select_mcdp(out.records);
    if (adp_refine && out.records.size() > 1) {
        SolverConfig probe_cfg = solver_cfg;
        if (!probe_cfg.eta && !model.op->fourier_diagonal())
            probe_cfg.eta = m1_operator_norm_sq(*model.op);
        out.adp = refine_adp(out.records, y.size(), [&](double mu) {
            return evaluate_mu(mu, model, y, probe_cfg, opts, out.records.size());
        });
    }
    if (out.records.size() >= 2) {
        const std::size_t last = out.records.size() - 1;
        out.interior_minimum = out.pwp.index != 0 && out.pwp.index != last;
    }
    return out;
}

inline const char* kSweepCsvHeader = "mu,whiteness,discrepancy,mc_delta,snr,ssim,iterations,converged";

inline void write_sweep_csv(const std::filesystem::path& path, const SweepOutcome& sw) {
    auto f = io::open_out(path);
    f << "# tvkl sweep csv v1\n" << kSweepCsvHeader << "\n";
    for (const auto& r : sw.records) {
        f << io::fmt(r.mu) << ',' << io::fmt(r.whiteness) << ',' << io::fmt(r.discrepancy) << ','
          << io::fmt(r.mc_delta) << ',' << io::fmt(r.snr) << ',' << io::fmt(r.ssim) << ','
          << r.diag.iterations << ',' << (r.diag.converged ? 1 : 0) << '\n';
    }
    auto sel_line = [&](const char* name, const Selection& s) {
        const auto& r = sw.records[s.index];
        f << "# selection," << name << ',' << io::fmt(s.mu) << ',' << s.index << ','
          << io::fmt(r.snr) << ',' << io::fmt(r.ssim) << ',' << (s.no_crossing ? 1 : 0) << '\n';
    };
    sel_line("pwp", sw.pwp);
    sel_line("adp", sw.adp);
    sel_line("mcdp", sw.mcdp);
    f << "# interior_minimum," << (sw.interior_minimum ? 1 : 0) << '\n';
}

struct ParsedSelection {
    std::string name;
    double mu = 0.0;
    std::size_t index = 0;
    double snr = 0.0, ssim = 0.0;
    bool no_crossing = false;
};

struct ParsedSweep {
    std::vector<std::vector<double>> rows; // numeric columns of each record
    std::vector<ParsedSelection> selections;
    bool interior_minimum = true;
};

/// Reads exactly what write_sweep_csv wrote.
inline ParsedSweep read_sweep_csv(const std::filesystem::path& path) {
    auto f = io::open_in(path);
    std::string line;
    if (!std::getline(f, line) || line != "# tvkl sweep csv v1")
        throw std::runtime_error("not a tvkl sweep csv: " + path.string());
    if (!std::getline(f, line) || line != kSweepCsvHeader)
        throw std::runtime_error("unexpected sweep csv schema: " + path.string());
    ParsedSweep out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line.rfind("# selection,", 0) == 0) {
            std::istringstream ss(line.substr(std::string("# selection,").size()));
            ParsedSelection sel;
            std::string tok;
            std::getline(ss, sel.name, ',');
            std::getline(ss, tok, ',');
            sel.mu = std::stod(tok);
            std::getline(ss, tok, ',');
            sel.index = std::stoul(tok);
            std::getline(ss, tok, ',');
            sel.snr = std::stod(tok);
            std::getline(ss, tok, ',');
            sel.ssim = std::stod(tok);
            std::getline(ss, tok, ',');
            sel.no_crossing = tok == "1";
            out.selections.push_back(sel);
        } else if (line.rfind("# interior_minimum,", 0) == 0) {
            out.interior_minimum = line.back() == '1';
        } else {
            std::istringstream ss(line);
            std::vector<double> row;
            std::string tok;
            while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

/// Load each seed's observation, sweep the grid, and write CSVs plus the
/// selected reconstructions.
inline void run_sweep_files(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    BuiltProblem p = build_problem(cfg);
    MuGrid grid = MuGrid::log_spaced(cfg.grid_min, cfg.grid_max, cfg.grid_count);
    SolverConfig sc = solver_config_of(cfg);
    if (!p.model.op->fourier_diagonal()) sc.eta = m1_operator_norm_sq(*p.model.op);

    bool warned_endpoint = false;
    for (std::uint64_t seed : cfg.seeds) {
        const auto dir = seed_dir(cfg, seed);
        io::ObservationHeader hdr;
        const ImageGrid y = io::read_observation(dir / "y.txt", &hdr);

        EvaluateOptions opts;
        opts.mc_samples = cfg.mc_samples;
        opts.seed = seed;
        opts.whiteness_max_lag = cfg.whiteness_max_lag;
        opts.ground_truth = &p.truth;
        opts.truth_scale = p.truth_scale;

        const SweepOutcome sw =
            run_sweep(p.model, y, grid, sc, opts, cfg.threads, cfg.adp_refine);
        write_sweep_csv(dir / "sweep.csv", sw);

        { // whiteness and discrepancy curves for plotting
            auto wf = io::open_out(dir / "wcurve.csv");
            wf << "mu,whiteness\n";
            for (const auto& r : sw.records)
                wf << io::fmt(r.mu) << ',' << io::fmt(r.whiteness) << '\n';
            auto df = io::open_out(dir / "dcurve.csv");
            df << "mu,discrepancy,adp_target,mc_delta\n";
            const double target = double(y.size()) / 2.0;
            for (const auto& r : sw.records)
                df << io::fmt(r.mu) << ',' << io::fmt(r.discrepancy) << ',' << io::fmt(target)
                   << ',' << io::fmt(r.mc_delta) << '\n';
        }

        const std::vector<std::pair<std::string, const Selection*>> sels = {
            {"pwp", &sw.pwp}, {"adp", &sw.adp}, {"mcdp", &sw.mcdp}};
        for (const auto& [name, sel] : sels) {
            const ImageGrid& xr = sw.records[sel->index].x_star;
            io::write_raw_f64(dir / ("x_" + name + ".f64"), xr);
            io::write_pgm16(dir / ("x_" + name + ".pgm"), xr);
        }
        if (cfg.export_autocorr) {
            const ImageGrid lam = forward_lambda(sw.records[sw.pwp.index].x_star, p.model);
            io::write_autocorrelation_csv(dir / "autocorr_pwp.csv",
                                          sample_autocorrelation(standardize(y, lam).z));
        }
        if (cfg.export_trace) {
            // re-solve at each selected mu with the history enabled
            for (const auto& [name, sel] : sels) {
                SolverConfig traced = sc;
                traced.mu = sel->mu;
                traced.record_trace = true;
                const SolveResult sol = solve(p.model, y, traced);
                io::write_trace_csv(dir / ("trace_" + name + ".csv"), sol.trace);
            }
        }
        if (!sw.interior_minimum && !warned_endpoint) {
            std::cerr << "warning: whiteness minimum sits at a grid endpoint; "
                         "widen --grid to bracket the optimum\n";
            warned_endpoint = true;
        }

        std::vector<std::pair<std::string, std::string>> extra;
        extra.emplace_back("stage", "sweep");
        extra.emplace_back("seed", std::to_string(seed));
        extra.emplace_back("eta", io::fmt(sc.eta.value_or(0.0)));
        extra.emplace_back("beta_policy", cfg.beta > 0.0
                                              ? io::fmt(cfg.beta)
                                              : (cfg.task == "ir" ? "max(0.1*mu, 0.1)"
                                                                  : "max(3*mu, 0.3)"));
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        extra.emplace_back("wall_seconds", io::fmt(secs));
        write_manifest(dir / "sweep_manifest.txt", cfg, extra);
    }
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

/// Per-seed table of the three strategies; the best SNR and SSIM in each row
/// are marked with '*' (ties: all marked).
inline void run_report(const std::filesystem::path& out_dir, std::ostream& os = std::cout) {
    std::vector<std::filesystem::path> dirs;
    if (!std::filesystem::exists(out_dir))
        throw std::runtime_error("no such output directory: " + out_dir.string());
    for (const auto& e : std::filesystem::directory_iterator(out_dir))
        if (e.is_directory() && std::filesystem::exists(e.path() / "sweep.csv"))
            dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw std::runtime_error("no sweep results under " + out_dir.string());

    os << "run";
    for (const char* s : {"adp", "mcdp", "pwp"})
        os << " | " << s << ": mu snr ssim";
    os << "\n";
    char buf[64];
    for (const auto& dir : dirs) {
        const ParsedSweep sw = read_sweep_csv(dir / "sweep.csv");
        std::map<std::string, ParsedSelection> by_name;
        for (const auto& s : sw.selections) by_name[s.name] = s;
        double best_snr = -1e300, best_ssim = -1e300;
        for (const char* s : {"adp", "mcdp", "pwp"}) {
            best_snr = std::max(best_snr, by_name[s].snr);
            best_ssim = std::max(best_ssim, by_name[s].ssim);
        }
        os << dir.filename().string();
        for (const char* s : {"adp", "mcdp", "pwp"}) {
            const auto& sel = by_name[s];
            std::snprintf(buf, sizeof(buf), " | %.4g %.3f%s %.3f%s", sel.mu, sel.snr,
                          sel.snr == best_snr ? "*" : "", sel.ssim,
                          sel.ssim == best_ssim ? "*" : "");
            os << buf;
        }
        os << "\n";
    }
}

} // namespace tvkl
