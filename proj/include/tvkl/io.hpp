#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvkl/errors.hpp"
#include "tvkl/image.hpp"
#include "tvkl/radon.hpp"
#include "tvkl/whiteness.hpp"

namespace tvkl::io {

/// Shortest round-trip double formatting used by every text format here,
/// so identical values always serialize to identical bytes.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    return f;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
    return f;
}

// ---------------------------------------------------------------------------
// Observation text format
// ---------------------------------------------------------------------------

/// Header describing how an observation was produced; enough to regenerate it.
struct ObservationHeader {
    std::size_t rows = 0, cols = 0;
    std::string model_kind; // "identity" | "beer_lambert"
    double counts = 0.0;    // kappa or I0
    double background = 0.0;
    std::uint64_t seed = 0;
};

/// Plain-text counts: a commented header, then one row of integers per line.
inline void write_observation(const std::filesystem::path& path, const ImageGrid& y,
                              const ObservationHeader& hdr) {
    auto f = open_out(path);
    f << "# tvkl observation v1\n";
    f << "rows " << hdr.rows << "\n";
    f << "cols " << hdr.cols << "\n";
    f << "model " << hdr.model_kind << "\n";
    f << "counts " << fmt(hdr.counts) << "\n";
    f << "background " << fmt(hdr.background) << "\n";
    f << "seed " << hdr.seed << "\n";
    for (std::size_t i = 0; i < y.rows(); ++i) {
        for (std::size_t j = 0; j < y.cols(); ++j) {
            if (j) f << ' ';
            f << (long long)(y(i, j));
        }
        f << '\n';
    }
}

inline ImageGrid read_observation(const std::filesystem::path& path, ObservationHeader* hdr_out) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("# tvkl observation", 0) != 0)
        throw std::runtime_error("not a tvkl observation file: " + path.string());
    ObservationHeader hdr;
    for (int k = 0; k < 6; ++k) {
        std::getline(f, line);
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "rows")
            ss >> hdr.rows;
        else if (key == "cols")
            ss >> hdr.cols;
        else if (key == "model")
            ss >> hdr.model_kind;
        else if (key == "counts")
            ss >> hdr.counts;
        else if (key == "background")
            ss >> hdr.background;
        else if (key == "seed")
            ss >> hdr.seed;
        else
            throw std::runtime_error("malformed observation header: " + line);
    }
    ImageGrid y(hdr.rows, hdr.cols);
    for (std::size_t i = 0; i < hdr.rows; ++i)
        for (std::size_t j = 0; j < hdr.cols; ++j) {
            long long v;
            if (!(f >> v)) throw std::runtime_error("truncated observation: " + path.string());
            y(i, j) = double(v);
        }
    if (hdr_out) *hdr_out = hdr;
    return y;
}

// ---------------------------------------------------------------------------
// Images: 16-bit PGM for viewing, raw little-endian float64 for analysis
// ---------------------------------------------------------------------------

inline void write_pgm16(const std::filesystem::path& path, const ImageGrid& img) {
    auto f = open_out(path);
    const double lo = img.min();
    const double hi = img.max();
    const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;
    f << "P5\n" << img.cols() << " " << img.rows() << "\n65535\n";
    for (std::size_t k = 0; k < img.size(); ++k) {
        const auto v = std::uint16_t((img[k] - lo) * scale + 0.5);
        const unsigned char bytes[2] = {(unsigned char)(v >> 8), (unsigned char)(v & 0xFF)};
        f.write(reinterpret_cast<const char*>(bytes), 2);
    }
}

/// 8- or 16-bit binary PGM, rescaled into [0, 1].
inline ImageGrid read_pgm(const std::filesystem::path& path) {
    auto f = open_in(path);
    std::string magic;
    f >> magic;
    if (magic != "P5") throw std::runtime_error("unsupported PGM (need binary P5): " + path.string());
    auto next_token = [&]() {
        std::string tok;
        for (;;) {
            if (!(f >> tok)) throw std::runtime_error("truncated PGM header: " + path.string());
            if (tok[0] == '#') {
                std::string rest;
                std::getline(f, rest);
                continue;
            }
            return tok;
        }
    };
    const std::size_t cols = std::stoul(next_token());
    const std::size_t rows = std::stoul(next_token());
    const unsigned maxval = unsigned(std::stoul(next_token()));
    f.get(); // single whitespace after maxval
    ImageGrid img(rows, cols);
    const bool wide = maxval > 255;
    for (std::size_t k = 0; k < img.size(); ++k) {
        unsigned v;
        if (wide) {
            unsigned char b[2];
            f.read(reinterpret_cast<char*>(b), 2);
            v = (unsigned(b[0]) << 8) | b[1];
        } else {
            unsigned char b;
            f.read(reinterpret_cast<char*>(&b), 1);
            v = b;
        }
        if (!f) throw std::runtime_error("truncated PGM data: " + path.string());
        img[k] = double(v) / double(maxval);
    }
    return img;
}

inline void write_raw_f64(const std::filesystem::path& path, const ImageGrid& img) {
    static_assert(sizeof(double) == 8);
    auto f = open_out(path);
    f.write(reinterpret_cast<const char*>(img.data()), std::streamsize(img.size() * 8));
}

inline ImageGrid read_raw_f64(const std::filesystem::path& path, std::size_t rows,
                              std::size_t cols) {
    auto f = open_in(path);
    ImageGrid img(rows, cols);
    f.read(reinterpret_cast<char*>(img.data()), std::streamsize(img.size() * 8));
    if (!f) throw std::runtime_error("truncated raw image: " + path.string());
    return img;
}

// ---------------------------------------------------------------------------
// CSV exports
// ---------------------------------------------------------------------------

inline void write_autocorrelation_csv(const std::filesystem::path& path,
                                      const AutocorrelationMap& map) {
    auto f = open_out(path);
    f << "lag_l,lag_m,s\n";
    const long m1 = long(map.m1()), m2 = long(map.m2());
    for (long l = -(m1 - 1); l <= m1 - 1; ++l)
        for (long m = -(m2 - 1); m <= m2 - 1; ++m)
            f << l << ',' << m << ',' << fmt(map.at(l, m)) << '\n';
}

/// Solver convergence history, one row per iteration.
template <typename TraceRows>
inline void write_trace_csv(const std::filesystem::path& path, const TraceRows& rows) {
    auto f = open_out(path);
    f << "iter,delta_x,primal_residual,objective\n";
    for (const auto& r : rows)
        f << r.iter << ',' << fmt(r.delta_x) << ',' << fmt(r.primal_residual) << ','
          << fmt(r.objective) << '\n';
}

/// Sparse matrix as 0-based coordinate triplets, one per line.
inline void write_sparse_coo(const std::filesystem::path& path, const SparseMatrixCSR& A) {
    auto f = open_out(path);
    for (std::size_t r = 0; r < A.rows; ++r)
        for (std::size_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k)
            f << r << ' ' << A.col_idx[k] << ' ' << fmt(A.values[k]) << '\n';
}

// ---------------------------------------------------------------------------
// Flat key = value config files
// ---------------------------------------------------------------------------

/// Parses `key = value` lines; '#' starts a comment. Returns pairs in file
/// order; validation against the known key set happens in the consumer.
inline std::vector<std::pair<std::string, std::string>> read_key_values(
    const std::filesystem::path& path) {
    auto f = open_in(path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected key = value");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

} // namespace tvkl::io
