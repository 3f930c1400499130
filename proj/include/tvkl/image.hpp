#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvkl {

/// Dense real-valued 2-D array, row-major. Doubles as the vectorized view:
/// pixel (i,j) lives at linear index i*cols+j.
class ImageGrid {
public:
    ImageGrid() = default;
    ImageGrid(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    ImageGrid(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw std::invalid_argument("ImageGrid: data size does not match shape");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator[](std::size_t k) { return data_[k]; }
    double operator[](std::size_t k) const { return data_[k]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::vector<double>& vec() noexcept { return data_; }
    const std::vector<double>& vec() const noexcept { return data_; }

    bool same_shape(const ImageGrid& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    double sum() const noexcept {
        double s = 0.0;
        for (double v : data_) s += v;
        return s;
    }
    double mean() const noexcept { return data_.empty() ? 0.0 : sum() / double(data_.size()); }
    double norm() const noexcept {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }
    double min() const noexcept {
        double m = data_.empty() ? 0.0 : data_[0];
        for (double v : data_) m = v < m ? v : m;
        return m;
    }
    double max() const noexcept {
        double m = data_.empty() ? 0.0 : data_[0];
        for (double v : data_) m = v > m ? v : m;
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ")");
}

} // namespace tvkl
