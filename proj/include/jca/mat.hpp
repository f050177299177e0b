#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jca/errors.hpp"

namespace jca {

// Dense row-major matrix of doubles. The single value type used for
// features, weights and gradients throughout the project.
class Mat {
public:
    Mat() = default;

    Mat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw DimError("Mat: data length " + std::to_string(data_.size()) +
                           " does not match shape " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
        }
    }

    static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }

    static Mat full(std::size_t rows, std::size_t cols, double v) {
        Mat m(rows, cols);
        for (auto& x : m.data_) x = v;
        return m;
    }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<double> span() { return data_; }
    std::span<const double> span() const { return data_; }

    const double* row(std::size_t r) const { return data_.data() + r * cols_; }
    double* row(std::size_t r) { return data_.data() + r * cols_; }

    bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    Mat transposed() const {
        Mat t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    // Columns [c0, c1).
    Mat slice_cols(std::size_t c0, std::size_t c1) const {
        if (c0 > c1 || c1 > cols_) {
            throw DimError("Mat::slice_cols: range [" + std::to_string(c0) + "," +
                           std::to_string(c1) + ") out of " + shape_str());
        }
        Mat s(rows_, c1 - c0);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = c0; c < c1; ++c) s(r, c - c0) = (*this)(r, c);
        return s;
    }

    // Rows [r0, r1).
    Mat slice_rows(std::size_t r0, std::size_t r1) const {
        if (r0 > r1 || r1 > rows_) {
            throw DimError("Mat::slice_rows: range [" + std::to_string(r0) + "," +
                           std::to_string(r1) + ") out of " + shape_str());
        }
        Mat s(r1 - r0, cols_);
        for (std::size_t r = r0; r < r1; ++r)
            for (std::size_t c = 0; c < cols_; ++c) s(r - r0, c) = (*this)(r, c);
        return s;
    }

    std::vector<double> col(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    friend bool operator==(const Mat& a, const Mat& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Mat hcat(const Mat& a, const Mat& b);  // side by side, shared row count
Mat vcat(const Mat& a, const Mat& b);  // stacked, shared column count

}  // namespace jca
