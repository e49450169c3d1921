#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sbd/errors.hpp"
#include "sbd/rng.hpp"

namespace sbd::nn {

// Dense row-major matrix of doubles. All weight and activation storage in
// the toolkit goes through this type; vectors are 1xN tensors.
class Tensor2 {
public:
    Tensor2() : rows_(0), cols_(0) {}

    Tensor2(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0)
            throw ShapeError("Tensor2: negative dimension");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    double& at(std::size_t i) { return data_[i]; }
    double at(std::size_t i) const { return data_[i]; }

    double* row_ptr(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
    const double* row_ptr(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    void zero() { std::fill(data_.begin(), data_.end(), 0.0); }
    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    void randomize_uniform(double lo, double hi, Rng& rng) {
        for (double& v : data_) v = rng.uniform(lo, hi);
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void add_scaled(const Tensor2& other, double scale) {
        if (other.rows_ != rows_ || other.cols_ != cols_)
            throw ShapeError("Tensor2::add_scaled: shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
    }

    bool same_shape(const Tensor2& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const Tensor2& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    int rows_;
    int cols_;
    std::vector<double> data_;
};

inline void require_shape(const Tensor2& t, int rows, int cols, const std::string& what) {
    if (t.rows() != rows || t.cols() != cols)
        throw ShapeError(what + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                         ", got " + std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
}

} // namespace sbd::nn
