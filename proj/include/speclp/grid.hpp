// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace speclp {

using Complex = std::complex<double>;

/// Uniform 1-D grid.  Uniformity (to 1e-12 relative) and a minimum of
/// 8 points are construction invariants; everything downstream relies on
/// constant spacing.
class Grid1D {
  public:
    Grid1D() = default;

    Grid1D(double xmin, double xmax, std::size_t n) {
        if (n < 8) throw std::invalid_argument("Grid1D: need at least 8 points");
        if (!(xmin < xmax)) throw std::invalid_argument("Grid1D: xmin must be < xmax");
        pts_.resize(n);
        h_ = (xmax - xmin) / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) pts_[i] = xmin + h_ * static_cast<double>(i);
        pts_.back() = xmax;
    }

    static Grid1D from_step(double xmin, double xmax, double h) {
        if (!(h > 0)) throw std::invalid_argument("Grid1D: spacing must be positive");
        auto n = static_cast<std::size_t>(std::llround((xmax - xmin) / h)) + 1;
        return Grid1D(xmin, xmin + h * static_cast<double>(n - 1), n);
    }

    explicit Grid1D(std::vector<double> pts) : pts_(std::move(pts)) {
        if (pts_.size() < 8) throw std::invalid_argument("Grid1D: need at least 8 points");
        h_ = pts_[1] - pts_[0];
        if (!(h_ > 0)) throw std::invalid_argument("Grid1D: points must increase");
        double scale = std::max(std::abs(pts_.front()), std::abs(pts_.back()));
        for (std::size_t i = 1; i < pts_.size(); ++i) {
            double d = pts_[i] - pts_[i - 1];
            if (std::abs(d - h_) > 1e-12 * std::max(1.0, scale))
                throw std::invalid_argument("Grid1D: spacing must be uniform");
        }
    }

    std::size_t size() const { return pts_.size(); }
    double spacing() const { return h_; }
    double xmin() const { return pts_.front(); }
    double xmax() const { return pts_.back(); }
    double operator[](std::size_t i) const { return pts_[i]; }
    const std::vector<double>& points() const { return pts_; }

    /// Index of the grid node nearest to x.
    std::size_t index_of(double x) const {
        auto i = std::llround((x - pts_.front()) / h_);
        if (i < 0) i = 0;
        if (i >= static_cast<long long>(pts_.size())) i = static_cast<long long>(pts_.size()) - 1;
        return static_cast<std::size_t>(i);
    }

    bool same_as(const Grid1D& o) const {
        return size() == o.size() && pts_.front() == o.pts_.front() && pts_.back() == o.pts_.back();
    }

  private:
    std::vector<double> pts_;
    double h_ = 0;
};

/// Complex samples aligned with a grid.
struct SampledFunction {
    Grid1D grid;
    std::vector<Complex> values;

    SampledFunction() = default;
    SampledFunction(Grid1D g, std::vector<Complex> v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid.size())
            throw std::invalid_argument("SampledFunction: value count must equal grid size");
    }

    template <class Fn>
    static SampledFunction sample(const Grid1D& g, Fn&& fn) {
        std::vector<Complex> v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) v[i] = Complex(fn(g[i]));
        return SampledFunction(g, std::move(v));
    }

    std::size_t size() const { return values.size(); }

    bool finite() const {
        for (const auto& z : values)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    double sup_norm() const {
        double m = 0;
        for (const auto& z : values) m = std::max(m, std::abs(z));
        return m;
    }
};

/// Row-major dense complex matrix; just enough linear algebra for kernel
/// tables.
class CMatrix {
  public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols, Complex fill = Complex(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    Complex* row(std::size_t r) { return data_.data() + r * cols_; }
    const Complex* row(std::size_t r) const { return data_.data() + r * cols_; }
    const std::vector<Complex>& data() const { return data_; }
    std::vector<Complex>& data() { return data_; }

    double sup_norm() const {
        double m = 0;
        for (const auto& z : data_) m = std::max(m, std::abs(z));
        return m;
    }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Complex> data_;
};

inline double sup_diff(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("sup_diff: shape mismatch");
    double m = 0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

} // namespace speclp
