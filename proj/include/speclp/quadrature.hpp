// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "speclp/grid.hpp"

namespace speclp {

/// Composite Simpson weights on a uniform grid of n nodes (n-1 panels).
/// An odd panel count is finished with a 3/8 rule on the last three panels,
/// keeping the rule 4th order everywhere.  Weights exclude the spacing h.
inline std::vector<double> simpson_weights(std::size_t n) {
    if (n < 3) throw std::invalid_argument("simpson_weights: need at least 3 points");
    std::vector<double> w(n, 0.0);
    std::size_t panels = n - 1;
    std::size_t simpson_end = (panels % 2 == 0) ? panels : panels - 3;
    for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
        w[i] += 1.0 / 3.0;
        w[i + 1] += 4.0 / 3.0;
        w[i + 2] += 1.0 / 3.0;
    }
    if (simpson_end != panels) {
        std::size_t i = simpson_end;
        w[i] += 3.0 / 8.0;
        w[i + 1] += 9.0 / 8.0;
        w[i + 2] += 9.0 / 8.0;
        w[i + 3] += 3.0 / 8.0;
    }
    return w;
}

template <class T>
T weighted_sum(std::span<const T> values, std::span<const double> weights, double h) {
    T acc{};
    for (std::size_t i = 0; i < values.size(); ++i) acc += weights[i] * values[i];
    return acc * h;
}

/// Composite Simpson over the grid of f.  Summation is a fixed
/// left-to-right pass, so the result is identical no matter who calls it.
inline Complex integrate(const SampledFunction& f) {
    if (f.grid.size() < 3) throw std::invalid_argument("integrate: grid has fewer than 3 points");
    if (!f.finite()) throw std::invalid_argument("integrate: non-finite samples");
    auto w = simpson_weights(f.grid.size());
    return weighted_sum<Complex>(std::span(f.values), std::span<const double>(w), f.grid.spacing());
}

template <class T>
T integrate_samples(std::span<const T> v, double h) {
    auto w = simpson_weights(v.size());
    return weighted_sum<T>(v, std::span<const double>(w), h);
}

namespace detail {

// One-panel weights of the 4-point Newton-Cotes marching rule: the
// integral over [x_i, x_{i+1}] from a cubic through four neighbouring
// nodes.  Local error O(h^5), cumulative error O(h^4).
inline constexpr double kPanelInterior[4] = {-1.0 / 24.0, 13.0 / 24.0, 13.0 / 24.0, -1.0 / 24.0};
inline constexpr double kPanelLeft[4] = {9.0 / 24.0, 19.0 / 24.0, -5.0 / 24.0, 1.0 / 24.0};
inline constexpr double kPanelRight[4] = {1.0 / 24.0, -5.0 / 24.0, 19.0 / 24.0, 9.0 / 24.0};

} // namespace detail

/// Prefix integrals from the right: out[i] = integral of f over [x_i, x_end].
/// 4th-order accurate on smooth integrands; used by the Volterra solvers
/// where Simpson's even-panel bookkeeping does not apply.
template <class T>
void cumulative_from_right(std::span<const T> f, double h, std::vector<T>& out) {
    std::size_t n = f.size();
    out.assign(n, T{});
    if (n < 2) return;
    if (n < 4) {
        // degenerate trapezoid fallback
        for (std::size_t i = n - 1; i-- > 0;) out[i] = out[i + 1] + 0.5 * h * (f[i] + f[i + 1]);
        return;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        const double* w;
        std::size_t base;
        if (i == 0) {
            w = detail::kPanelLeft;
            base = 0;
        } else if (i + 2 >= n) {
            w = detail::kPanelRight;
            base = n - 4;
        } else {
            w = detail::kPanelInterior;
            base = i - 1;
        }
        T panel = w[0] * f[base] + w[1] * f[base + 1] + w[2] * f[base + 2] + w[3] * f[base + 3];
        out[i] = out[i + 1] + h * panel;
    }
}

/// Prefix integrals from the left: out[i] = integral over [x_0, x_i].
template <class T>
void cumulative_from_left(std::span<const T> f, double h, std::vector<T>& out) {
    std::size_t n = f.size();
    out.assign(n, T{});
    if (n < 2) return;
    if (n < 4) {
        for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * h * (f[i] + f[i - 1]);
        return;
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double* w;
        std::size_t base;
        if (i == 1) {
            w = detail::kPanelLeft;
            base = 0;
        } else if (i + 1 >= n) {
            w = detail::kPanelRight;
            base = n - 4;
        } else {
            w = detail::kPanelInterior;
            base = i - 2;
        }
        T panel = w[0] * f[base] + w[1] * f[base + 1] + w[2] * f[base + 2] + w[3] * f[base + 3];
        out[i] = out[i - 1] + h * panel;
    }
}

/// k |-> integral f(x) e^{-ikx} dx by quadrature at each node of kgrid.
/// Warns (via the return flag of decayed_at_edges) when f has not decayed
/// at its endpoints; the transform is still computed.
inline SampledFunction continuous_fourier(const SampledFunction& f, const Grid1D& kgrid) {
    auto w = simpson_weights(f.grid.size());
    const double h = f.grid.spacing();
    std::vector<Complex> out(kgrid.size());
    std::vector<Complex> weighted(f.grid.size());
    for (std::size_t i = 0; i < f.grid.size(); ++i) weighted[i] = w[i] * f.values[i];
    for (std::size_t m = 0; m < kgrid.size(); ++m) {
        const double k = kgrid[m];
        Complex acc(0);
        for (std::size_t i = 0; i < f.grid.size(); ++i) {
            double phase = -k * f.grid[i];
            acc += weighted[i] * Complex(std::cos(phase), std::sin(phase));
        }
        out[m] = acc * h;
    }
    return SampledFunction(kgrid, std::move(out));
}

inline bool decayed_at_edges(const SampledFunction& f, double tol = 1e-10) {
    return std::abs(f.values.front()) < tol && std::abs(f.values.back()) < tol;
}

inline double lp_norm(const SampledFunction& f, double p) {
    if (std::isinf(p)) return f.sup_norm();
    if (!(p > 0)) throw std::invalid_argument("lp_norm: p must be positive");
    std::vector<double> a(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) a[i] = std::pow(std::abs(f.values[i]), p);
    double s = integrate_samples<double>(std::span<const double>(a), f.grid.spacing());
    return std::pow(s, 1.0 / p);
}

inline Complex inner_product(const SampledFunction& f, const SampledFunction& g) {
    if (!f.grid.same_as(g.grid)) throw std::invalid_argument("inner_product: grid mismatch");
    std::vector<Complex> a(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) a[i] = f.values[i] * std::conj(g.values[i]);
    return integrate_samples<Complex>(std::span<const Complex>(a), f.grid.spacing());
}

/// i-th derivative of a scalar function by 4th-order central differences.
template <class Fn>
double fd_derivative(Fn&& f, double x, int i, double h) {
    auto v = [&](int m) { return f(x + m * h); };
    switch (i) {
        case 0: return f(x);
        case 1: return (-v(2) + 8 * v(1) - 8 * v(-1) + v(-2)) / (12 * h);
        case 2: return (-v(2) + 16 * v(1) - 30 * v(0) + 16 * v(-1) - v(-2)) / (12 * h * h);
        case 3:
            return (-v(-3) + 8 * v(-2) - 13 * v(-1) + 13 * v(1) - 8 * v(2) + v(3)) /
                   (8 * h * h * h);
        case 4:
            return (-v(-3) + 12 * v(-2) - 39 * v(-1) + 56 * v(0) - 39 * v(1) + 12 * v(2) - v(3)) /
                   (6 * h * h * h * h);
        default: throw std::invalid_argument("fd_derivative: order must be 0..4");
    }
}

} // namespace speclp
