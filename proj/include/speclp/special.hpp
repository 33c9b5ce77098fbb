// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "speclp/grid.hpp"

namespace speclp {

/// h(u, k) = int_0^u e^{2iks} ds = (e^{2iku} - 1) / (2ik).
/// Near k = 0 the closed form cancels catastrophically; below |2ku| = 1e-6
/// a 3-term Taylor expansion (leading term h(u,0) = u) takes over.
inline Complex h_kernel(double u, Complex k) {
    Complex c = Complex(0, 2.0) * k;
    Complex cu = c * u;
    if (std::abs(cu) < 1e-6) {
        return u * (1.0 + cu / 2.0 + cu * cu / 6.0);
    }
    return (std::exp(cu) - 1.0) / c;
}

/// P_j(u, c) = int_0^u s^j e^{cs} ds.  Series for small |cu| (the closed
/// form loses digits there), integration-by-parts recurrence otherwise.
inline Complex power_exp_integral(int j, double u, Complex c) {
    if (j < 0) throw std::invalid_argument("power_exp_integral: j must be >= 0");
    Complex cu = c * u;
    if (std::abs(cu) < 0.5) {
        Complex sum(0), term(1); // term = (cu)^p / p!
        for (int p = 0; p < 30; ++p) {
            Complex contrib = term / static_cast<double>(j + p + 1);
            sum += contrib;
            if (std::abs(contrib) < 1e-18 * std::abs(sum) && p > 2) break;
            term *= cu / static_cast<double>(p + 1);
        }
        return std::pow(u, j + 1) * sum;
    }
    Complex e = std::exp(cu);
    Complex P = (e - 1.0) / c;
    double upow = 1.0;
    for (int m = 1; m <= j; ++m) {
        upow *= u;
        P = (upow * e - static_cast<double>(m) * P) / c;
    }
    return P;
}

// ---- smooth transition profiles (C^infty, flat at both junctions) -----

/// g(s)/(g(s) + g(1-s)) with g(s) = e^{-1/s}: rises 0 -> 1 on [0, 1].
inline double transition_exp(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    double a = std::exp(-1.0 / s);
    double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

/// Same construction with g(s) = e^{-1/s^2}: a second, independent
/// C^infty rise with a visibly different shape.
inline double transition_sq(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    double a = std::exp(-1.0 / (s * s));
    double b = std::exp(-1.0 / ((1.0 - s) * (1.0 - s)));
    return a / (a + b);
}

} // namespace speclp
