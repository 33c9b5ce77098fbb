// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "speclp/quadrature.hpp"
#include "speclp/special.hpp"

namespace speclp {

enum class MotherProfile { ExpRatio, SqRatio };

/// Dyadic system {phi_j}: phi_j(x) = phi(2^{-j} x) with the mother phi
/// supported in [1/4, 1] on each side of the origin.  Built as the
/// telescoping difference psi(x) - psi(2x) of a C^infty cutoff psi, so the
/// absolute values sum to exactly 1 away from 0 (and |Phi| + sum_{j>=1}
/// equals 1 everywhere for the inhomogeneous variant).
struct DyadicSystem {
    int jmin = -6;
    int jmax = 6;
    bool homogeneous = true;
    MotherProfile profile = MotherProfile::ExpRatio;

    double transition(double s) const {
        return profile == MotherProfile::ExpRatio ? transition_exp(s) : transition_sq(s);
    }

    /// psi: 1 on [-1/2, 1/2], smooth fall to 0 on 1/2 <= |x| <= 1.
    double cutoff(double x) const {
        double a = std::abs(x);
        if (a <= 0.5) return 1.0;
        if (a >= 1.0) return 0.0;
        return transition(2.0 * (1.0 - a));
    }

    /// Mother bump: psi(x) - psi(2x), supported on 1/4 <= |x| <= 1.
    double mother(double x) const { return cutoff(x) - cutoff(2.0 * x); }

    double phi_j(int j, double x) const { return mother(std::ldexp(x, -j)); }

    /// Low-energy cap Phi of the inhomogeneous system, supp in [-1, 1].
    double cap(double x) const { return cutoff(x); }

    /// phi_j evaluated on the spectral variable: phi_j(lambda^2).
    double band_weight(int j, double lambda) const { return phi_j(j, lambda * lambda); }

    /// Support of phi_j(lambda^2) on the positive lambda axis.
    std::pair<double, double> lambda_band(int j) const {
        return {std::exp2(0.5 * (j - 2)), std::exp2(0.5 * j)};
    }
};

namespace detail {

inline void verify_dyadic(const DyadicSystem& sys) {
    // (i) support of the mother
    for (int i = 0; i <= 2000; ++i) {
        double x = -1.5 + 3.0 * i / 2000.0;
        double v = sys.mother(x);
        if ((std::abs(x) < 0.25 - 1e-9 || std::abs(x) > 1.0 + 1e-9) && std::abs(v) > 1e-14)
            throw std::runtime_error("dyadic system: mother escapes its support");
    }
    // (ii) |phi_j^(k)| <= c_k 2^{-kj}: the scaled sup must be j-independent.
    for (int k = 1; k <= 4; ++k) {
        double ref = -1.0;
        for (int j : {-2, 0, 3}) {
            double scale = std::exp2(static_cast<double>(k) * j);
            double sup = 0.0;
            double lo = std::exp2(j - 2) * 0.9, hi = std::exp2(j) * 1.1;
            for (int i = 0; i <= 400; ++i) {
                double x = lo + (hi - lo) * i / 400.0;
                double d = fd_derivative([&](double t) { return sys.phi_j(j, t); }, x, k,
                                         (hi - lo) / 4000.0);
                sup = std::max(sup, std::abs(d) * scale);
            }
            if (ref < 0) ref = sup;
            else if (sup > 4.0 * ref || sup < 0.25 * ref)
                throw std::runtime_error("dyadic system: derivative bound fails to scale as 2^{-kj}");
        }
    }
    // (iii) / (iii') partition of the absolute values
    if (sys.homogeneous) {
        double lo = std::exp2(sys.jmin - 2), hi = std::exp2(sys.jmax);
        for (int i = 0; i <= 3000; ++i) {
            double x = lo * std::pow(hi / lo, i / 3000.0);
            double s = 0;
            for (int j = sys.jmin - 2; j <= sys.jmax + 2; ++j) s += std::abs(sys.phi_j(j, x));
            // covered annulus only: stay one octave inside both ends
            if (x >= 2.0 * lo && x <= 0.5 * hi && (s < 0.5 || s > 2.0))
                throw std::runtime_error("dyadic system: sum of |phi_j| leaves [1/2, 2]");
        }
    } else {
        double hi = std::exp2(sys.jmax - 1);
        for (int i = 0; i <= 3000; ++i) {
            double x = -hi + 2 * hi * i / 3000.0;
            double s = std::abs(sys.cap(x));
            for (int j = 1; j <= sys.jmax + 2; ++j) s += std::abs(sys.phi_j(j, x));
            if (s < 0.5 || s > 2.0)
                throw std::runtime_error("dyadic system: |Phi| + sum |phi_j| leaves [1/2, 2]");
        }
    }
}

} // namespace detail

inline DyadicSystem make_dyadic_system(int jmin, int jmax, bool homogeneous,
                                       MotherProfile profile = MotherProfile::ExpRatio) {
    if (jmin > jmax) throw std::invalid_argument("make_dyadic_system: jmin must be <= jmax");
    DyadicSystem sys{jmin, jmax, homogeneous, profile};
    detail::verify_dyadic(sys);
    return sys;
}

} // namespace speclp
