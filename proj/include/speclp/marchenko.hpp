// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "speclp/config.hpp"
#include "speclp/grid.hpp"
#include "speclp/potential.hpp"
#include "speclp/quadrature.hpp"

namespace speclp {

/// Marchenko kernel B_side(x, y).  Internally always the plus-oriented
/// problem: the minus side solves the plus equation for the reflected
/// potential and presents B_-(x, y) = B_+^refl(-x, -y).  Rows are ragged:
/// B_+(x, y) vanishes identically for x + y beyond the potential's support
/// (exactly for compact support, below the tail threshold otherwise).
struct MarchenkoKernel {
    Side side = Side::Plus;
    double h = 0;      // lattice spacing shared by x and y
    double xlo = 0;    // first x node of the plus-oriented table
    double a = 0, b = 0, D = 0; // support interval and diagonal cutoff
    std::vector<std::vector<double>> rows; // rows[i][j] = B_+(xlo + i h, j h)
    std::vector<double> eta;               // eta(xlo + d h) = int_{x}^{inf} V
    int iterations = 0;
    double residual = 0;

    std::size_t nx() const { return rows.size(); }
    double x_plus(std::size_t i) const { return xlo + h * static_cast<double>(i); }

    // presented coordinates (side-aware)
    double x_at(std::size_t i) const {
        return side == Side::Plus ? x_plus(i) : -x_plus(nx() - 1 - i);
    }
    std::size_t row_length(std::size_t i) const {
        return side == Side::Plus ? rows[i].size() : rows[nx() - 1 - i].size();
    }
    /// y of presented sample j in row i; negative for the minus side.
    double y_at(std::size_t i, std::size_t j) const {
        (void)i;
        return side == Side::Plus ? h * static_cast<double>(j) : -h * static_cast<double>(j);
    }
    double value(std::size_t i, std::size_t j) const {
        return side == Side::Plus ? rows[i][j] : rows[nx() - 1 - i][j];
    }
};

namespace marchenko_detail {

/// Fixed-point iteration of
///   B(x,y) = eta(x+y) + int_0^y dz int_{x+y-z}^inf V(t) B(t,z) dt
/// on a shared x/y lattice.  The double integral is evaluated through a
/// cumulative table Q(u,z) = int_u^b V B(.,z) and prefix sums along the
/// anti-diagonals x + y = const, which makes one sweep linear in the table
/// size.
inline MarchenkoKernel solve_plus(const Potential& V, const NumericsConfig& cfg) {
    MarchenkoKernel B;
    B.side = Side::Plus;
    B.h = cfg.marchenko_dx;
    const double h = B.h;
    B.xlo = cfg.xmin;

    auto sup = V.numeric_support(cfg);
    if (!(sup.second > sup.first)) { // free potential: B identically 0
        B.a = B.b = B.D = 0;
        std::size_t n = static_cast<std::size_t>(std::llround((0.0 - B.xlo) / h)) + 1;
        B.rows.assign(n, std::vector<double>(1, 0.0));
        B.eta.assign(n, 0.0);
        return B;
    }
    // snap the support outward onto the lattice
    long long ia = static_cast<long long>(std::floor((sup.first - B.xlo) / h + 1e-9));
    long long ib = static_cast<long long>(std::ceil((sup.second - B.xlo) / h - 1e-9));
    B.a = B.xlo + ia * h;
    B.b = B.xlo + ib * h;

    // eta and the |V| tail on the x lattice up to b.  The cumulative
    // integral runs over [a, b] only (V jumps to zero at the support edge
    // for characteristic potentials) and extends as a constant below a.
    const std::size_t nu = static_cast<std::size_t>(ib) + 1;
    std::vector<double> vlat(nu), vabs(nu);
    for (std::size_t i = 0; i < nu; ++i) {
        double x = B.xlo + h * static_cast<double>(i);
        vlat[i] = (x >= B.a && x <= B.b) ? V(x) : 0.0;
        vabs[i] = std::abs(vlat[i]);
    }
    const std::size_t ia_idx = static_cast<std::size_t>(ia);
    std::vector<double> etain, tailin;
    cumulative_from_right<double>(std::span<const double>(vlat).subspan(ia_idx), h, etain);
    cumulative_from_right<double>(std::span<const double>(vabs).subspan(ia_idx), h, tailin);
    std::vector<double> etav(nu), tail(nu);
    for (std::size_t i = 0; i < nu; ++i) {
        etav[i] = (i <= ia_idx) ? etain.front() : etain[i - ia_idx];
        tail[i] = (i <= ia_idx) ? tailin.front() : tailin[i - ia_idx];
    }
    B.eta = etav;

    // diagonal cutoff: beyond D the remaining |V| mass is negligible
    double tail_thresh = cfg.marchenko_tail * std::max(1.0, tail.front());
    std::size_t d_idx = nu - 1;
    while (d_idx > 0 && tail[d_idx] < tail_thresh) --d_idx;
    B.D = B.xlo + h * static_cast<double>(d_idx);

    const std::size_t nx = nu; // rows x = xlo .. b
    B.rows.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        std::size_t len = (i <= d_idx) ? (d_idx - i + 1) : 1;
        B.rows[i].assign(len, 0.0);
    }
    const std::size_t i_a = static_cast<std::size_t>(ia);
    const std::size_t zmax = d_idx >= i_a ? d_idx - i_a : 0; // z range feeding Q

    auto sweep = [&](bool all_rows) {
        // Q(u, z) for u on [a, b]
        const std::size_t nq = nu - i_a;
        std::vector<std::vector<double>> Q(zmax + 1);
        std::vector<double> integrand(nq);
        for (std::size_t z = 0; z <= zmax; ++z) {
            for (std::size_t l = 0; l < nq; ++l) {
                std::size_t i = i_a + l;
                double Bval = (z < B.rows[i].size()) ? B.rows[i][z] : 0.0;
                integrand[l] = vlat[i] * Bval;
            }
            cumulative_from_right<double>(std::span<const double>(integrand), h, Q[z]);
        }
        auto Qat = [&](long long u_idx, std::size_t z) -> double {
            if (z > zmax) return 0.0;
            if (u_idx >= static_cast<long long>(nu)) return 0.0;
            if (u_idx <= static_cast<long long>(i_a)) return Q[z].front();
            return Q[z][static_cast<std::size_t>(u_idx) - i_a];
        };
        // anti-diagonal prefix pass
        double diff = 0;
        std::vector<double> diag, pref;
        for (std::size_t d = 0; d <= d_idx; ++d) {
            std::size_t jhi = d; // i = d - j >= 0
            diag.resize(jhi + 1);
            for (std::size_t l = 0; l <= jhi; ++l)
                diag[l] = Qat(static_cast<long long>(d) - static_cast<long long>(l), l);
            cumulative_from_left<double>(std::span<const double>(diag), h, pref);
            for (std::size_t j = 0; j <= jhi; ++j) {
                std::size_t i = d - j;
                if (!all_rows && i < i_a) continue;
                double v = B.eta[d] + pref[j];
                double& slot = B.rows[i][j];
                diff = std::max(diff, std::abs(v - slot));
                slot = v;
            }
        }
        return diff;
    };

    double scale = 1.0;
    for (double e : B.eta) scale = std::max(scale, std::abs(e));
    for (B.iterations = 1; B.iterations <= cfg.volterra_max_iter; ++B.iterations) {
        B.residual = sweep(false);
        if (B.residual < cfg.volterra_tol * scale) break;
        if (B.iterations == cfg.volterra_max_iter)
            throw std::runtime_error("marchenko: fixed-point iteration did not converge, residual " +
                                     std::to_string(B.residual));
    }
    sweep(true); // fill the rows outside the support
    return B;
}

} // namespace marchenko_detail

inline MarchenkoKernel solve_marchenko(const Potential& V, Side side,
                                       const NumericsConfig& cfg = {}) {
    if (!std::isfinite(weighted_norm(V, 1.0, 0, cfg)))
        throw std::invalid_argument("solve_marchenko: weighted norm L^1_1 of V is not finite");
    if (side == Side::Plus) return marchenko_detail::solve_plus(V, cfg);
    Potential refl = V;
    auto ev = V.evaluator;
    refl.evaluator = [ev](double x) { return ev(-x); };
    if (V.support) refl.support = {{-V.support->second, -V.support->first}};
    MarchenkoKernel B = marchenko_detail::solve_plus(refl, cfg);
    B.side = Side::Minus;
    return B;
}

/// m_side(x, k) = 1 + int B_side(x, y) e^{+-2iky} dy, rows of the kernel's
/// own x lattice (presented order), columns over kgrid.
inline CMatrix reconstruct_m_from_B(const MarchenkoKernel& B, const Grid1D& kgrid) {
    const std::size_t nx = B.nx(), nk = kgrid.size();
    CMatrix out(nx, nk);
    for (std::size_t c = 0; c < nk; ++c) {
        double k = kgrid[c];
        for (std::size_t i = 0; i < nx; ++i) {
            std::size_t len = B.row_length(i);
            Complex acc(0);
            if (len >= 3) {
                auto w = simpson_weights(len);
                for (std::size_t j = 0; j < len; ++j) {
                    double y = B.y_at(i, j);
                    acc += w[j] * B.value(i, j) * std::exp(Complex(0, 2.0 * k * y));
                }
                acc *= B.h;
            } else if (len == 2) {
                acc = 0.5 * B.h *
                      (B.value(i, 0) +
                       B.value(i, 1) * std::exp(Complex(0, 2.0 * k * B.y_at(i, 1))));
            }
            out(i, c) = 1.0 + acc;
        }
    }
    return out;
}

struct WeightedBoundReport {
    int s = 0;
    int deriv = 0; // 0 none, 1 d/dx, 2 d/dy
    double sup_ratio = 0;
    double sup_location = 0;
    double sup_half_window = 0;
    double growth = 0; // relative growth from half to full y window
    bool pass = false;
};

/// R(x) = int |y|^s |d B(x,y)| dy / (1 + max(0, -+x))^p with p = s+1 for
/// the plain kernel and p = s for one derivative.  Stability is measured
/// by comparing the sup computed on half the stored y window against the
/// full window.
inline WeightedBoundReport check_weighted_bounds(const MarchenkoKernel& B, int s, int deriv) {
    if (s < 0 || s > 3) throw std::invalid_argument("check_weighted_bounds: s must be 0..3");
    WeightedBoundReport rep;
    rep.s = s;
    rep.deriv = deriv;
    const int p = (deriv == 0) ? s + 1 : s;
    const double h = B.h;
    const std::size_t nx = B.nx();

    auto deriv_value = [&](std::size_t i, std::size_t j) -> double {
        auto val = [&](std::size_t ii, long long jj) -> double {
            if (jj < 0) return 0.0; // outside the supported half-line
            if (ii >= nx) return 0.0;
            if (static_cast<std::size_t>(jj) >= B.row_length(ii)) return 0.0;
            return B.value(ii, static_cast<std::size_t>(jj));
        };
        if (deriv == 0) return val(i, static_cast<long long>(j));
        if (deriv == 2) { // d/dy along the row
            long long jj = static_cast<long long>(j);
            double d = (-val(i, jj + 2) + 8 * val(i, jj + 1) - 8 * val(i, jj - 1) + val(i, jj - 2)) /
                       (12 * h);
            return (B.side == Side::Plus) ? d : -d; // presented y decreases with j on minus side
        }
        // d/dx across rows at fixed j
        auto vx = [&](long long ii) -> double {
            if (ii < 0 || ii >= static_cast<long long>(nx)) return 0.0;
            return val(static_cast<std::size_t>(ii), static_cast<long long>(j));
        };
        long long ii = static_cast<long long>(i);
        return (-vx(ii + 2) + 8 * vx(ii + 1) - 8 * vx(ii - 1) + vx(ii - 2)) / (12 * h);
    };

    double sup_full = 0, sup_half = 0, loc = 0;
    for (std::size_t i = 0; i < nx; ++i) {
        std::size_t len = B.row_length(i);
        if (len < 3) continue;
        std::vector<double> g(len);
        for (std::size_t j = 0; j < len; ++j) {
            double y = B.y_at(i, j);
            g[j] = std::pow(std::abs(y), s) * std::abs(deriv_value(i, j));
        }
        double full = integrate_samples<double>(std::span<const double>(g), h);
        std::size_t half_len = std::max<std::size_t>(3, len / 2);
        double half = integrate_samples<double>(std::span<const double>(g).first(half_len), h);
        double x = B.x_at(i);
        double denomx = (B.side == Side::Plus) ? std::max(0.0, -x) : std::max(0.0, x);
        double weight = std::pow(1.0 + denomx, p);
        if (full / weight > sup_full) {
            sup_full = full / weight;
            loc = x;
        }
        sup_half = std::max(sup_half, half / weight);
    }
    rep.sup_ratio = sup_full;
    rep.sup_half_window = sup_half;
    rep.sup_location = loc;
    rep.growth = (sup_half > 0) ? (sup_full - sup_half) / sup_half : 0.0;
    rep.pass = std::isfinite(sup_full) && rep.growth < 0.20;
    return rep;
}

/// b(y_j) = int V(t) B_+(t, y_j) dt over the support rows; feeds the
/// resonance-case Wronskian formula.
inline std::vector<double> v_weighted_y_profile(const MarchenkoKernel& B, const Potential& V) {
    if (B.side != Side::Plus)
        throw std::invalid_argument("v_weighted_y_profile: plus-side kernel required");
    const double h = B.h;
    std::size_t zmax = 0;
    for (const auto& r : B.rows) zmax = std::max(zmax, r.size());
    std::vector<double> out(zmax, 0.0);
    // restrict to rows with V != 0
    std::size_t i0 = B.nx(), i1 = 0;
    for (std::size_t i = 0; i < B.nx(); ++i) {
        double x = B.x_plus(i);
        if (x >= B.a - 1e-12 && x <= B.b + 1e-12) {
            i0 = std::min(i0, i);
            i1 = std::max(i1, i);
        }
    }
    if (i0 > i1) return out;
    std::size_t n = i1 - i0 + 1;
    if (n < 3) return out;
    auto w = simpson_weights(n);
    for (std::size_t z = 0; z < zmax; ++z) {
        double acc = 0;
        for (std::size_t i = i0; i <= i1; ++i) {
            double Bval = (z < B.rows[i].size()) ? B.rows[i][z] : 0.0;
            acc += w[i - i0] * V(B.x_plus(i)) * Bval;
        }
        out[z] = acc * h;
    }
    return out;
}

/// g(xi_j) = int V(t) (int_{xi}^{inf} B_+(t, eta) d eta) dt; feeds the
/// zero-energy-resonance transmission formula.
inline std::vector<double> v_weighted_tail_profile(const MarchenkoKernel& B, const Potential& V) {
    if (B.side != Side::Plus)
        throw std::invalid_argument("v_weighted_tail_profile: plus-side kernel required");
    const double h = B.h;
    std::size_t zmax = 0;
    for (const auto& r : B.rows) zmax = std::max(zmax, r.size());
    std::size_t i0 = B.nx(), i1 = 0;
    for (std::size_t i = 0; i < B.nx(); ++i) {
        double x = B.x_plus(i);
        if (x >= B.a - 1e-12 && x <= B.b + 1e-12) {
            i0 = std::min(i0, i);
            i1 = std::max(i1, i);
        }
    }
    std::vector<double> out(zmax, 0.0);
    if (i0 > i1 || i1 - i0 + 1 < 3) return out;
    std::size_t n = i1 - i0 + 1;
    auto w = simpson_weights(n);
    // per-row cumulative tails, then the V-weighted reduction
    std::vector<std::vector<double>> G(n);
    std::vector<double> padded;
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = B.rows[i0 + r];
        padded.assign(zmax, 0.0);
        for (std::size_t j = 0; j < row.size(); ++j) padded[j] = row[j];
        cumulative_from_right<double>(std::span<const double>(padded), h, G[r]);
    }
    for (std::size_t z = 0; z < zmax; ++z) {
        double acc = 0;
        for (std::size_t r = 0; r < n; ++r) acc += w[r] * V(B.x_plus(i0 + r)) * G[r][z];
        out[z] = acc * h;
    }
    return out;
}

} // namespace speclp
