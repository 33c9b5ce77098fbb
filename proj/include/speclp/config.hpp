// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

namespace speclp {

/// Central record of every window, spacing and tolerance used by the
/// numerical pipeline.  All modules read their defaults from here so a run
/// is reproducible from a single struct.
struct NumericsConfig {
    // Spatial window.  Wide enough that every built-in potential at unit
    // scale decays below double-precision noise at the edges.
    double xmin = -40.0;
    double xmax = 40.0;
    double dx = 0.01;

    // Spectral window for scattering data.
    double kmax = 64.0;
    double dk = 0.025;

    // Kernel matrices live on a decimated, centered sub-grid of the main
    // grid: stride * dx spacing over [-kernel_halfwidth, kernel_halfwidth].
    double kernel_halfwidth = 19.2;
    int kernel_stride = 12;

    // Dyadic range for Littlewood-Paley systems.
    int jmin = -6;
    int jmax = 6;

    // lambda-quadrature per dyadic band: at least this many nodes, and
    // spacing no coarser than the Nyquist bound pi / (nyquist_margin * diam).
    int lambda_min_points = 512;
    double lambda_nyquist_margin = 8.0;

    // Volterra iteration.
    double volterra_tol = 1e-12;
    int volterra_max_iter = 200;
    // Target for 2*k*h_eff on the refined support grid; keeps the
    // oscillatory quadrature error ~ (2 k h)^4 / 180 below 1e-9.
    double osc_resolution = 0.015;

    // |V| below this (relative to its sup) is treated as outside the
    // numerical support.
    double support_cutoff = 1e-16;

    // Marchenko solver grid and tail threshold.
    double marchenko_dx = 0.02;
    double marchenko_tail = 1e-14;

    // Resonance tolerance, relative to max(1, sup |W| on |k| <= 1).
    double tol_res = 1e-3;

    // Bound-state search: kappa grid cells and bisection tolerance.
    int bound_state_cells = 200;
    double bound_state_tol = 1e-10;

    // Finite differences on potentials use 4th-order central stencils.
    double fd_step = 1e-3;

    // Seed for the deterministic probe set.
    unsigned long long seed = 20071010ULL;

    /// Shrinks/enlarges every grid by a common factor (>1 means coarser).
    void apply_grid_scale(double s) {
        if (!(s > 0)) throw std::invalid_argument("grid scale must be positive");
        dx *= s;
        dk *= s;
        marchenko_dx *= s;
        kernel_stride = std::max(1, static_cast<int>(std::lround(kernel_stride / s)));
    }

    double spatial_diameter() const { return xmax - xmin; }
    double kernel_dx() const { return dx * kernel_stride; }
};

} // namespace speclp
