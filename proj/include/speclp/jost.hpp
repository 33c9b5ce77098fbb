// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "speclp/config.hpp"
#include "speclp/grid.hpp"
#include "speclp/parallel.hpp"
#include "speclp/potential.hpp"
#include "speclp/quadrature.hpp"
#include "speclp/special.hpp"

namespace speclp {

enum class Side { Plus, Minus };

namespace jost_detail {

inline double binom(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Node-aligned refinement of the potential's numerical support.  All
/// Volterra quadrature runs on this grid; the refinement factor keeps
/// 2|k|*h below the oscillation-resolution target.
struct SupportGrid {
    double a = 0, b = 0; // empty when a == b
    double h = 0;
    std::vector<double> t;
    std::vector<double> V;
    bool empty() const { return t.empty(); }
    std::size_t size() const { return t.size(); }
    std::size_t index_of(double x) const {
        auto i = std::llround((x - a) / h);
        return static_cast<std::size_t>(std::min<long long>(std::max<long long>(i, 0),
                                                            static_cast<long long>(t.size()) - 1));
    }
};

/// One spectral column of the Volterra solution m(x, k) = m_+(x, k) for the
/// potential attached to the owning engine.  Evaluation beyond the support
/// uses the running-integral totals; inside it hits the converged nodes.
struct Column {
    Complex k;
    std::shared_ptr<const SupportGrid> sg;
    std::vector<Complex> m;     // converged values at support nodes
    std::vector<Complex> I;     // I(x) = int_x^b e^{2ikt} V m dt
    std::vector<Complex> phase; // e^{2ikt} at support nodes
    Complex J_total{0};         // int V m dt
    std::array<Complex, 4> Mtot{}; // t-moments of V m (small-k path)
    bool tiny_k = false;
    int iterations = 0;
    double residual = 0;

    Complex value_at(double x) const {
        if (!sg || sg->empty() || x >= sg->b) return Complex(1);
        if (x <= sg->a && x < sg->b) {
            if (x == sg->a) return m.front();
            return 1.0 + tail_apply(x);
        }
        return m[sg->index_of(x)];
    }

    /// d/dx m(x,k) = -e^{-2ikx} I(x); exact for the converged solution.
    Complex deriv_at(double x) const {
        if (!sg || sg->empty() || x >= sg->b) return Complex(0);
        Complex Ix = (x <= sg->a) ? I.front() : I[sg->index_of(x)];
        return -std::exp(Complex(0, -2.0) * k * x) * Ix;
    }

  private:
    Complex tail_apply(double x) const {
        Complex c = Complex(0, 2.0) * k;
        if (tiny_k) {
            // h(u,k) ~ u + c u^2/2 + c^2 u^3/6 expanded in t-moments
            Complex m0 = Mtot[0], m1 = Mtot[1], m2 = Mtot[2], m3 = Mtot[3];
            Complex r = (m1 - x * m0);
            r += 0.5 * c * (m2 - 2.0 * x * m1 + x * x * m0);
            r += c * c / 6.0 * (m3 - 3.0 * x * m2 + 3.0 * x * x * m1 - x * x * x * m0);
            return r;
        }
        return (std::exp(-c * x) * I.front() - J_total) / c;
    }
};

} // namespace jost_detail

/// Volterra-equation engine for the modified Jost functions of one
/// potential.  m_- is obtained from the reflected potential by x -> -x.
class JostEngine {
  public:
    using SupportGrid = jost_detail::SupportGrid;
    using Column = jost_detail::Column;

    JostEngine(Potential V, NumericsConfig cfg) : V_(std::move(V)), cfg_(cfg) {
        refl_ = V_;
        auto ev = V_.evaluator;
        refl_.evaluator = [ev](double x) { return ev(-x); };
        if (V_.support) refl_.support = {{-V_.support->second, -V_.support->first}};
        auto sup = V_.numeric_support(cfg_);
        base_a_ = sup.first;
        base_b_ = sup.second;
    }

    const Potential& potential() const { return V_; }
    const Potential& potential_for(Side side) const { return side == Side::Plus ? V_ : refl_; }
    const NumericsConfig& config() const { return cfg_; }
    std::pair<double, double> support_interval() const { return {base_a_, base_b_}; }

    int refine_factor(Complex k) const {
        double need = 2.0 * std::abs(k) * cfg_.dx / cfg_.osc_resolution;
        int r = 1;
        while (r < need && r < 256) r *= 2;
        return r;
    }

    std::shared_ptr<const SupportGrid> support(Side side, int refine) const {
        std::scoped_lock lock(mutex_);
        auto key = std::make_pair(side, refine);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        auto sg = std::make_shared<SupportGrid>();
        double a = (side == Side::Plus) ? base_a_ : -base_b_;
        double b = (side == Side::Plus) ? base_b_ : -base_a_;
        const Potential& P = (side == Side::Plus) ? V_ : refl_;
        if (b > a) {
            sg->a = a;
            sg->b = b;
            sg->h = cfg_.dx / refine;
            auto n = static_cast<std::size_t>(std::llround((b - a) / sg->h)) + 1;
            sg->t.resize(n);
            sg->V.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                sg->t[i] = a + sg->h * static_cast<double>(i);
                sg->V[i] = P(sg->t[i]);
            }
            sg->t.back() = b;
        }
        cache_.emplace(key, sg);
        return sg;
    }

    /// Neumann iteration for m(x,k) on the support grid.  Throws after
    /// cfg.volterra_max_iter sweeps without reaching cfg.volterra_tol.
    Column solve_column(Side side, Complex k) const {
        Column col;
        col.k = k;
        col.sg = support(side, refine_factor(k));
        const auto& sg = *col.sg;
        if (sg.empty()) return col;

        const std::size_t n = sg.size();
        const Complex c = Complex(0, 2.0) * k;
        col.tiny_k = std::abs(c) * (sg.b - sg.a) < 1e-4;
        if (std::abs(c.real()) * std::max(std::abs(sg.a), std::abs(sg.b)) > 600.0)
            throw std::runtime_error("jost: exponential range of Im k exceeds double precision");

        // phase[i] = e^{2 i k t_i}, incremental rotation re-anchored
        // periodically to cap drift
        col.phase.resize(n);
        {
            Complex step = std::exp(c * sg.h);
            Complex cur = std::exp(c * sg.t[0]);
            for (std::size_t i = 0; i < n; ++i) {
                if (i % 4096 == 0) cur = std::exp(c * sg.t[i]);
                col.phase[i] = cur;
                cur *= step;
            }
        }

        col.m.assign(n, Complex(1));
        std::vector<Complex> g(n), work(n), cum0, cum1, cum2, cum3, next(n);
        for (col.iterations = 1; col.iterations <= cfg_.volterra_max_iter; ++col.iterations) {
            for (std::size_t i = 0; i < n; ++i) g[i] = sg.V[i] * col.m[i];
            if (col.tiny_k) {
                // h(u,k) = u + c u^2/2 + c^2 u^3/6 + O((cu)^3 u), expanded
                // into cumulative t-moments of g; avoids the 1/c division.
                for (int p = 0; p < 4; ++p) {
                    auto& cum = (p == 0 ? cum0 : p == 1 ? cum1 : p == 2 ? cum2 : cum3);
                    for (std::size_t i = 0; i < n; ++i) work[i] = g[i] * std::pow(sg.t[i], p);
                    cumulative_from_right<Complex>(std::span<const Complex>(work), sg.h, cum);
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double x = sg.t[i];
                    Complex r = cum1[i] - x * cum0[i];
                    r += 0.5 * c * (cum2[i] - 2.0 * x * cum1[i] + x * x * cum0[i]);
                    r += c * c / 6.0 *
                         (cum3[i] - 3.0 * x * cum2[i] + 3.0 * x * x * cum1[i] -
                          x * x * x * cum0[i]);
                    next[i] = 1.0 + r;
                }
            } else {
                for (std::size_t i = 0; i < n; ++i) work[i] = g[i] * col.phase[i];
                cumulative_from_right<Complex>(std::span<const Complex>(work), sg.h, cum0);
                cumulative_from_right<Complex>(std::span<const Complex>(g), sg.h, cum1);
                for (std::size_t i = 0; i < n; ++i) {
                    Complex inv_phase = Complex(1) / col.phase[i];
                    next[i] = 1.0 + (inv_phase * cum0[i] - cum1[i]) / c;
                }
            }
            double diff = 0;
            for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(next[i] - col.m[i]));
            col.m.swap(next);
            col.residual = diff;
            if (diff < cfg_.volterra_tol) break;
            if (col.iterations == cfg_.volterra_max_iter)
                throw std::runtime_error("jost: Volterra iteration did not converge, residual " +
                                         std::to_string(diff));
        }

        // final prefix data for evaluation and derivatives
        for (std::size_t i = 0; i < n; ++i) g[i] = sg.V[i] * col.m[i];
        for (std::size_t i = 0; i < n; ++i) work[i] = g[i] * col.phase[i];
        cumulative_from_right<Complex>(std::span<const Complex>(work), sg.h, col.I);
        cumulative_from_right<Complex>(std::span<const Complex>(g), sg.h, cum1);
        col.J_total = cum1.front();
        for (int p = 0; p < 4; ++p) {
            for (std::size_t i = 0; i < n; ++i) work[i] = g[i] * std::pow(sg.t[i], p);
            cumulative_from_right<Complex>(std::span<const Complex>(work), sg.h, cum0);
            col.Mtot[p] = cum0.front();
        }
        return col;
    }

    /// m_{side}(x, k).  Minus side goes through the reflected potential.
    Complex m_value(const Column& col, Side side, double x) const {
        return col.value_at(side == Side::Plus ? x : -x);
    }
    Complex m_deriv(const Column& col, Side side, double x) const {
        Complex d = col.deriv_at(side == Side::Plus ? x : -x);
        return side == Side::Plus ? d : -d;
    }

  private:
    Potential V_;
    Potential refl_;
    NumericsConfig cfg_;
    double base_a_ = 0, base_b_ = 0;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<Side, int>, std::shared_ptr<const SupportGrid>> cache_;
};

// ----------------------------------------------------------------------
// Public solution type and operations

struct PartialKey {
    Side side;
    int ell;
    int n;
    auto operator<=>(const PartialKey&) const = default;
};

/// Sampled m_pm(x, k) with mixed partial derivatives on request.
struct JostSolution {
    Grid1D xgrid;
    Grid1D kgrid;
    CMatrix m_plus;  // (x) rows by (k) columns
    CMatrix m_minus;
    std::map<PartialKey, CMatrix> partials;
    std::shared_ptr<JostEngine> engine;

    const CMatrix& partial(Side side, int ell, int n) const {
        auto it = partials.find({side, ell, n});
        if (it == partials.end())
            throw std::invalid_argument("JostSolution: partial (" + std::to_string(ell) + "," +
                                        std::to_string(n) + ") not computed");
        return it->second;
    }
};

/// Solve the Volterra equation on (xgrid x kgrid) for both sides and store
/// the first x-derivatives alongside.
inline JostSolution solve_m(const Potential& V, const Grid1D& xgrid, const Grid1D& kgrid,
                            const NumericsConfig& cfg = {}) {
    if (!std::isfinite(weighted_norm(V, 1.0, 0, cfg)))
        throw std::invalid_argument("solve_m: weighted norm L^1_1 of V is not finite");
    JostSolution J;
    J.xgrid = xgrid;
    J.kgrid = kgrid;
    J.engine = std::make_shared<JostEngine>(V, cfg);
    const std::size_t nx = xgrid.size(), nk = kgrid.size();
    J.m_plus = CMatrix(nx, nk);
    J.m_minus = CMatrix(nx, nk);
    CMatrix dp(nx, nk), dm(nx, nk);
    parallel_for(nk, [&](std::size_t c) {
        Complex k(kgrid[c], 0.0);
        for (Side side : {Side::Plus, Side::Minus}) {
            auto col = J.engine->solve_column(side, k);
            CMatrix& M = (side == Side::Plus) ? J.m_plus : J.m_minus;
            CMatrix& D = (side == Side::Plus) ? dp : dm;
            for (std::size_t r = 0; r < nx; ++r) {
                M(r, c) = J.engine->m_value(col, side, xgrid[r]);
                D(r, c) = J.engine->m_deriv(col, side, xgrid[r]);
            }
        }
    });
    J.partials[{Side::Plus, 0, 0}] = J.m_plus;
    J.partials[{Side::Minus, 0, 0}] = J.m_minus;
    J.partials[{Side::Plus, 1, 0}] = std::move(dp);
    J.partials[{Side::Minus, 1, 0}] = std::move(dm);
    return J;
}

namespace jost_detail {

/// All k-derivative orders m^{(0..n)} of one column on its support grid.
/// Each order solves the same Volterra kernel with an inhomogeneity built
/// from the lower orders:
///   m^{(i)} = g_i + T[m^{(i)}],
///   g_i(x) = sum_{j=1..i} C(i,j) (2i)^j int_x^b P_j(t-x, 2ik) V m^{(i-j)} dt.
struct KDerivColumns {
    Column base;
    std::vector<std::vector<Complex>> orders; // orders[i] on support nodes
    std::vector<std::vector<Complex>> g;      // inhomogeneities (order >= 1)
};

inline KDerivColumns k_derivative_columns(const JostEngine& eng, Side side, Complex k, int nmax,
                                          const NumericsConfig& cfg) {
    KDerivColumns out;
    out.base = eng.solve_column(side, k);
    out.orders.push_back(out.base.m);
    out.g.emplace_back(); // order 0 has no inhomogeneity
    const auto& sg = *out.base.sg;
    if (sg.empty()) {
        for (int i = 1; i <= nmax; ++i) {
            out.orders.emplace_back();
            out.g.emplace_back();
        }
        return out;
    }
    const std::size_t n = sg.size();
    const Complex c = Complex(0, 2.0) * k;

    for (int i = 1; i <= nmax; ++i) {
        // inhomogeneity by direct kernel evaluation (O(n^2); callers keep
        // the grids report-sized)
        std::vector<Complex> gi(n, Complex(0));
        for (int j = 1; j <= i; ++j) {
            Complex pref = binom(i, j) * std::pow(Complex(0, 2.0), j);
            const auto& mlow = out.orders[i - j];
            std::vector<Complex> f(n);
            for (std::size_t q = 0; q < n; ++q) f[q] = sg.V[q] * mlow[q];
            for (std::size_t r = 0; r + 3 <= n; ++r) {
                auto wr = simpson_weights(n - r);
                Complex acc(0);
                for (std::size_t q = r; q < n; ++q)
                    acc += wr[q - r] * power_exp_integral(j, sg.t[q] - sg.t[r], c) * f[q];
                gi[r] += pref * acc * sg.h;
            }
        }
        // Volterra solve with kernel h: m_i = g_i + T[m_i]
        std::vector<Complex> mi = gi, work(n), cum0, cum1, next(n), gg(n);
        double diff = 0;
        for (int it = 1; it <= cfg.volterra_max_iter; ++it) {
            for (std::size_t q = 0; q < n; ++q) gg[q] = sg.V[q] * mi[q];
            bool tiny = std::abs(c) * (sg.b - sg.a) < 1e-4;
            if (tiny) {
                std::vector<Complex> cm[4];
                for (int p = 0; p < 4; ++p) {
                    for (std::size_t q = 0; q < n; ++q) work[q] = gg[q] * std::pow(sg.t[q], p);
                    cumulative_from_right<Complex>(std::span<const Complex>(work), sg.h, cm[p]);
                }
                for (std::size_t q = 0; q < n; ++q) {
                    double x = sg.t[q];
                    Complex r = cm[1][q] - x * cm[0][q];
                    r += 0.5 * c * (cm[2][q] - 2.0 * x * cm[1][q] + x * x * cm[0][q]);
                    r += c * c / 6.0 *
                         (cm[3][q] - 3.0 * x * cm[2][q] + 3.0 * x * x * cm[1][q] -
                          x * x * x * cm[0][q]);
                    next[q] = gi[q] + r;
                }
            } else {
                for (std::size_t q = 0; q < n; ++q) work[q] = gg[q] * out.base.phase[q];
                cumulative_from_right<Complex>(std::span<const Complex>(work), sg.h, cum0);
                cumulative_from_right<Complex>(std::span<const Complex>(gg), sg.h, cum1);
                for (std::size_t q = 0; q < n; ++q)
                    next[q] = gi[q] + ((1.0 / out.base.phase[q]) * cum0[q] - cum1[q]) / c;
            }
            diff = 0;
            for (std::size_t q = 0; q < n; ++q) diff = std::max(diff, std::abs(next[q] - mi[q]));
            mi.swap(next);
            if (diff < cfg.volterra_tol) break;
            if (it == cfg.volterra_max_iter)
                throw std::runtime_error("jost: k-derivative Volterra iteration did not converge");
        }
        out.orders.push_back(std::move(mi));
        out.g.push_back(std::move(gi));
    }
    return out;
}

/// d/dt m^{(i)} at every support node via the (l=1, n=i) formula with
/// running t-moments.
inline std::vector<Complex> t_derivative_on_support(const KDerivColumns& cols, int i) {
    const auto& sg = *cols.base.sg;
    const std::size_t n = sg.size();
    std::vector<Complex> out(n, Complex(0));
    if (sg.empty()) return out;
    const Complex two_i(0, 2.0);
    std::vector<Complex> work(n), cum;
    for (int j = 0; j <= i; ++j) {
        Complex pref = binom(i, j) * std::pow(two_i, j);
        const auto& mlow = cols.orders[i - j];
        // R_q(t) = int_t^b s^q e^{2iks} V m^{(i-j)} ds for q <= j
        std::vector<std::vector<Complex>> R(j + 1);
        for (int q = 0; q <= j; ++q) {
            for (std::size_t r = 0; r < n; ++r)
                work[r] = std::pow(sg.t[r], q) * cols.base.phase[r] * sg.V[r] * mlow[r];
            cumulative_from_right<Complex>(std::span<const Complex>(work), sg.h, cum);
            R[q] = cum;
        }
        for (std::size_t r = 0; r < n; ++r) {
            double x = sg.t[r];
            Complex acc(0);
            for (int q = 0; q <= j; ++q)
                acc += binom(j, q) * std::pow(-x, j - q) * R[q][r];
            out[r] -= pref * (1.0 / cols.base.phase[r]) * acc;
        }
    }
    return out;
}

} // namespace jost_detail

/// Mixed partial d_x^ell d_k^n m_{side} on (J.xgrid x J.kgrid), cached in
/// J.partials.  Prerequisite orders (all lower ell at the same n, all lower
/// n) must already be present, mirroring the evaluation order of the
/// derivative formula.
inline const CMatrix& mixed_partials(JostSolution& J, Side side, int ell, int n) {
    if (ell < 0 || ell > 2 || n < 0 || n > 2)
        throw std::invalid_argument("mixed_partials: need 0 <= ell <= 2, 0 <= n <= 2");
    auto key = PartialKey{side, ell, n};
    if (auto it = J.partials.find(key); it != J.partials.end()) return it->second;
    // the (ell, n) formula consumes every lower stored order
    if (n >= 1 && !J.partials.count({side, 0, n - 1}))
        throw std::invalid_argument("mixed_partials: requires (0," + std::to_string(n - 1) +
                                    ") first");
    if (ell >= 1 && !J.partials.count({side, ell - 1, n}))
        throw std::invalid_argument("mixed_partials: requires (" + std::to_string(ell - 1) + "," +
                                    std::to_string(n) + ") first");
    if (ell == 2 && J.engine->potential().cls == PotentialClass::Characteristic)
        throw std::invalid_argument(
            "mixed_partials: ell = 2 needs a differentiable potential (characteristic class has "
            "distributional V')");

    const auto& eng = *J.engine;
    const auto& cfg = eng.config();
    const std::size_t nx = J.xgrid.size(), nk = J.kgrid.size();
    CMatrix out(nx, nk);

    parallel_for(nk, [&](std::size_t cidx) {
        Complex k(J.kgrid[cidx], 0.0);
        auto cols = jost_detail::k_derivative_columns(eng, side, k, n, cfg);
        const auto& sg = *cols.base.sg;
        const Complex c = Complex(0, 2.0) * k;
        const std::size_t nn = sg.empty() ? 0 : sg.size();

        // integrand tables q_j(t) = d_t^{ell-1}(V m^{(n-j)}), hoisted out of
        // the x loop
        std::vector<std::vector<Complex>> qj(n + 1);
        if (!sg.empty() && ell >= 1) {
            for (int j = 0; j <= n; ++j) {
                const auto& mlow = cols.orders[n - j];
                qj[j].resize(nn);
                if (ell == 1) {
                    for (std::size_t q = 0; q < nn; ++q) qj[j][q] = sg.V[q] * mlow[q];
                } else {
                    auto dm = jost_detail::t_derivative_on_support(cols, n - j);
                    const auto& P = eng.potential_for(side);
                    for (std::size_t q = 0; q < nn; ++q) {
                        double Vp = fd_derivative(P.evaluator, sg.t[q], 1, cfg.fd_step);
                        qj[j][q] = Vp * mlow[q] + sg.V[q] * dm[q];
                    }
                }
            }
        }
        std::vector<double> wfull = sg.empty() ? std::vector<double>{} : simpson_weights(nn);

        auto eval_plus_x = [&](double xs) -> Complex { // coordinates of the + problem
            if (sg.empty() || xs >= sg.b) return Complex(0);
            if (ell == 0) {
                if (xs >= sg.a) return cols.orders[n][sg.index_of(xs)];
                // below the support: g_n(x) + T[m^{(n)}](x) by direct sums
                Complex acc(0);
                for (int j = 1; j <= n; ++j) {
                    Complex pref = jost_detail::binom(n, j) * std::pow(Complex(0, 2.0), j);
                    const auto& mlow = cols.orders[n - j];
                    Complex s(0);
                    for (std::size_t q = 0; q < nn; ++q)
                        s += wfull[q] * power_exp_integral(j, sg.t[q] - xs, c) * sg.V[q] * mlow[q];
                    acc += pref * s * sg.h;
                }
                Complex s(0);
                for (std::size_t q = 0; q < nn; ++q)
                    s += wfull[q] * h_kernel(sg.t[q] - xs, k) * sg.V[q] * cols.orders[n][q];
                return acc + s * sg.h;
            }
            Complex total(0);
            std::size_t q0 = (xs <= sg.a) ? 0 : sg.index_of(xs);
            if (nn - q0 < 3) return total;
            auto wr = simpson_weights(nn - q0);
            for (int j = 0; j <= n; ++j) {
                Complex pref = jost_detail::binom(n, j) * std::pow(Complex(0, 2.0), j);
                Complex acc(0);
                for (std::size_t q = q0; q < nn; ++q) {
                    double u = sg.t[q] - xs;
                    acc += wr[q - q0] * std::exp(c * u) * std::pow(u, j) * qj[j][q];
                }
                total -= pref * acc * sg.h;
            }
            return total;
        };
        for (std::size_t r = 0; r < nx; ++r) {
            double x = J.xgrid[r];
            double xs = (side == Side::Plus) ? x : -x;
            Complex v = eval_plus_x(xs);
            // each d/dx of the minus side picks up a sign from x -> -x
            if (side == Side::Minus && (ell % 2) == 1) v = -v;
            out(r, cidx) = v;
        }
    });

    auto [it, _] = J.partials.emplace(key, std::move(out));
    return it->second;
}

/// Convenience: compute (and cache) all partials with ell' <= ell, n' <= n
/// in dependency order.
inline void compute_partials_up_to(JostSolution& J, Side side, int ell, int n) {
    for (int nn = 0; nn <= n; ++nn)
        for (int ll = 0; ll <= ell; ++ll) mixed_partials(J, side, ll, nn);
}

} // namespace speclp
