// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "speclp/config.hpp"
#include "speclp/grid.hpp"
#include "speclp/quadrature.hpp"

namespace speclp {

enum class PotentialClass { Free, CompactSmooth, Schwartz, Characteristic };

inline const char* to_string(PotentialClass c) {
    switch (c) {
        case PotentialClass::Free: return "free";
        case PotentialClass::CompactSmooth: return "compact-smooth";
        case PotentialClass::Schwartz: return "schwartz";
        case PotentialClass::Characteristic: return "characteristic";
    }
    return "?";
}

/// Real-valued potential with support/class metadata.  Characteristic
/// potentials use the closed-interval convention: the evaluator returns the
/// interior value at the support endpoints, so quadrature over [a,b] never
/// sees the jump.
struct Potential {
    std::string kind = "free";
    std::map<std::string, double> params;      // deterministic (sorted) order
    PotentialClass cls = PotentialClass::Free;
    std::function<double(double)> evaluator = [](double) { return 0.0; };
    std::optional<std::pair<double, double>> support; // exact; 0 outside

    double operator()(double x) const { return evaluator(x); }

    bool is_free() const { return cls == PotentialClass::Free; }
    bool has_compact_support() const { return support.has_value(); }

    double sup_abs(double window = 40.0) const {
        double m = 0;
        for (int i = 0; i <= 4000; ++i) {
            double x = -window + 2 * window * i / 4000.0;
            m = std::max(m, std::abs(evaluator(x)));
        }
        return m;
    }

    /// Smallest node-aligned interval outside of which |V| stays below
    /// cutoff * max(1, sup|V|).  Exact support when declared.
    std::pair<double, double> numeric_support(const NumericsConfig& cfg) const {
        if (is_free()) return {0.0, 0.0};
        if (support) return *support;
        double thresh = cfg.support_cutoff * std::max(1.0, sup_abs(cfg.xmax - 0.0));
        Grid1D g = Grid1D::from_step(cfg.xmin, cfg.xmax, cfg.dx);
        std::size_t lo = 0, hi = g.size() - 1;
        while (lo < hi && std::abs(evaluator(g[lo])) < thresh) ++lo;
        while (hi > lo && std::abs(evaluator(g[hi])) < thresh) --hi;
        if (lo >= hi) return {0.0, 0.0};
        return {g[lo], g[hi]};
    }
};

inline Potential make_potential(const std::string& kind, const std::map<std::string, double>& params) {
    auto need = [&](const char* name) {
        auto it = params.find(name);
        if (it == params.end())
            throw std::invalid_argument("make_potential: missing parameter '" + std::string(name) +
                                        "' for kind '" + kind + "'");
        return it->second;
    };
    Potential V;
    V.kind = kind;
    V.params = params;
    if (kind == "free") {
        V.cls = PotentialClass::Free;
        V.support = {{0.0, 0.0}};
        V.evaluator = [](double) { return 0.0; };
    } else if (kind == "square") {
        double c = need("c"), a = need("a"), b = need("b");
        if (!(b > a)) throw std::invalid_argument("make_potential: square needs b > a");
        V.cls = PotentialClass::Characteristic;
        V.support = {{a, b}};
        V.evaluator = [c, a, b](double x) { return (x >= a && x <= b) ? c : 0.0; };
    } else if (kind == "well") {
        double v0 = need("V0"), L = need("L");
        if (!(L > 0)) throw std::invalid_argument("make_potential: well needs L > 0");
        V.cls = PotentialClass::Characteristic;
        V.support = {{0.0, L}};
        V.evaluator = [v0, L](double x) { return (x >= 0.0 && x <= L) ? -v0 : 0.0; };
    } else if (kind == "poschl_teller") {
        double nu = need("nu");
        if (!(nu > 0)) throw std::invalid_argument("make_potential: poschl_teller needs nu > 0");
        V.cls = PotentialClass::Schwartz;
        double amp = nu * (nu + 1.0);
        V.evaluator = [amp](double x) {
            double s = 1.0 / std::cosh(x);
            return -amp * s * s;
        };
    } else if (kind == "bump") {
        double A = need("A"), a = need("a"), b = need("b");
        if (!(b > a)) throw std::invalid_argument("make_potential: bump needs b > a");
        V.cls = PotentialClass::CompactSmooth;
        V.support = {{a, b}};
        V.evaluator = [A, a, b](double x) {
            double u = (2.0 * x - a - b) / (b - a);
            if (std::abs(u) >= 1.0) return 0.0;
            return A * std::exp(-1.0 / (1.0 - u * u));
        };
    } else if (kind == "gauss") {
        double A = need("A"), sigma = need("sigma");
        if (!(sigma > 0)) throw std::invalid_argument("make_potential: gauss needs sigma > 0");
        V.cls = PotentialClass::Schwartz;
        V.evaluator = [A, sigma](double x) { return A * std::exp(-x * x / (sigma * sigma)); };
    } else {
        throw std::invalid_argument("make_potential: unknown kind '" + kind + "'");
    }
    return V;
}

/// max over i <= n of int (1+|y|)^gamma |V^(i)(y)| dy.  n = 0 is the
/// L^1_gamma norm.  Distributional derivatives of characteristic potentials
/// are not in L^1, so n >= 1 there returns +infinity.  Divergence of the
/// integral itself (tail partial sums failing a Cauchy test over expanding
/// windows) throws.
inline double weighted_norm(const Potential& V, double gamma, int n,
                            const NumericsConfig& cfg = {}) {
    if (gamma < 0) throw std::invalid_argument("weighted_norm: gamma must be >= 0");
    if (n < 0) throw std::invalid_argument("weighted_norm: n must be >= 0");
    if (V.is_free()) return 0.0;
    if (V.cls == PotentialClass::Characteristic && n >= 1)
        return std::numeric_limits<double>::infinity();

    const double h = cfg.dx;
    double best = 0.0;
    for (int i = 0; i <= n; ++i) {
        auto term = [&](double a, double b) {
            Grid1D g = Grid1D::from_step(a, b, h);
            std::vector<double> vals(g.size());
            for (std::size_t m = 0; m < g.size(); ++m) {
                double d = (i == 0) ? V(g[m]) : fd_derivative(V.evaluator, g[m], i, cfg.fd_step);
                vals[m] = std::pow(1.0 + std::abs(g[m]), gamma) * std::abs(d);
            }
            return integrate_samples<double>(std::span<const double>(vals), h);
        };
        double total;
        if (V.support) {
            auto [a, b] = *V.support;
            total = (b > a) ? term(a, b) : 0.0;
        } else {
            // Expanding windows [-R, R], R doubling; the increments must
            // eventually fall below a Cauchy threshold or the integral is
            // declared divergent.
            double R = 10.0;
            total = term(-R, R);
            double inc = std::numeric_limits<double>::infinity();
            for (int step = 0; step < 5; ++step) {
                inc = term(-2 * R, -R) + term(R, 2 * R);
                total += inc;
                R *= 2;
                if (inc < 1e-13 * std::max(1.0, total)) break;
            }
            if (!(inc < 1e-10 * std::max(1.0, total)))
                throw std::runtime_error("weighted_norm: integral fails Cauchy test (divergent)");
        }
        best = std::max(best, total);
    }
    return best;
}

// ---- plain-text key-value record -------------------------------------

inline std::string to_record(const Potential& V) {
    std::ostringstream os;
    os.precision(17);
    os << "kind = " << V.kind << "\n";
    for (const auto& [k, v] : V.params) os << k << " = " << v << "\n";
    if (V.support) os << "support = " << V.support->first << " " << V.support->second << "\n";
    return os.str();
}

inline Potential parse_potential_record(const std::string& text) {
    std::istringstream is(text);
    std::string line, kind;
    std::map<std::string, double> params;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t"));
            auto e = s.find_last_not_of(" \t\r");
            if (e != std::string::npos) s.erase(e + 1);
        };
        trim(key);
        trim(val);
        if (key.empty()) continue;
        if (key == "kind") {
            kind = val;
        } else if (key == "support") {
            // derived; ignored on input
        } else {
            params[key] = std::stod(val);
        }
    }
    if (kind.empty()) throw std::invalid_argument("potential record: missing 'kind'");
    return make_potential(kind, params);
}

} // namespace speclp
