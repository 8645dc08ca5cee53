#pragma once

// Linearization of the system about (1, β+δ, 1) on a rectangle with Neumann
// conditions. On the eigenspace of -Δ with eigenvalue λ the (m, c) block is
//
//   N(λ) = [ 1-a-λ   χ f(1) λ ]
//          [   β     -1-ε0 λ  ]
//
// and the d component decouples with rate -g(1).

#include "chemolab/errors.hpp"
#include "chemolab/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <tuple>
#include <vector>

namespace chemolab {

struct RectDomain {
    double lx = std::numbers::pi;
    double ly = std::numbers::pi;

    RectDomain() = default;
    RectDomain(double lx_, double ly_) : lx(lx_), ly(ly_) {
        if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
            throw ValidationError("domain side lengths must be > 0");
        }
    }
    double area() const noexcept { return lx * ly; }

    /// Eigenvalue of -Δ for cos(pπx/Lx) cos(qπy/Ly).
    double eigenvalue(int p, int q) const noexcept {
        const double kx = p * (std::numbers::pi / lx);
        const double ky = q * (std::numbers::pi / ly);
        return kx * kx + ky * ky;
    }
};

struct ModeIndex {
    int p = 0;
    int q = 0;
    double lambda = 0.0;
};

/// Every (p, q) with p <= pmax, q <= qmax, ascending in λ, ties by (p, q).
inline std::vector<ModeIndex> neumann_eigenvalues(const RectDomain& dom, int pmax, int qmax) {
    if (pmax < 0 || qmax < 0) {
        throw ValidationError("pmax, qmax >= 0 required");
    }
    std::vector<ModeIndex> modes;
    modes.reserve(static_cast<std::size_t>(pmax + 1) * static_cast<std::size_t>(qmax + 1));
    for (int p = 0; p <= pmax; ++p) {
        for (int q = 0; q <= qmax; ++q) {
            modes.push_back({p, q, dom.eigenvalue(p, q)});
        }
    }
    std::sort(modes.begin(), modes.end(), [](const ModeIndex& l, const ModeIndex& r) {
        return std::tie(l.lambda, l.p, l.q) < std::tie(r.lambda, r.p, r.q);
    });
    return modes;
}

using Matrix2 = std::array<std::array<double, 2>, 2>;

namespace detail {
inline double checked_f1(const ModelParams& params) {
    const double f1 = params.nonlinearity().f(1.0);
    if (!(f1 > 0.0)) {
        throw ValidationError("f(1) > 0 required for the stability analysis");
    }
    return f1;
}
}  // namespace detail

inline Matrix2 reduced_matrix(const ModelParams& params, double lambda) {
    const double f1 = detail::checked_f1(params);
    Matrix2 n{};
    n[0][0] = 1.0 - params.a() - lambda;
    n[0][1] = params.chi() * f1 * lambda;
    n[1][0] = params.beta();
    n[1][1] = -1.0 - params.eps0() * lambda;
    return n;
}

/// Tr N(λ) = -a - (1+ε0)λ.
inline double reduced_trace(const ModelParams& params, double lambda) {
    return -params.a() - (1.0 + params.eps0()) * lambda;
}

/// Det N(λ) = (a-1) + [1 + ε0(a-1) - χ f(1) β] λ + ε0 λ².
inline double reduced_det(const ModelParams& params, double lambda) {
    const double f1 = detail::checked_f1(params);
    const double am1 = params.a() - 1.0;
    return am1 + (1.0 + params.eps0() * am1 - params.chi() * f1 * params.beta()) * lambda
           + params.eps0() * lambda * lambda;
}

struct DispersionPoint {
    double lambda = 0.0;
    double trace = 0.0;
    double det = 0.0;
    std::complex<double> sigma_plus;   ///< root with the larger real part
    std::complex<double> sigma_minus;
    double g_branch = 0.0;             ///< decoupled d-rate, -g(1)

    bool unstable() const noexcept { return det < 0.0; }
};

/// Roots of σ² - Tr σ + Det = 0.
inline DispersionPoint growth_rates(const ModelParams& params, double lambda) {
    DispersionPoint dp;
    dp.lambda = lambda;
    dp.trace = reduced_trace(params, lambda);
    dp.det = reduced_det(params, lambda);
    dp.g_branch = -params.nonlinearity().g(1.0);
    const double tr = dp.trace;
    const double disc = tr * tr - 4.0 * dp.det;
    if (disc >= 0.0) {
        // the larger-magnitude root first, then Vieta for the other one
        const double s = std::sqrt(disc);
        const double big = tr <= 0.0 ? 0.5 * (tr - s) : 0.5 * (tr + s);
        const double small = big != 0.0 ? dp.det / big : 0.0;
        const double hi = std::max(big, small);
        const double lo = std::min(big, small);
        dp.sigma_plus = {hi, 0.0};
        dp.sigma_minus = {lo, 0.0};
    } else {
        const double im = 0.5 * std::sqrt(-disc);
        dp.sigma_plus = {0.5 * tr, im};
        dp.sigma_minus = {0.5 * tr, -im};
    }
    return dp;
}

/// Domain-free lower bound of χ_c, (2√(ε0(a-1)) + 1 + ε0(a-1)) / (f(1) β).
inline double chi_c0(const ModelParams& params) {
    const double f1 = detail::checked_f1(params);
    const double x = params.eps0() * (params.a() - 1.0);
    return (2.0 * std::sqrt(x) + 1.0 + x) / (f1 * params.beta());
}

/// Sufficient condition for nonlinear stability, 4√(ε0(a-1)) / (β f(1)).
inline double chi_subcrit(const ModelParams& params) {
    const double f1 = detail::checked_f1(params);
    return 4.0 * std::sqrt(params.eps0() * (params.a() - 1.0)) / (params.beta() * f1);
}

/// χ at which Det N(λ) vanishes for a given λ > 0.
inline double chi_marginal(const ModelParams& params, double lambda) {
    const double f1 = detail::checked_f1(params);
    const double am1 = params.a() - 1.0;
    return (am1 / lambda + 1.0 + params.eps0() * am1 + params.eps0() * lambda)
           / (f1 * params.beta());
}

/// λ minimizing chi_marginal over the continuum, √((a-1)/ε0).
inline double lambda_star(const ModelParams& params) {
    return std::sqrt((params.a() - 1.0) / params.eps0());
}

struct CriticalChi {
    double chi_c = 0.0;
    ModeIndex mode;
};

/// Smallest marginal χ over the nonconstant modes of the truncated grid.
inline CriticalChi chi_c_domain(const ModelParams& params, const RectDomain& dom, int pmax,
                                int qmax) {
    const auto modes = neumann_eigenvalues(dom, pmax, qmax);
    CriticalChi best;
    bool found = false;
    for (const auto& md : modes) {
        if (md.lambda <= 0.0) continue;
        const double chi = chi_marginal(params, md.lambda);
        if (!found || chi < best.chi_c) {
            best = {chi, md};
            found = true;
        }
    }
    if (!found) {
        throw ValidationError("chi_c_domain needs at least one mode with lambda > 0");
    }
    return best;
}

/// Mode bounds whose largest eigenvalue is at least 4 λ*, which brackets
/// the minimizer of chi_marginal since it grows without bound in λ.
inline std::pair<int, int> default_mode_bounds(const ModelParams& params, const RectDomain& dom) {
    const double target = 4.0 * lambda_star(params);
    const double k = std::sqrt(target);
    const int pmax = std::max(1, static_cast<int>(std::ceil(k * dom.lx / std::numbers::pi)));
    const int qmax = std::max(1, static_cast<int>(std::ceil(k * dom.ly / std::numbers::pi)));
    return {pmax, qmax};
}

/// Modes with Det N(λ) < 0. Marginal modes (Det = 0) count as stable.
inline std::vector<ModeIndex> unstable_band(const ModelParams& params, const RectDomain& dom,
                                            int pmax, int qmax) {
    std::vector<ModeIndex> out;
    for (const auto& md : neumann_eigenvalues(dom, pmax, qmax)) {
        if (reduced_det(params, md.lambda) < 0.0) {
            out.push_back(md);
        }
    }
    return out;
}

}  // namespace chemolab
