#pragma once

// Runtime monitors for the a-priori estimates: L¹ masses and their bound,
// the weighted L² Lyapunov functional with admissible weights, the three
// quadratic-form gaps behind its decay, modal energy, sup-norm series and the
// two-solution Gronwall estimate.

#include "chemolab/cosine_transform.hpp"
#include "chemolab/errors.hpp"
#include "chemolab/linear_stability.hpp"
#include "chemolab/model.hpp"
#include "chemolab/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace chemolab {

// ---------------------------------------------------------------------------
// masses

struct Masses {
    double m = 0.0;
    double c = 0.0;
    double d = 0.0;
};

inline Masses mass_l1(const State& s) { return {l1_norm(s.m), l1_norm(s.c), l1_norm(s.d)}; }

/// k_a = max_{m >= 0} [(β+2) m - m^a], the tight constant in
/// (β+1) m - m^a <= k_a - m. The maximizer is ((β+2)/a)^{1/(a-1)}.
inline double logistic_mass_constant(const ModelParams& p) {
    const double s = p.beta() + 2.0;
    const double m_star = std::pow(s / p.a(), 1.0 / (p.a() - 1.0));
    return s * m_star - std::pow(m_star, p.a());
}

/// μ = max(1, ‖d0‖∞): d stays in [0, μ] for all time.
inline double d_bound(const Field& d0) { return std::max(1.0, d0.max_abs()); }

/// Eventual bound |Ω| (δ μ + k_a) on ‖m‖₁ + ‖c‖₁.
inline double large_time_mass_bound(const ModelParams& p, const RectDomain& dom, double mu) {
    return dom.area() * (p.delta() * mu + logistic_mass_constant(p));
}

/// K1* = max(|Ω|(δμ + k_a), ‖m0‖₁ + ‖c0‖₁), the bound on ‖m‖₁ + ‖c‖₁ for all t.
inline double mass_bound(const ModelParams& p, const State& initial) {
    const double mu = d_bound(initial.d);
    const auto m0 = mass_l1(initial);
    return std::max(large_time_mass_bound(p, initial.grid().domain(), mu), m0.m + m0.c);
}

// ---------------------------------------------------------------------------
// Lyapunov functional

struct LyapunovParams {
    double alpha = 0.5;
    double theta1 = 1.0;
    double theta2 = 1.0;
};

/// Checks both weight conditions literally, as strict inequalities:
/// θ1 < 4α(a-1)/β², χ < 2√(θ1 ε0)/f(1) and θ2 > δ² θ1 / (4 g(1)(1-α)).
inline bool lyapunov_admissible(const ModelParams& p, const LyapunovParams& lp) {
    const double f1 = p.nonlinearity().f(1.0);
    const double g1 = p.nonlinearity().g(1.0);
    const bool a1 = lp.alpha > 0.0 && lp.alpha < 1.0 && lp.theta1 > 0.0
                    && lp.theta1 < 4.0 * lp.alpha * (p.a() - 1.0) / (p.beta() * p.beta())
                    && p.chi() < 2.0 * std::sqrt(lp.theta1 * p.eps0()) / f1;
    const bool a2 = lp.theta2 > p.delta() * p.delta() * lp.theta1 / (4.0 * g1 * (1.0 - lp.alpha));
    return a1 && a2;
}

/// Deterministic admissible weights.
///
/// θ1 must lie in (χ² f(1)² / (4 ε0), 4 α (a-1) / β²), which is nonempty iff
/// α > α_min = χ² f(1)² β² / (16 ε0 (a-1)); α_min < 1 is exactly χ < χ_subcrit.
/// α is the midpoint of (α_min, 1), θ1 the geometric mean of its interval and
/// θ2 = 1.5 × δ² θ1 / (4 g(1) (1-α)).
inline LyapunovParams pick_thetas(const ModelParams& p) {
    if (!(p.chi() < chi_subcrit(p))) {
        throw InfeasibleError("Lyapunov weights need chi < chi_subcrit");
    }
    const double f1 = p.nonlinearity().f(1.0);
    const double g1 = p.nonlinearity().g(1.0);
    if (!(g1 > 0.0)) {
        throw InfeasibleError("Lyapunov weights need g(1) > 0");
    }
    const double chi_f1 = p.chi() * f1;
    const double alpha_min =
        chi_f1 * chi_f1 * p.beta() * p.beta() / (16.0 * p.eps0() * (p.a() - 1.0));
    LyapunovParams lp;
    lp.alpha = 0.5 * (alpha_min + 1.0);
    const double lo = chi_f1 * chi_f1 / (4.0 * p.eps0());
    const double hi = 4.0 * lp.alpha * (p.a() - 1.0) / (p.beta() * p.beta());
    lp.theta1 = std::sqrt(lo * hi);
    lp.theta2 = 1.5 * p.delta() * p.delta() * lp.theta1 / (4.0 * g1 * (1.0 - lp.alpha));
    if (!lyapunov_admissible(p, lp)) {
        throw InfeasibleError("no admissible Lyapunov weights at these parameters");
    }
    return lp;
}

/// φ = ½ (‖m - m̄‖² + θ1 ‖c - c̄‖² + θ2 ‖d - d̄‖²).
inline double lyapunov_phi(const State& s, const Equilibrium& e, const LyapunovParams& lp) {
    double sm = 0.0, sc = 0.0, sd = 0.0;
    for (std::size_t k = 0; k < s.m.size(); ++k) {
        const double dm = s.m[k] - e.m;
        const double dc = s.c[k] - e.c;
        const double dd = s.d[k] - e.d;
        sm += dm * dm;
        sc += dc * dc;
        sd += dd * dd;
    }
    const double w = s.grid().weight();
    return 0.5 * w * (sm + lp.theta1 * sc + lp.theta2 * sd);
}

using SymMatrix2 = std::array<double, 3>;  // {xx, xy, yy}

inline double largest_eigenvalue(const SymMatrix2& s) {
    const double mean = 0.5 * (s[0] + s[2]);
    const double half_diff = 0.5 * (s[0] - s[2]);
    return mean + std::hypot(half_diff, s[1]);
}

/// The three 2x2 forms bounding φ'(t) from above:
/// gradient block in (∇m̃, ∇c̃), (m̃, c̃) block with weight α, (c̃, d̃) block with 1-α.
inline std::array<SymMatrix2, 3> quadratic_forms(const ModelParams& p, const LyapunovParams& lp) {
    const double f1 = p.nonlinearity().f(1.0);
    const double g1 = p.nonlinearity().g(1.0);
    return {{
        {-1.0, 0.5 * p.chi() * f1, -lp.theta1 * p.eps0()},
        {1.0 - p.a(), 0.5 * p.beta() * lp.theta1, -lp.alpha * lp.theta1},
        {-(1.0 - lp.alpha) * lp.theta1, 0.5 * lp.theta1 * p.delta(), -lp.theta2 * g1},
    }};
}

struct FormGaps {
    double omega1 = 0.0;
    double omega2 = 0.0;
    double omega3 = 0.0;
    bool all_positive() const { return omega1 > 0.0 && omega2 > 0.0 && omega3 > 0.0; }
};

/// Negated largest eigenvalues of the three forms, without validation.
inline FormGaps form_gaps(const ModelParams& p, const LyapunovParams& lp) {
    const auto forms = quadratic_forms(p, lp);
    return {-largest_eigenvalue(forms[0]), -largest_eigenvalue(forms[1]),
            -largest_eigenvalue(forms[2])};
}

/// As form_gaps, but every gap must be strictly positive.
inline FormGaps quadratic_form_gaps(const ModelParams& p, const LyapunovParams& lp) {
    const auto g = form_gaps(p, lp);
    if (!g.all_positive()) {
        throw NonPositiveGapError("Lyapunov weights are not admissible: a form gap is <= 0");
    }
    return g;
}

/// Least-squares slope of log(values) against times, over t >= t_from.
inline double log_linear_slope(std::span<const double> times, std::span<const double> values,
                               double t_from = 0.0) {
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_from || !(values[k] > 0.0)) continue;
        const double y = std::log(values[k]);
        st += times[k];
        sy += y;
        stt += times[k] * times[k];
        sty += times[k] * y;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double dn = static_cast<double>(n);
    return (dn * sty - st * sy) / (dn * stt - st * st);
}

// ---------------------------------------------------------------------------
// modal content

inline double mode_amplitude(const Field& f, int p, int q) {
    return cos_forward(f).at(p, q);
}

/// Share of Σ_{(p,q) != (0,0)} a_pq² carried by mode (p, q).
inline double modal_energy_fraction(const Field& f, int p, int q) {
    const auto a = cos_forward(f);
    double total = 0.0;
    for (int qq = 0; qq < f.grid().ny(); ++qq) {
        for (int pp = 0; pp < f.grid().nx(); ++pp) {
            if (pp == 0 && qq == 0) continue;
            total += a.at(pp, qq) * a.at(pp, qq);
        }
    }
    if (total == 0.0) return 0.0;
    return a.at(p, q) * a.at(p, q) / total;
}

/// Nonconstant mode with the largest |a_pq|.
inline std::pair<int, int> dominant_mode(const Field& f) {
    const auto a = cos_forward(f);
    std::pair<int, int> best{0, 0};
    double amp = -1.0;
    for (int q = 0; q < f.grid().ny(); ++q) {
        for (int p = 0; p < f.grid().nx(); ++p) {
            if (p == 0 && q == 0) continue;
            if (std::abs(a.at(p, q)) > amp) {
                amp = std::abs(a.at(p, q));
                best = {p, q};
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// sup norms

struct SupNorms {
    double m = 0.0;        ///< ‖m‖∞
    double c_w1inf = 0.0;  ///< ‖c‖∞ + ‖∇c‖∞
    double d = 0.0;        ///< ‖d‖∞
    double grad_c = 0.0;   ///< ‖∇c‖∞ (Euclidean length at nodes)
};

inline SupNorms sup_norms(const State& s, CosineTransform& tr) {
    const auto cc = tr.forward(s.c);
    Field gx(s.grid()), gy(s.grid());
    tr.gradient_x(cc.values(), gx.values());
    tr.gradient_y(cc.values(), gy.values());
    double g = 0.0;
    for (std::size_t k = 0; k < gx.size(); ++k) g = std::max(g, std::hypot(gx[k], gy[k]));
    return {s.m.max_abs(), s.c.max_abs() + g, s.d.max_abs(), g};
}

inline SupNorms sup_norms(const State& s) {
    CosineTransform tr(s.grid());
    return sup_norms(s, tr);
}

struct SupNormPoint {
    double t = 0.0;
    SupNorms norms;
};

/// (‖m‖∞, ‖c‖_{W^{1,∞}}, ‖d‖∞) at every monitored time of a run.
inline std::vector<SupNormPoint> sup_norm_series(const Trajectory& traj) {
    std::vector<SupNormPoint> out;
    out.reserve(traj.series.size());
    for (const auto& row : traj.series) {
        out.push_back({row.t, {row.m_sup, row.c_w1inf, row.d_sup, row.grad_c}});
    }
    return out;
}

/// False when any component increases strictly at every sample over the
/// final half of the series, i.e. shows monotone growth.
inline bool sup_norms_bounded(const std::vector<SupNormPoint>& s) {
    if (s.size() < 4) return true;
    const std::size_t half = s.size() / 2;
    auto grows = [&](auto get) {
        for (std::size_t k = half + 1; k < s.size(); ++k) {
            if (!(get(s[k]) > get(s[k - 1]))) return false;
        }
        return true;
    };
    return !grows([](const SupNormPoint& p) { return p.norms.m; })
           && !grows([](const SupNormPoint& p) { return p.norms.c_w1inf; })
           && !grows([](const SupNormPoint& p) { return p.norms.d; });
}

// ---------------------------------------------------------------------------
// two-solution stability estimate

struct GronwallConstants {
    double mu = 0.0;      ///< ‖d2‖∞ over the run
    double mu_c = 0.0;    ///< ‖∇c1‖∞ over the run
    double mu_m = 0.0;    ///< max(‖m1‖∞, ‖m2‖∞)
    double mu_f = 0.0;    ///< sup |f| on [0, μ_m]
    double mu_fp = 0.0;   ///< sup |f'| on [0, μ_m]
    double mu_gp = 0.0;   ///< sup |g'| on [0, μ_m]
    double G = 0.0;
};

inline double gronwall_rate(const ModelParams& p, const GronwallConstants& k) {
    const double chi2 = p.chi() * p.chi();
    const double t1 = 2.0 + chi2 * k.mu_fp * k.mu_fp * k.mu_c * k.mu_c
                      + chi2 * p.beta() * k.mu_f * k.mu_f / (2.0 * p.eps0())
                      + k.mu_gp * (1.0 + k.mu);
    const double t2 = p.beta() + p.delta();
    const double t3 = chi2 * p.delta() * k.mu_f * k.mu_f / (2.0 * p.eps0()) + (1.0 + k.mu);
    return std::max({t1, t2, t3});
}

namespace detail {
inline void require_matching(const Trajectory& r1, const Trajectory& r2) {
    if (r1.snapshots.empty() || r1.snapshots.size() != r2.snapshots.size()) {
        throw MismatchedRunsError("runs need the same nonzero number of snapshots");
    }
    for (std::size_t k = 0; k < r1.snapshots.size(); ++k) {
        if (!(r1.snapshots[k].grid() == r2.snapshots[k].grid())
            || std::abs(r1.snapshots[k].t - r2.snapshots[k].t) > 1e-12) {
            throw MismatchedRunsError("snapshot grids or times differ");
        }
    }
}
}  // namespace detail

/// Sup-norm constants measured from the snapshots of two runs.
inline GronwallConstants measure_gronwall_constants(const Trajectory& r1, const Trajectory& r2,
                                                    const ModelParams& p) {
    detail::require_matching(r1, r2);
    GronwallConstants k;
    CosineTransform tr(r1.snapshots.front().grid());
    for (std::size_t s = 0; s < r1.snapshots.size(); ++s) {
        const auto& a = r1.snapshots[s];
        const auto& b = r2.snapshots[s];
        k.mu = std::max(k.mu, b.d.max_abs());
        k.mu_m = std::max({k.mu_m, a.m.max_abs(), b.m.max_abs()});
        k.mu_c = std::max(k.mu_c, sup_norms(a, tr).grad_c);
    }
    const auto& nl = p.nonlinearity();
    constexpr int samples = 2000;
    for (int i = 0; i <= samples; ++i) {
        const double y = k.mu_m * i / samples;
        k.mu_f = std::max(k.mu_f, std::abs(nl.f(y)));
        k.mu_fp = std::max(k.mu_fp, std::abs(nl.df(y)));
        k.mu_gp = std::max(k.mu_gp, std::abs(nl.dg(y)));
    }
    k.G = gronwall_rate(p, k);
    return k;
}

struct GronwallPoint {
    double t = 0.0;
    double energy = 0.0;  ///< E(t)
    double bound = 0.0;   ///< e^{Gt} E(0) (1 + slack)
    bool ok = true;
};

struct GronwallReport {
    GronwallConstants constants;
    std::vector<GronwallPoint> points;
    bool passed = true;
};

/// E(t) = ‖m1-m2‖² + (χ² μ_f² / 2ε0) ‖c1-c2‖² + ‖d1-d2‖².
inline double gronwall_energy(const State& a, const State& b, double c_weight) {
    const double em = l2_norm(a.m - b.m);
    const double ec = l2_norm(a.c - b.c);
    const double ed = l2_norm(a.d - b.d);
    return em * em + c_weight * ec * ec + ed * ed;
}

inline GronwallReport gronwall_check(const Trajectory& r1, const Trajectory& r2,
                                     const ModelParams& p, const GronwallConstants& k,
                                     double slack = 0.02) {
    detail::require_matching(r1, r2);
    GronwallReport rep;
    rep.constants = k;
    const double w = p.chi() * p.chi() * k.mu_f * k.mu_f / (2.0 * p.eps0());
    const double t0 = r1.snapshots.front().t;
    const double e0 = gronwall_energy(r1.snapshots.front(), r2.snapshots.front(), w);
    for (std::size_t s = 0; s < r1.snapshots.size(); ++s) {
        GronwallPoint pt;
        pt.t = r1.snapshots[s].t;
        pt.energy = gronwall_energy(r1.snapshots[s], r2.snapshots[s], w);
        pt.bound = std::exp(k.G * (pt.t - t0)) * e0 * (1.0 + slack);
        pt.ok = pt.energy <= pt.bound;
        rep.passed = rep.passed && pt.ok;
        rep.points.push_back(pt);
    }
    return rep;
}

inline GronwallReport gronwall_check(const Trajectory& r1, const Trajectory& r2,
                                     const ModelParams& p, double slack = 0.02) {
    return gronwall_check(r1, r2, p, measure_gronwall_constants(r1, r2, p), slack);
}

}  // namespace chemolab
