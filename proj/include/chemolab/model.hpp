#pragma once

// Coefficients, nonlinearities and homogeneous equilibria of the
// macrophage / cytokine / oligodendrocyte chemotaxis system
//
//   m_t = Δm + m(1 - m^{a-1}) - χ ∇·(f(m)∇c)
//   c_t = ε0 Δc + δ d - c + β m
//   d_t = g(m)(1 - d)
//
// with homogeneous Neumann conditions for m and c.

#include "chemolab/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chemolab {

using ScalarFn = std::function<double(double)>;

/// Growth exponents of assumption (F), |f(y)| <= γ y^b and |f'(y)| <= γ y^ℓ.
/// Stored for reference only; a global growth bound cannot be checked at runtime.
struct GrowthMetadata {
    double gamma = 0.0;
    double b = 0.0;
    double ell = 0.0;
};

/// Chemotactic sensitivity f and damage rate g.
///
/// Every evaluation is applied to max(m, 0): the equations are only meaningful
/// for nonnegative densities and discrete undershoot must not produce
/// spurious values (e.g. a pole of m/(1+m) at m = -1).
class NonlinearitySpec {
public:
    enum class Kind { Saturating, Custom };

    /// f(m) = m/(1+m), g(m) = r m²/(1+m).
    static NonlinearitySpec saturating(double r) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw ValidationError("r > 0 required for the saturating nonlinearity");
        }
        NonlinearitySpec s;
        s.kind_ = Kind::Saturating;
        s.r_ = r;
        s.g_positive_ = true;
        return s;
    }

    /// Arbitrary f, g. Derivatives default to central differences.
    /// `g_positive` declares assumption (G), g(y) > 0 for y > 0.
    static NonlinearitySpec custom(ScalarFn f, ScalarFn g, bool g_positive,
                                   std::optional<ScalarFn> df = std::nullopt,
                                   std::optional<ScalarFn> dg = std::nullopt,
                                   GrowthMetadata meta = {}) {
        if (!f || !g) {
            throw ValidationError("custom nonlinearity needs both f and g");
        }
        NonlinearitySpec s;
        s.kind_ = Kind::Custom;
        s.f_ = std::move(f);
        s.g_ = std::move(g);
        s.df_ = df.value_or(ScalarFn{});
        s.dg_ = dg.value_or(ScalarFn{});
        s.g_positive_ = g_positive;
        s.meta_ = meta;
        if (std::abs(s.f_(0.0)) > 1e-14) {
            throw ValidationError("f(0) = 0 required");
        }
        return s;
    }

    Kind kind() const noexcept { return kind_; }
    double rate() const noexcept { return r_; }
    bool g_positive() const noexcept { return g_positive_; }
    const GrowthMetadata& metadata() const noexcept { return meta_; }

    double f(double m) const {
        const double mp = std::max(m, 0.0);
        if (kind_ == Kind::Saturating) {
            return mp / (1.0 + mp);
        }
        return f_(mp);
    }

    double g(double m) const {
        const double mp = std::max(m, 0.0);
        if (kind_ == Kind::Saturating) {
            return r_ * mp * mp / (1.0 + mp);
        }
        return g_(mp);
    }

    double df(double m) const {
        const double mp = std::max(m, 0.0);
        if (kind_ == Kind::Saturating) {
            const double s = 1.0 + mp;
            return 1.0 / (s * s);
        }
        if (df_) {
            return df_(mp);
        }
        return central_difference(f_, mp);
    }

    double dg(double m) const {
        const double mp = std::max(m, 0.0);
        if (kind_ == Kind::Saturating) {
            const double s = 1.0 + mp;
            return r_ * mp * (mp + 2.0) / (s * s);
        }
        if (dg_) {
            return dg_(mp);
        }
        return central_difference(g_, mp);
    }

    /// Short text tag used in config echoes and hashes.
    std::string describe() const {
        if (kind_ == Kind::Saturating) {
            return "saturating";
        }
        return "custom";
    }

private:
    NonlinearitySpec() = default;

    static double central_difference(const ScalarFn& fn, double y) {
        const double h = 1e-6 * std::max(1.0, y);
        // one-sided at the origin, the functions live on [0, inf)
        if (y < h) {
            return (fn(y + h) - fn(y)) / h;
        }
        return (fn(y + h) - fn(y - h)) / (2.0 * h);
    }

    Kind kind_ = Kind::Saturating;
    double r_ = 1.0;
    bool g_positive_ = true;
    ScalarFn f_, g_, df_, dg_;
    GrowthMetadata meta_;
};

/// All scalar coefficients. Validated on construction, immutable afterwards.
class ModelParams {
public:
    ModelParams(double a, double chi, double eps0, double delta, double beta,
                NonlinearitySpec nonlinearity)
        : a_(a), chi_(chi), eps0_(eps0), delta_(delta), beta_(beta),
          nl_(std::move(nonlinearity)) {
        if (!(a > 1.0) || !std::isfinite(a)) throw ValidationError("a > 1 required");
        if (!(chi > 0.0) || !std::isfinite(chi)) throw ValidationError("chi > 0 required");
        if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw ValidationError("eps0 > 0 required");
        if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("delta > 0 required");
        if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta > 0 required");
        integer_power_ = std::abs(a - std::round(a)) == 0.0 && a <= 16.0
                             ? static_cast<int>(std::round(a)) - 1
                             : -1;
    }

    double a() const noexcept { return a_; }
    double chi() const noexcept { return chi_; }
    double eps0() const noexcept { return eps0_; }
    double delta() const noexcept { return delta_; }
    double beta() const noexcept { return beta_; }
    const NonlinearitySpec& nonlinearity() const noexcept { return nl_; }

    ModelParams with_chi(double chi) const {
        return {a_, chi, eps0_, delta_, beta_, nl_};
    }
    ModelParams with_eps0(double eps0) const {
        return {a_, chi_, eps0, delta_, beta_, nl_};
    }

    /// m₊ (1 - m₊^{a-1}); integer exponents avoid pow().
    double logistic(double m) const {
        const double mp = std::max(m, 0.0);
        double pw;
        if (integer_power_ >= 0) {
            pw = 1.0;
            for (int k = 0; k < integer_power_; ++k) pw *= mp;
        } else {
            pw = std::pow(mp, a_ - 1.0);
        }
        return mp * (1.0 - pw);
    }

private:
    double a_, chi_, eps0_, delta_, beta_;
    NonlinearitySpec nl_;
    int integer_power_ = -1;
};

/// Reference parameters of the 2-D pattern experiments:
/// r = 1, a = 3, ε0 = 0.03125, δ = 1, β = 1, saturating f and g.
inline ModelParams reference_params(double chi) {
    return {3.0, chi, 0.03125, 1.0, 1.0, NonlinearitySpec::saturating(1.0)};
}

inline double eval_f(const ModelParams& p, double m) { return p.nonlinearity().f(m); }
inline double eval_g(const ModelParams& p, double m) { return p.nonlinearity().g(m); }

struct ReactionVector {
    double dm = 0.0;
    double dc = 0.0;
    double dd = 0.0;
};

/// Pointwise non-diffusive, non-chemotactic right-hand side.
inline ReactionVector reaction_rhs(const ModelParams& p, double m, double c, double d) {
    return {p.logistic(m), p.delta() * d - c + p.beta() * m, p.nonlinearity().g(m) * (1.0 - d)};
}

/// A homogeneous steady state. When `family` is set the point stands for the
/// one-parameter set (0, δζ, ζ), ζ >= 0, and m/c/d hold its ζ = 1 member.
struct Equilibrium {
    double m = 0.0;
    double c = 0.0;
    double d = 0.0;
    bool family = false;

    Equilibrium member(double zeta, double delta) const {
        if (!family) return *this;
        return {0.0, delta * zeta, zeta, false};
    }
};

/// Residual of the algebraic equilibrium system at one point.
inline double equilibrium_residual(const ModelParams& p, const Equilibrium& e) {
    const double r1 = std::abs(e.m - std::pow(e.m, p.a()));
    const double r2 = std::abs(p.delta() * e.d + p.beta() * e.m - e.c);
    const double r3 = std::abs(p.nonlinearity().g(e.m) * (1.0 - e.d));
    return std::max({r1, r2, r3});
}

/// The positive equilibrium (1, β+δ, 1) first, then the m = 0 branch.
inline std::vector<Equilibrium> equilibria(const ModelParams& p) {
    std::vector<Equilibrium> out;
    out.push_back({1.0, p.beta() + p.delta(), 1.0, false});
    if (p.nonlinearity().g(0.0) != 0.0) {
        out.push_back({0.0, p.delta(), 1.0, false});
    } else {
        out.push_back({0.0, p.delta(), 1.0, true});
    }
    return out;
}

inline Equilibrium positive_equilibrium(const ModelParams& p) {
    return {1.0, p.beta() + p.delta(), 1.0, false};
}

}  // namespace chemolab
