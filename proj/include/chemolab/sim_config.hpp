#pragma once

#include "chemolab/errors.hpp"
#include "chemolab/grid.hpp"
#include "chemolab/model.hpp"
#include "chemolab/trajectory.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <variant>
#include <vector>

namespace chemolab {

/// Uniform i.i.d. noise in [-amplitude, amplitude] on every node of all three
/// fields, added to (1, β+δ, 1). Draws come from SimConfig::seed.
struct EquilibriumPerturbation {
    double amplitude = 1e-3;
};

/// Analytic far-from-equilibrium datum: a Gaussian focus of macrophages on a
/// low background, uniform chemoattractant and damage fields.
struct FarField {
    double m_base = 0.2;
    double m_peak = 3.0;
    double x0 = 1.0;
    double y0 = 2.0;
    double width = 0.5;
    double c_value = 0.5;
    double d_value = 0.0;
};

/// Equilibrium plus amplitudes times cos(pπx/Lx) cos(qπy/Ly) in each field.
struct ModePerturbation {
    int p = 2;
    int q = 2;
    double m_amp = 1e-3;
    double c_amp = 0.0;
    double d_amp = 0.0;
};

/// Fields supplied directly (in-process use only).
struct ExplicitFields {
    std::vector<double> m, c, d;
};

using InitialCondition =
    std::variant<EquilibriumPerturbation, FarField, ModePerturbation, ExplicitFields>;

enum class LyapunovMonitor { Auto, On, Off };

struct Monitors {
    LyapunovMonitor lyapunov = LyapunovMonitor::Auto;
    std::vector<std::pair<int, int>> modes{{2, 2}};
};

struct SimConfig {
    ModelParams params;
    Grid grid;
    double dt = 1e-3;
    double t_end = 1.0;
    InitialCondition ic = EquilibriumPerturbation{};
    std::uint64_t seed = 42;
    long snapshot_every = 0;    ///< steps between snapshots; 0 keeps first and last only
    long series_every = 100;    ///< steps between time-series rows
    bool keep_snapshots = false;
    Monitors monitors;
    bool stop_on_stationary = false;
    double stationary_tol = 1e-7;     ///< relative max-norm change per unit time
    double stationary_window = 1.0;   ///< time between stationarity checks
    double eq_tol = 1e-4;             ///< max-norm distance classed as equilibrium
    bool dealias = false;             ///< 2/3-rule truncation of explicit terms

    SimConfig(ModelParams p, Grid g) : params(std::move(p)), grid(g) {}

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt > 0 required");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end > 0 required");
        if (snapshot_every < 0) throw ValidationError("snapshot_every >= 0 required");
        if (series_every <= 0) throw ValidationError("series_every > 0 required");
        if (!(stationary_tol > 0.0)) throw ValidationError("stationary_tol > 0 required");
        if (!(stationary_window > 0.0)) throw ValidationError("stationary_window > 0 required");
        if (!(eq_tol > 0.0)) throw ValidationError("eq_tol > 0 required");
        for (const auto& [p, q] : monitors.modes) {
            if (p < 0 || q < 0 || p >= grid.nx() || q >= grid.ny()) {
                throw ValidationError("monitored mode outside the grid spectrum");
            }
        }
    }

    long step_count() const {
        return static_cast<long>(std::ceil(t_end / dt - 1e-9));
    }
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Field cos_mode(const Grid& g, int p, int q) {
    const double kx = p * std::numbers::pi / g.domain().lx;
    const double ky = q * std::numbers::pi / g.domain().ly;
    return Field::from_function(g, [&](double x, double y) { return std::cos(kx * x) * std::cos(ky * y); });
}

}  // namespace detail

/// Materializes the initial condition of `cfg` on its grid.
inline State make_initial_state(const SimConfig& cfg) {
    const Grid& g = cfg.grid;
    const auto eq = positive_equilibrium(cfg.params);
    State s = State::homogeneous(g, eq);
    std::visit(
        [&](const auto& ic) {
            using T = std::decay_t<decltype(ic)>;
            if constexpr (std::is_same_v<T, EquilibriumPerturbation>) {
                if (!(ic.amplitude >= 0.0)) throw ValidationError("amplitude >= 0 required");
                std::mt19937_64 rng(cfg.seed);
                for (Field* f : {&s.m, &s.c, &s.d}) {
                    for (std::size_t k = 0; k < f->size(); ++k) {
                        (*f)[k] += ic.amplitude * (2.0 * detail::unit_uniform(rng) - 1.0);
                    }
                }
            } else if constexpr (std::is_same_v<T, FarField>) {
                if (!(ic.width > 0.0)) throw ValidationError("far-field width > 0 required");
                const double w2 = 2.0 * ic.width * ic.width;
                s.m = Field::from_function(g, [&](double x, double y) {
                    const double r2 = (x - ic.x0) * (x - ic.x0) + (y - ic.y0) * (y - ic.y0);
                    return ic.m_base + ic.m_peak * std::exp(-r2 / w2);
                });
                s.c = Field(g, ic.c_value);
                s.d = Field(g, ic.d_value);
            } else if constexpr (std::is_same_v<T, ModePerturbation>) {
                const Field mode = detail::cos_mode(g, ic.p, ic.q);
                s.m += ic.m_amp * mode;
                s.c += ic.c_amp * mode;
                s.d += ic.d_amp * mode;
            } else {
                if (ic.m.size() != g.size() || ic.c.size() != g.size() || ic.d.size() != g.size()) {
                    throw ValidationError("explicit initial fields do not match the grid");
                }
                std::copy(ic.m.begin(), ic.m.end(), s.m.values().begin());
                std::copy(ic.c.begin(), ic.c.end(), s.c.values().begin());
                std::copy(ic.d.begin(), ic.d.end(), s.d.values().begin());
            }
        },
        cfg.ic);
    if (s.m.min() < 0.0 || s.c.min() < 0.0 || s.d.min() < 0.0) {
        throw ValidationError("initial fields must be nonnegative");
    }
    if (!s.all_finite()) {
        throw ValidationError("initial fields must be finite");
    }
    return s;
}

}  // namespace chemolab
