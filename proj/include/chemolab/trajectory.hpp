#pragma once

#include "chemolab/grid.hpp"
#include "chemolab/model.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace chemolab {

/// (m, c, d) on a common grid at time t.
struct State {
    Field m;
    Field c;
    Field d;
    double t = 0.0;

    explicit State(const Grid& grid) : m(grid), c(grid), d(grid) {}
    State(Field m_, Field c_, Field d_, double t_ = 0.0)
        : m(std::move(m_)), c(std::move(c_)), d(std::move(d_)), t(t_) {
        if (!(m.grid() == c.grid()) || !(m.grid() == d.grid())) {
            throw ValidationError("state fields must share one grid");
        }
    }

    const Grid& grid() const noexcept { return m.grid(); }

    static State homogeneous(const Grid& grid, const Equilibrium& e, double t = 0.0) {
        return {Field(grid, e.m), Field(grid, e.c), Field(grid, e.d), t};
    }

    bool all_finite() const { return m.all_finite() && c.all_finite() && d.all_finite(); }
};

/// Max-norm distance between two states over all three fields.
inline double max_distance(const State& a, const State& b) {
    double r = 0.0;
    for (std::size_t k = 0; k < a.m.size(); ++k) {
        r = std::max({r, std::abs(a.m[k] - b.m[k]), std::abs(a.c[k] - b.c[k]),
                      std::abs(a.d[k] - b.d[k])});
    }
    return r;
}

/// One row of the monitored time series.
struct SeriesRow {
    double t = 0.0;
    double m_min = 0.0, m_max = 0.0;
    double c_min = 0.0, c_max = 0.0;
    double d_min = 0.0, d_max = 0.0;
    double m_l1 = 0.0, c_l1 = 0.0, d_l1 = 0.0;
    double m_sup = 0.0;      ///< ‖m‖∞
    double c_w1inf = 0.0;    ///< ‖c‖∞ + ‖∇c‖∞
    double grad_c = 0.0;     ///< ‖∇c‖∞
    double d_sup = 0.0;      ///< ‖d‖∞
    double phi = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> mode_amps;
};

/// Extremes seen over every step of a run, for the a-priori bound checks.
struct InvariantSummary {
    double min_m = std::numeric_limits<double>::infinity();
    double min_c = std::numeric_limits<double>::infinity();
    double min_d = std::numeric_limits<double>::infinity();
    double max_d = -std::numeric_limits<double>::infinity();
    double mu = 1.0;                ///< max(1, max d0)
    double mass_sup = 0.0;          ///< sup_t (‖m‖₁ + ‖c‖₁) over series rows
    double mass_bound = 0.0;        ///< max(|Ω|(δμ + k_a), ‖m0‖₁ + ‖c0‖₁)
    long step_too_large = 0;        ///< StepTooLarge advisories raised

    void observe(const State& s) {
        min_m = std::min(min_m, s.m.min());
        min_c = std::min(min_c, s.c.min());
        min_d = std::min(min_d, s.d.min());
        max_d = std::max(max_d, s.d.max());
    }
};

enum class Classification { ConvergedToEquilibrium, StationaryPattern, Transient };

inline std::string to_string(Classification c) {
    switch (c) {
        case Classification::ConvergedToEquilibrium: return "converged to equilibrium";
        case Classification::StationaryPattern: return "stationary pattern";
        case Classification::Transient: return "transient";
    }
    return "transient";
}

struct Trajectory {
    std::vector<SeriesRow> series;
    std::vector<std::pair<int, int>> modes;   ///< columns of SeriesRow::mode_amps
    std::vector<State> snapshots;             ///< kept only when requested
    State final_state;
    InvariantSummary invariants;
    bool stationary = false;
    double stationary_rate = std::numeric_limits<double>::infinity();
    long steps = 0;
    Classification classification = Classification::Transient;
    int dominant_p = 0;
    int dominant_q = 0;
    double equilibrium_distance = 0.0;        ///< final ‖m - 1‖∞

    explicit Trajectory(const Grid& grid) : final_state(grid) {}
};

}  // namespace chemolab
