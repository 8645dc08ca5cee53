#pragma once

#include "chemolab/diagnostics.hpp"
#include "chemolab/errors.hpp"
#include "chemolab/fd_oracle.hpp"
#include "chemolab/sim_config.hpp"
#include "chemolab/spectral_solver.hpp"
#include "chemolab/trajectory.hpp"

#include <concepts>
#include <functional>
#include <optional>

namespace chemolab {

template <class S>
concept Stepper = requires(S s, State& st) {
    { s.step(st) } -> std::same_as<StepStatus>;
    { s.advance(st, 1L) } -> std::same_as<StepStatus>;
    { s.dt() } -> std::convertible_to<double>;
};

/// Optional observers, called as rows and snapshots are produced.
struct RunHooks {
    std::function<void(const SeriesRow&)> on_series;
    std::function<void(const State&, std::size_t index)> on_snapshot;
};

namespace detail {

inline SeriesRow make_series_row(const State& s, const SimConfig& cfg, CosineTransform& tr,
                                 const std::optional<LyapunovParams>& lp, const Equilibrium& eq) {
    SeriesRow row;
    row.t = s.t;
    row.m_min = s.m.min();
    row.m_max = s.m.max();
    row.c_min = s.c.min();
    row.c_max = s.c.max();
    row.d_min = s.d.min();
    row.d_max = s.d.max();
    const auto mass = mass_l1(s);
    row.m_l1 = mass.m;
    row.c_l1 = mass.c;
    row.d_l1 = mass.d;
    const auto sup = sup_norms(s, tr);
    row.m_sup = sup.m;
    row.c_w1inf = sup.c_w1inf;
    row.grad_c = sup.grad_c;
    row.d_sup = sup.d;
    if (lp) row.phi = lyapunov_phi(s, eq, *lp);
    if (!cfg.monitors.modes.empty()) {
        const auto a = tr.forward(s.m);
        for (const auto& [p, q] : cfg.monitors.modes) row.mode_amps.push_back(a.at(p, q));
    }
    return row;
}

inline std::optional<LyapunovParams> lyapunov_weights(const SimConfig& cfg) {
    switch (cfg.monitors.lyapunov) {
        case LyapunovMonitor::Off: return std::nullopt;
        case LyapunovMonitor::On: return pick_thetas(cfg.params);
        case LyapunovMonitor::Auto:
            if (cfg.params.chi() < chi_subcrit(cfg.params)) return pick_thetas(cfg.params);
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace detail

/// Runs `stepper` from the configured initial state, emitting the monitored
/// series, snapshots and the final classification. The state is observed at
/// every series row, snapshot and stationarity check. Deterministic given the
/// config (including its seed).
template <Stepper S>
Trajectory run_simulation(const SimConfig& cfg, S& stepper, const RunHooks& hooks = {}) {
    cfg.validate();
    State s = make_initial_state(cfg);
    Trajectory traj(cfg.grid);
    traj.modes = cfg.monitors.modes;
    CosineTransform tr(cfg.grid);
    const auto eq = positive_equilibrium(cfg.params);
    const auto lp = detail::lyapunov_weights(cfg);

    traj.invariants.mu = d_bound(s.d);
    traj.invariants.mass_bound = mass_bound(cfg.params, s);
    traj.invariants.observe(s);

    std::size_t snap_index = 0;
    auto emit_row = [&](const State& st) {
        auto row = detail::make_series_row(st, cfg, tr, lp, eq);
        traj.invariants.mass_sup = std::max(traj.invariants.mass_sup, row.m_l1 + row.c_l1);
        if (hooks.on_series) hooks.on_series(row);
        traj.series.push_back(std::move(row));
    };
    auto emit_snapshot = [&](const State& st) {
        if (cfg.keep_snapshots) traj.snapshots.push_back(st);
        if (hooks.on_snapshot) hooks.on_snapshot(st, snap_index);
        ++snap_index;
    };

    emit_row(s);
    emit_snapshot(s);

    const long n_steps = cfg.step_count();
    const long window = std::max(1L, std::lround(cfg.stationary_window / cfg.dt));
    const double window_time = static_cast<double>(window) * cfg.dt;
    Field m_check = s.m;
    long k = 0;
    bool last_row_emitted = true;
    bool last_snap_emitted = true;
    auto next_multiple = [](long k, long every) { return (k / every + 1) * every; };
    while (k < n_steps) {
        long target = std::min({n_steps, next_multiple(k, cfg.series_every), next_multiple(k, window)});
        if (cfg.snapshot_every > 0) target = std::min(target, next_multiple(k, cfg.snapshot_every));
        try {
            const auto st = stepper.advance(s, target - k);
            if (st.step_too_large) ++traj.invariants.step_too_large;
        } catch (const NonFiniteError&) {
            traj.final_state = s;
            throw;
        }
        k = target;
        s.t = static_cast<double>(k) * cfg.dt;
        traj.invariants.observe(s);
        last_row_emitted = k % cfg.series_every == 0;
        last_snap_emitted = cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0;
        if (last_row_emitted) emit_row(s);
        if (last_snap_emitted) emit_snapshot(s);
        if (k % window == 0) {
            double change = 0.0;
            for (std::size_t i = 0; i < s.m.size(); ++i) {
                change = std::max(change, std::abs(s.m[i] - m_check[i]));
            }
            traj.stationary_rate = change / (std::max(s.m.max_abs(), 1e-300) * window_time);
            traj.stationary = traj.stationary_rate < cfg.stationary_tol;
            m_check = s.m;
            if (traj.stationary && cfg.stop_on_stationary) break;
        }
    }
    if (!last_row_emitted) emit_row(s);
    if (!last_snap_emitted) emit_snapshot(s);

    traj.steps = k;
    traj.final_state = s;
    double dist_m = 0.0, dist_all = 0.0;
    for (std::size_t i = 0; i < s.m.size(); ++i) {
        const double dm = std::abs(s.m[i] - eq.m);
        dist_m = std::max(dist_m, dm);
        dist_all = std::max({dist_all, dm, std::abs(s.c[i] - eq.c), std::abs(s.d[i] - eq.d)});
    }
    traj.equilibrium_distance = dist_m;
    if (dist_all < cfg.eq_tol) {
        traj.classification = Classification::ConvergedToEquilibrium;
    } else if (traj.stationary) {
        traj.classification = Classification::StationaryPattern;
    } else {
        traj.classification = Classification::Transient;
    }
    std::tie(traj.dominant_p, traj.dominant_q) = dominant_mode(s.m);
    return traj;
}

/// Spectral run of `cfg`.
inline Trajectory simulate(const SimConfig& cfg, const RunHooks& hooks = {}) {
    cfg.validate();
    SpectralSolver solver(cfg.params, cfg.grid, cfg.dt, {.dealias = cfg.dealias, .reactions = true});
    return run_simulation(cfg, solver, hooks);
}

/// Finite-difference run of `cfg` (the oracle).
inline Trajectory fd_simulate(const SimConfig& cfg, const RunHooks& hooks = {}) {
    cfg.validate();
    FdSolver solver(cfg.params, cfg.grid, cfg.dt);
    return run_simulation(cfg, solver, hooks);
}

}  // namespace chemolab
