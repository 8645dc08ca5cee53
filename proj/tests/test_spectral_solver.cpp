#include "chemolab/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace chemolab;

namespace {

const RectDomain square{};

State smooth_state(const Grid& g, const ModelParams& p) {
    const auto eq = positive_equilibrium(p);
    return {Field::from_function(g, [&](double x, double y) {
                return eq.m + 0.2 * std::cos(x) * std::cos(2 * y) + 0.1 * std::cos(3 * x);
            }),
            Field::from_function(g, [&](double x, double y) {
                return eq.c + 0.3 * std::cos(2 * x) * std::cos(y);
            }),
            Field::from_function(g, [&](double x, double y) {
                return 0.5 + 0.2 * std::cos(x + 0.0 * y) * std::cos(y);
            })};
}

double max_norm(const State& a, const State& b) { return max_distance(a, b); }

State run_to(const ModelParams& p, const Grid& g, double dt, double t_end) {
    SpectralSolver s(p, g, dt);
    State st = smooth_state(g, p);
    s.advance(st, std::lround(t_end / dt));
    return st;
}

}  // namespace

TEST(SpectralSolver, EquilibriumIsAFixedPoint) {
    const Grid g(square, 64, 64);
    for (double chi : {1.0, 3.18}) {
        const auto p = reference_params(chi);
        SpectralSolver solver(p, g, 1e-3);
        const State eq = State::homogeneous(g, positive_equilibrium(p));
        State s = eq;
        solver.step(s);
        EXPECT_LE(max_norm(s, eq), 1e-13);
        for (int k = 0; k < 100; ++k) {
            State before = s;
            solver.step(s);
            EXPECT_LE(max_norm(s, before), 1e-13);
        }
        EXPECT_NEAR(s.t, 101e-3, 1e-12);
    }
}

TEST(SpectralSolver, CrankNicolsonFactorForPureDiffusion) {
    const Grid g(square, 32, 32);
    const auto p = reference_params(3.0);
    for (double dt : {0.1, 0.05, 0.025}) {
        SpectralSolver solver(p, g, dt, {.dealias = false, .reactions = false});
        const double amp = 0.25;
        State s(Field(g, 1.0) + amp * detail::cos_mode(g, 2, 2),
                Field(g, 2.0) + amp * detail::cos_mode(g, 1, 3), Field(g, 0.7));
        solver.step(s);
        const double gm = mode_amplitude(s.m, 2, 2) / amp;
        const double gc = mode_amplitude(s.c, 1, 3) / amp;
        // two half steps of Crank–Nicolson per step
        const double hm = SpectralSolver::crank_nicolson_factor(8.0, 0.5 * dt);
        const double hc = SpectralSolver::crank_nicolson_factor(p.eps0() * 10.0, 0.5 * dt);
        EXPECT_NEAR(gm, hm * hm, 1e-13);
        EXPECT_NEAR(gc, hc * hc, 1e-13);
        // one-step error against the exact decay is third order in λ dt
        const double z = 8.0 * dt;
        EXPECT_LE(std::abs(gm - std::exp(-z)), z * z * z / 10.0);
        EXPECT_NEAR(mode_amplitude(s.m, 0, 0), 1.0, 1e-14);
        EXPECT_LE((s.d - Field(g, 0.7)).max_abs(), 1e-15);
    }
}

TEST(SpectralSolver, BatchedAdvanceMatchesRepeatedSteps) {
    const Grid g(square, 32, 32);
    const auto p = reference_params(3.18);
    SpectralSolver a(p, g, 1e-2), b(p, g, 1e-2);
    State sa = smooth_state(g, p), sb = sa;
    for (int k = 0; k < 37; ++k) a.step(sa);
    b.advance(sb, 37);
    EXPECT_LE(max_norm(sa, sb), 1e-12);
    EXPECT_NEAR(sa.t, sb.t, 1e-12);
    EXPECT_FALSE(b.advance(sb, 0).step_too_large);
}

TEST(SpectralSolver, TemporalOrderTwo) {
    const Grid g(square, 32, 32);
    const auto p = reference_params(3.18);
    const double dt = 0.04, t_end = 1.0;
    const State ref = run_to(p, g, dt / 8.0, t_end);
    const double e1 = max_norm(run_to(p, g, dt, t_end), ref);
    const double e2 = max_norm(run_to(p, g, dt / 2.0, t_end), ref);
    const double ratio = e1 / e2;
    EXPECT_GE(ratio, 3.0);
    EXPECT_LE(ratio, 5.0);
}

TEST(SpectralSolver, LinearizedGrowthMatchesDispersionRelation) {
    const Grid g(square, 32, 32);
    const auto p = reference_params(3.18);
    SimConfig cfg(p, g);
    cfg.dt = 1e-3;
    cfg.t_end = 5.0;
    cfg.ic = ModePerturbation{2, 2, 1e-6, 0.0, 0.0};
    cfg.series_every = 100;
    cfg.monitors.lyapunov = LyapunovMonitor::Off;
    const auto traj = simulate(cfg);
    std::vector<double> t, a;
    for (const auto& row : traj.series) {
        t.push_back(row.t);
        a.push_back(std::abs(row.mode_amps.at(0)));
    }
    const double slope = log_linear_slope(t, a, 1.0);
    const double sigma = growth_rates(p, 8.0).sigma_plus.real();
    EXPECT_NEAR(slope, sigma, 0.05 * std::abs(sigma));
}

TEST(SpectralSolver, DamageStaysInItsBounds) {
    const Grid g(square, 32, 32);
    const auto p = reference_params(3.18);
    SpectralSolver solver(p, g, 1e-2);
    State s = smooth_state(g, p);
    const double mu = d_bound(s.d);
    for (int k = 0; k < 500; ++k) {
        solver.step(s);
        ASSERT_GE(s.d.min(), -1e-8);
        ASSERT_LE(s.d.max(), mu + 1e-8);
    }
}

TEST(SpectralSolver, NonFiniteStateIsReported) {
    const Grid g(square, 16, 16);
    SpectralSolver solver(reference_params(1.0), g, 1e-2);
    State s = State::homogeneous(g, positive_equilibrium(reference_params(1.0)));
    s.c[17] = std::numeric_limits<double>::quiet_NaN();
    try {
        solver.step(s);
        FAIL() << "expected NonFiniteError";
    } catch (const NonFiniteError& e) {
        EXPECT_NEAR(e.time(), 1e-2, 1e-15);
    }
    EXPECT_THROW(SpectralSolver(reference_params(1.0), g, 0.0), ValidationError);
}

TEST(SpectralSolver, DealiasedRunStaysCloseOnResolvedData) {
    const Grid g(square, 64, 64);
    const auto p = reference_params(3.0);
    SpectralSolver plain(p, g, 2e-3), dealiased(p, g, 2e-3, {.dealias = true, .reactions = true});
    State a = smooth_state(g, p), b = a;
    plain.advance(a, 500);
    dealiased.advance(b, 500);
    EXPECT_TRUE(b.all_finite());
    EXPECT_LE(max_norm(a, b), 1e-10);
    const State eq = State::homogeneous(g, positive_equilibrium(p));
    State e = eq;
    dealiased.advance(e, 10);
    EXPECT_LE(max_norm(e, eq), 1e-13);
}

TEST(Simulation, DeterministicForFixedSeed) {
    const Grid g(square, 16, 16);
    SimConfig cfg(reference_params(3.18), g);
    cfg.dt = 1e-2;
    cfg.t_end = 2.0;
    cfg.series_every = 10;
    const auto r1 = simulate(cfg);
    const auto r2 = simulate(cfg);
    ASSERT_EQ(r1.series.size(), r2.series.size());
    EXPECT_EQ(r1.series.size(), 21u);
    for (std::size_t k = 0; k < r1.series.size(); ++k) {
        EXPECT_EQ(r1.series[k].m_max, r2.series[k].m_max);
        EXPECT_EQ(r1.series[k].mode_amps, r2.series[k].mode_amps);
    }
    EXPECT_EQ(max_distance(r1.final_state, r2.final_state), 0.0);
    cfg.seed = 43;
    EXPECT_GT(max_distance(simulate(cfg).final_state, r1.final_state), 0.0);
}

TEST(Simulation, SeriesAndSnapshotCadence) {
    const Grid g(square, 16, 16);
    SimConfig cfg(reference_params(1.0), g);
    cfg.dt = 1e-2;
    cfg.t_end = 1.05;
    cfg.series_every = 20;
    cfg.snapshot_every = 50;
    cfg.keep_snapshots = true;
    std::size_t hook_rows = 0;
    const auto traj = simulate(cfg, {.on_series = [&](const SeriesRow&) { ++hook_rows; }, .on_snapshot = {}});
    EXPECT_EQ(traj.steps, 105);
    // rows at 0, 20, ..., 100 and the final step
    EXPECT_EQ(traj.series.size(), 7u);
    EXPECT_EQ(hook_rows, traj.series.size());
    EXPECT_NEAR(traj.series.back().t, 1.05, 1e-12);
    ASSERT_EQ(traj.snapshots.size(), 4u);
    EXPECT_NEAR(traj.snapshots[2].t, 1.0, 1e-12);
    // χ below the subcritical bound turns the Lyapunov monitor on
    EXPECT_TRUE(std::isfinite(traj.series.front().phi));
}

TEST(Simulation, StationaryStopAndClassification) {
    const Grid g(square, 16, 16);
    SimConfig cfg(reference_params(1.0), g);
    cfg.dt = 1e-2;
    cfg.t_end = 200.0;
    cfg.stop_on_stationary = true;
    const auto traj = simulate(cfg);
    EXPECT_TRUE(traj.stationary);
    EXPECT_LT(traj.steps, 20000);
    EXPECT_EQ(traj.classification, Classification::ConvergedToEquilibrium);
    EXPECT_LT(traj.equilibrium_distance, 1e-4);
    EXPECT_EQ(to_string(traj.classification), "converged to equilibrium");
}
