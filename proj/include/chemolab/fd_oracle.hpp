#pragma once

// Second-order finite-volume / method-of-lines solver on the same cell-centred
// grid, fully explicit (midpoint RK2). It shares no discretization code with
// the spectral solver and serves as its cross-check.
//
// Neumann closure: the ghost value beyond each wall mirrors the adjacent cell,
// so every boundary face carries zero flux.

#include "chemolab/errors.hpp"
#include "chemolab/grid.hpp"
#include "chemolab/model.hpp"
#include "chemolab/spectral_solver.hpp"
#include "chemolab/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace chemolab {

/// 5-point Laplacian with mirrored ghosts.
inline void fd_laplacian(std::span<const double> u, const Grid& g, std::span<double> out) {
    const int nx = g.nx();
    const int ny = g.ny();
    const double ix2 = 1.0 / (g.hx() * g.hx());
    const double iy2 = 1.0 / (g.hy() * g.hy());
    for (int j = 0; j < ny; ++j) {
        const int jm = std::max(j - 1, 0);
        const int jp = std::min(j + 1, ny - 1);
        for (int i = 0; i < nx; ++i) {
            const int im = std::max(i - 1, 0);
            const int ip = std::min(i + 1, nx - 1);
            const double uc = u[g.index(i, j)];
            out[g.index(i, j)] = (u[g.index(ip, j)] - 2.0 * uc + u[g.index(im, j)]) * ix2
                                 + (u[g.index(i, jp)] - 2.0 * uc + u[g.index(i, jm)]) * iy2;
        }
    }
}

inline Field fd_laplacian(const Field& u) {
    Field out(u.grid());
    fd_laplacian(u.values(), u.grid(), out.values());
    return out;
}

/// Conservative ∇·(f(m)∇c): face flux = mean of f at the two cells times the
/// one-sided difference of c; wall faces carry no flux.
inline void fd_chemotaxis(const ModelParams& p, std::span<const double> m,
                          std::span<const double> c, const Grid& g, std::span<double> out,
                          std::vector<double>& fbuf) {
    const int nx = g.nx();
    const int ny = g.ny();
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    fbuf.resize(g.size());
    const auto& nl = p.nonlinearity();
    for (std::size_t k = 0; k < g.size(); ++k) fbuf[k] = nl.f(m[k]);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = g.index(i, j);
            double acc = 0.0;
            if (i + 1 < nx) {
                const std::size_t e = g.index(i + 1, j);
                acc += 0.5 * (fbuf[k] + fbuf[e]) * (c[e] - c[k]) * ihx2;
            }
            if (i > 0) {
                const std::size_t w = g.index(i - 1, j);
                acc -= 0.5 * (fbuf[k] + fbuf[w]) * (c[k] - c[w]) * ihx2;
            }
            if (j + 1 < ny) {
                const std::size_t n = g.index(i, j + 1);
                acc += 0.5 * (fbuf[k] + fbuf[n]) * (c[n] - c[k]) * ihy2;
            }
            if (j > 0) {
                const std::size_t s = g.index(i, j - 1);
                acc -= 0.5 * (fbuf[k] + fbuf[s]) * (c[k] - c[s]) * ihy2;
            }
            out[k] = acc;
        }
    }
}

inline Field fd_chemotaxis(const ModelParams& p, const Field& m, const Field& c) {
    Field out(m.grid());
    std::vector<double> fbuf;
    fd_chemotaxis(p, m.values(), c.values(), m.grid(), out.values(), fbuf);
    return out;
}

/// Largest explicit step, 0.2 h² / max(1, ε0) with h the smaller spacing.
inline double fd_stable_dt(const ModelParams& p, const Grid& g) {
    const double h = std::min(g.hx(), g.hy());
    return 0.2 * h * h / std::max(1.0, p.eps0());
}

/// Explicit midpoint RK2 on the full semidiscrete system. One call to step()
/// advances by the outer dt using as many equal substeps as the stability
/// bound requires.
class FdSolver {
public:
    FdSolver(ModelParams params, const Grid& grid, double dt)
        : params_(std::move(params)), grid_(grid), dt_(dt), n_(grid.size()), mid_(grid),
          km_(n_), kc_(n_), kd_(n_), lap_(n_), chem_(n_) {
        if (!(dt > 0.0)) throw ValidationError("dt > 0 required");
        substeps_ = static_cast<long>(std::ceil(dt / fd_stable_dt(params_, grid) - 1e-12));
        substeps_ = std::max(1L, substeps_);
        h_ = dt / static_cast<double>(substeps_);
    }

    const Grid& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }
    double substep() const noexcept { return h_; }
    long substeps() const noexcept { return substeps_; }

    /// Semidiscrete right-hand side at (m, c, d).
    void rhs(std::span<const double> m, std::span<const double> c, std::span<const double> d,
             std::span<double> km, std::span<double> kc, std::span<double> kd) {
        fd_chemotaxis(params_, m, c, grid_, chem_, fbuf_);
        fd_laplacian(m, grid_, lap_);
        const double chi = params_.chi();
        for (std::size_t k = 0; k < n_; ++k) {
            const auto r = reaction_rhs(params_, m[k], c[k], d[k]);
            km[k] = lap_[k] + r.dm - chi * chem_[k];
            kc[k] = r.dc;
            kd[k] = r.dd;
        }
        fd_laplacian(c, grid_, lap_);
        const double eps0 = params_.eps0();
        for (std::size_t k = 0; k < n_; ++k) kc[k] += eps0 * lap_[k];
    }

    /// One midpoint RK2 substep of size h.
    void substep(State& s, double h) {
        rhs(s.m.values(), s.c.values(), s.d.values(), km_, kc_, kd_);
        for (std::size_t k = 0; k < n_; ++k) {
            mid_.m[k] = s.m[k] + 0.5 * h * km_[k];
            mid_.c[k] = s.c[k] + 0.5 * h * kc_[k];
            mid_.d[k] = s.d[k] + 0.5 * h * kd_[k];
        }
        rhs(mid_.m.values(), mid_.c.values(), mid_.d.values(), km_, kc_, kd_);
        for (std::size_t k = 0; k < n_; ++k) {
            s.m[k] += h * km_[k];
            s.c[k] += h * kc_[k];
            s.d[k] += h * kd_[k];
        }
    }

    /// The midpoint state of the last substep.
    const State& last_midpoint() const noexcept { return mid_; }

    StepStatus advance(State& s, long n) {
        StepStatus st;
        for (long k = 0; k < n; ++k) st.step_too_large |= step(s).step_too_large;
        return st;
    }

    StepStatus step(State& s) {
        const double m_prev_max = s.m.max();
        const double t0 = s.t;
        for (long k = 0; k < substeps_; ++k) substep(s, h_);
        s.t = t0 + dt_;
        if (!s.all_finite()) {
            throw NonFiniteError("non-finite value in finite-difference step", s.t);
        }
        StepStatus st;
        st.step_too_large = s.m.max() > 10.0 * std::max(1.0, m_prev_max);
        return st;
    }

private:
    ModelParams params_;
    Grid grid_;
    double dt_;
    std::size_t n_;
    State mid_;
    std::vector<double> km_, kc_, kd_, lap_, chem_, fbuf_;
    long substeps_ = 1;
    double h_ = 0.0;
};

}  // namespace chemolab
