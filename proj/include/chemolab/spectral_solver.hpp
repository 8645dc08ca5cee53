#pragma once

// Cosine pseudo-spectral IMEX integrator.
//
// One step of size dt is the Strang composition
//   half Crank–Nicolson diffusion  ->  explicit midpoint RK2  ->  half Crank–Nicolson
// where the implicit part carries Δm and ε0Δc (diagonal per cosine mode) and
// the explicit part carries the reactions, the chemotaxis flux divergence and
// the whole d equation. Products are formed at the nodes.

#include "chemolab/cosine_transform.hpp"
#include "chemolab/errors.hpp"
#include "chemolab/model.hpp"
#include "chemolab/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace chemolab {

struct SpectralOptions {
    bool dealias = false;    ///< 2/3-rule truncation of every explicit increment
    bool reactions = true;   ///< test hook: false leaves pure diffusion
};

struct StepStatus {
    bool step_too_large = false;   ///< max m grew past 10 max(1, previous max m)
};

class SpectralSolver {
public:
    SpectralSolver(ModelParams params, const Grid& grid, double dt, SpectralOptions opts = {})
        : params_(std::move(params)), grid_(grid), dt_(dt), opts_(opts), tr_(grid),
          n_(grid.size()), cm_(n_), cc_(n_), gx_(n_), gy_(n_), div_(n_), divn_(n_),
          mid_(grid), km_(n_), kc_(n_), kd_(n_), cn_m_(n_), cn_c_(n_), cn_m2_(n_), cn_c2_(n_), mask_(n_, 1.0), scratch_(n_) {
        if (!(dt > 0.0)) throw ValidationError("dt > 0 required");
        const auto lam = tr_.eigenvalues();
        const double h = 0.5 * dt;
        for (std::size_t k = 0; k < n_; ++k) {
            cn_m_[k] = crank_nicolson_factor(lam[k], h);
            cn_c_[k] = crank_nicolson_factor(params_.eps0() * lam[k], h);
            cn_m2_[k] = cn_m_[k] * cn_m_[k];
            cn_c2_[k] = cn_c_[k] * cn_c_[k];
        }
        pcut_ = opts_.dealias ? (2 * grid.nx()) / 3 : grid.nx();
        qcut_ = opts_.dealias ? (2 * grid.ny()) / 3 : grid.ny();
        for (int q = 0; q < grid.ny(); ++q) {
            for (int p = 0; p < grid.nx(); ++p) {
                if (p >= pcut_ || q >= qcut_) mask_[static_cast<std::size_t>(q) * grid.nx() + p] = 0.0;
            }
        }
    }

    /// (1 - rate h/2) / (1 + rate h/2): Crank–Nicolson over time h for u' = -rate u.
    static double crank_nicolson_factor(double rate, double h) {
        return (1.0 - 0.5 * rate * h) / (1.0 + 0.5 * rate * h);
    }

    const ModelParams& params() const noexcept { return params_; }
    const Grid& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }
    CosineTransform& transform() noexcept { return tr_; }

    /// Spectral Neumann Laplacian.
    Field laplacian(const Field& f) {
        Field out(grid_);
        tr_.forward(f.values(), cm_);
        const auto lam = tr_.eigenvalues();
        for (std::size_t k = 0; k < n_; ++k) cm_[k] *= -lam[k];
        tr_.inverse(cm_, out.values());
        return out;
    }

    /// ∇·(f(m)∇c), without the χ factor.
    Field chemotaxis_divergence(const Field& m, const Field& c) {
        Field out(grid_);
        tr_.forward(c.values(), cc_);
        flux_divergence(m.values(), cc_, out.values());
        return out;
    }

    /// Advances `s` by dt in place.
    StepStatus step(State& s) { return advance(s, 1); }

    /// Advances `s` by n steps. Inside the batch the closing half
    /// Crank–Nicolson of one step and the opening half of the next are applied
    /// together in coefficient space, so intermediate nodal states are never
    /// formed; the composition is the same as n calls of step().
    StepStatus advance(State& s, long n) {
        if (n <= 0) return {};
        const double m_prev_max = s.m.max();
        const double chi = params_.chi();
        const double h = 0.5 * dt_;

        tr_.forward(s.m.values(), cm_);
        tr_.forward(s.c.values(), cc_);
        for (std::size_t k = 0; k < n_; ++k) {
            cm_[k] *= cn_m_[k];
            cc_[k] *= cn_c_[k];
        }
        for (long step = 0; step < n; ++step) {
            tr_.inverse(cm_, s.m.values());
            tr_.inverse(cc_, s.c.values());

            // stage 1, from the spectrum of c in cc_
            flux_divergence(s.m.values(), cc_, divn_);
            reactions(s.m.values(), s.c.values(), s.d.values());
            for (std::size_t k = 0; k < n_; ++k) km_[k] -= chi * divn_[k];
            if (opts_.dealias) project_increments();
            for (std::size_t k = 0; k < n_; ++k) {
                mid_.m[k] = s.m[k] + h * km_[k];
                mid_.c[k] = s.c[k] + h * kc_[k];
                mid_.d[k] = s.d[k] + h * kd_[k];
            }

            // stage 2; the flux divergence stays in coefficient space
            tr_.forward(mid_.c.values(), cc_);
            flux_spectrum(mid_.m.values(), cc_);
            reactions(mid_.m.values(), mid_.c.values(), mid_.d.values());
            if (opts_.dealias) project_increments();
            for (std::size_t k = 0; k < n_; ++k) {
                s.m[k] += dt_ * km_[k];
                s.c[k] += dt_ * kc_[k];
                s.d[k] += dt_ * kd_[k];
            }
            tr_.forward(s.m.values(), cm_);
            tr_.forward(s.c.values(), cc_);
            const bool last = step + 1 == n;
            const auto& fm = last ? cn_m_ : cn_m2_;
            const auto& fc = last ? cn_c_ : cn_c2_;
            for (std::size_t k = 0; k < n_; ++k) {
                cm_[k] = (cm_[k] - dt_ * chi * div_[k]) * fm[k];
                cc_[k] *= fc[k];
            }
        }
        tr_.inverse(cm_, s.m.values());
        tr_.inverse(cc_, s.c.values());
        s.t += static_cast<double>(n) * dt_;

        if (!s.all_finite()) {
            throw NonFiniteError("non-finite value in spectral step", s.t);
        }
        StepStatus st;
        st.step_too_large = s.m.max() > 10.0 * std::max(1.0, m_prev_max);
        return st;
    }

private:
    /// div_ <- cosine coefficients of ∇·(f(m)∇c), from the spectrum of c.
    void flux_spectrum(std::span<const double> m, std::span<const double> cspec) {
        tr_.gradient_x(cspec, gx_);
        tr_.gradient_y(cspec, gy_);
        const auto& nl = params_.nonlinearity();
        for (std::size_t k = 0; k < n_; ++k) {
            const double fm = nl.f(m[k]);
            gx_[k] *= fm;
            gy_[k] *= fm;
        }
        tr_.divergence(gx_, gy_, div_, pcut_, qcut_);
    }

    void flux_divergence(std::span<const double> m, std::span<const double> cspec,
                         std::span<double> out) {
        flux_spectrum(m, cspec);
        tr_.inverse(div_, out);
    }

    /// Pointwise reaction terms into km_, kc_, kd_.
    void reactions(std::span<const double> m, std::span<const double> c,
                   std::span<const double> d) {
        if (!opts_.reactions) {
            std::fill(km_.begin(), km_.end(), 0.0);
            std::fill(kc_.begin(), kc_.end(), 0.0);
            std::fill(kd_.begin(), kd_.end(), 0.0);
            std::fill(div_.begin(), div_.end(), 0.0);
            std::fill(divn_.begin(), divn_.end(), 0.0);
            return;
        }
        for (std::size_t k = 0; k < n_; ++k) {
            const auto r = reaction_rhs(params_, m[k], c[k], d[k]);
            km_[k] = r.dm;
            kc_[k] = r.dc;
            kd_[k] = r.dd;
        }
    }

    void project_increments() {
        project(km_);
        project(kc_);
        project(kd_);
    }

    void project(std::vector<double>& v) {
        tr_.forward(v, scratch_);
        for (std::size_t k = 0; k < n_; ++k) scratch_[k] *= mask_[k];
        tr_.inverse(scratch_, v);
    }

    ModelParams params_;
    Grid grid_;
    double dt_;
    SpectralOptions opts_;
    CosineTransform tr_;
    std::size_t n_;
    std::vector<double> cm_, cc_, gx_, gy_, div_, divn_;
    State mid_;
    std::vector<double> km_, kc_, kd_;
    std::vector<double> cn_m_, cn_c_, cn_m2_, cn_c2_;
    std::vector<double> mask_, scratch_;
    int pcut_ = 0;
    int qcut_ = 0;
};

/// Convenience wrappers with a throwaway solver.
inline Field laplacian(const Field& f) {
    SpectralSolver s(reference_params(1.0), f.grid(), 1.0);
    return s.laplacian(f);
}

inline Field chemotaxis_divergence(const ModelParams& p, const Field& m, const Field& c) {
    SpectralSolver s(p, m.grid(), 1.0);
    return s.chemotaxis_divergence(m, c);
}

}  // namespace chemolab
