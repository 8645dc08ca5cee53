#pragma once

// Fast cosine/sine transforms on the cell-centred grid, backed by FFTW's
// real-to-real DCT-II/III and DST-II/III kernels (even/odd extensions).
//
// Coefficient layout: a[q * nx + p] multiplies cos(pπx/Lx) cos(qπy/Ly).

#include "chemolab/grid.hpp"

#include <fftw3.h>

#ifndef CHEMOLAB_FFTW_FLAGS
#define CHEMOLAB_FFTW_FLAGS FFTW_ESTIMATE
#endif

#include <algorithm>
#include <cstring>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

namespace chemolab {

/// Cosine-series coefficients of a field.
class CosineCoeffs {
public:
    explicit CosineCoeffs(const Grid& grid) : grid_(grid), a_(grid.size(), 0.0) {}

    const Grid& grid() const noexcept { return grid_; }
    double& at(int p, int q) noexcept { return a_[static_cast<std::size_t>(q) * grid_.nx() + p]; }
    double at(int p, int q) const noexcept {
        return a_[static_cast<std::size_t>(q) * grid_.nx() + p];
    }
    std::span<double> values() noexcept { return a_; }
    std::span<const double> values() const noexcept { return a_; }

private:
    Grid grid_;
    std::vector<double> a_;
};

namespace detail {

/// Plan creation and destruction are not thread safe in FFTW.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : data(static_cast<double*>(fftw_malloc(sizeof(double) * n))), size(n) {
        if (data == nullptr) throw std::bad_alloc();
        std::fill(data, data + n, 0.0);
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;

    double* data;
    std::size_t size;
};

}  // namespace detail

/// Owns the FFTW plans for one grid. Not shareable across threads; create one
/// per solver. Plans use FFTW_ESTIMATE so the arithmetic is reproducible.
class CosineTransform {
public:
    explicit CosineTransform(const Grid& grid)
        : grid_(grid), in_(grid.size()), out_(grid.size()) {
        const int ny = grid.ny();
        const int nx = grid.nx();
        std::lock_guard lock(detail::fftw_planner_mutex());
        const unsigned flags = CHEMOLAB_FFTW_FLAGS;
        // dimension 0 is y (slow), dimension 1 is x (fast)
        cos_fwd_ = fftw_plan_r2r_2d(ny, nx, in_.data, out_.data, FFTW_REDFT10, FFTW_REDFT10, flags);
        cos_inv_ = fftw_plan_r2r_2d(ny, nx, in_.data, out_.data, FFTW_REDFT01, FFTW_REDFT01, flags);
        sin_x_inv_ = fftw_plan_r2r_2d(ny, nx, in_.data, out_.data, FFTW_REDFT01, FFTW_RODFT01, flags);
        sin_y_inv_ = fftw_plan_r2r_2d(ny, nx, in_.data, out_.data, FFTW_RODFT01, FFTW_REDFT01, flags);
        sin_x_fwd_ = fftw_plan_r2r_2d(ny, nx, in_.data, out_.data, FFTW_REDFT10, FFTW_RODFT10, flags);
        sin_y_fwd_ = fftw_plan_r2r_2d(ny, nx, in_.data, out_.data, FFTW_RODFT10, FFTW_REDFT10, flags);
        const double kx = std::numbers::pi / grid.domain().lx;
        const double ky = std::numbers::pi / grid.domain().ly;
        lambda_.resize(grid.size());
        for (int q = 0; q < ny; ++q) {
            for (int p = 0; p < nx; ++p) {
                lambda_[static_cast<std::size_t>(q) * nx + p] = grid.domain().eigenvalue(p, q);
            }
        }
        kx_.resize(nx);
        ky_.resize(ny);
        for (int p = 0; p < nx; ++p) kx_[p] = p * kx;
        for (int q = 0; q < ny; ++q) ky_[q] = q * ky;
    }

    ~CosineTransform() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        for (fftw_plan pl : {cos_fwd_, cos_inv_, sin_x_inv_, sin_y_inv_, sin_x_fwd_, sin_y_fwd_}) {
            fftw_destroy_plan(pl);
        }
    }

    CosineTransform(const CosineTransform&) = delete;
    CosineTransform& operator=(const CosineTransform&) = delete;

    const Grid& grid() const noexcept { return grid_; }

    /// Eigenvalue of -Δ for each coefficient slot.
    std::span<const double> eigenvalues() const noexcept { return lambda_; }

    void forward(std::span<const double> nodal, std::span<double> coeffs) {
        const int nx = grid_.nx();
        const int ny = grid_.ny();
        std::memcpy(in_.data, nodal.data(), sizeof(double) * in_.size);
        fftw_execute(cos_fwd_);
        const double base = 1.0 / (4.0 * nx * ny);
        for (int q = 0; q < ny; ++q) {
            const double wq = q == 0 ? 1.0 : 2.0;
            for (int p = 0; p < nx; ++p) {
                const double wp = p == 0 ? 1.0 : 2.0;
                const std::size_t k = static_cast<std::size_t>(q) * nx + p;
                coeffs[k] = out_.data[k] * base * wp * wq;
            }
        }
    }

    void inverse(std::span<const double> coeffs, std::span<double> nodal) {
        const int nx = grid_.nx();
        const int ny = grid_.ny();
        for (int q = 0; q < ny; ++q) {
            const double sq = q == 0 ? 1.0 : 0.5;
            for (int p = 0; p < nx; ++p) {
                const double sp = p == 0 ? 1.0 : 0.5;
                const std::size_t k = static_cast<std::size_t>(q) * nx + p;
                in_.data[k] = coeffs[k] * sp * sq;
            }
        }
        fftw_execute(cos_inv_);
        std::memcpy(nodal.data(), out_.data, sizeof(double) * out_.size);
    }

    CosineCoeffs forward(const Field& f) {
        CosineCoeffs c(grid_);
        forward(f.values(), c.values());
        return c;
    }

    Field inverse(const CosineCoeffs& c) {
        Field f(grid_);
        inverse(c.values(), f.values());
        return f;
    }

    /// Nodal ∂/∂x of the cosine series with coefficients `coeffs`.
    void gradient_x(std::span<const double> coeffs, std::span<double> nodal) {
        const int nx = grid_.nx();
        const int ny = grid_.ny();
        // sine mode p sits in slot p-1; the top slot (p = nx) is empty
        for (int q = 0; q < ny; ++q) {
            const double sq = q == 0 ? 1.0 : 0.5;
            const std::size_t row = static_cast<std::size_t>(q) * nx;
            for (int p = 1; p < nx; ++p) {
                in_.data[row + p - 1] = -kx_[p] * coeffs[row + p] * 0.5 * sq;
            }
            in_.data[row + nx - 1] = 0.0;
        }
        fftw_execute(sin_x_inv_);
        std::memcpy(nodal.data(), out_.data, sizeof(double) * out_.size);
    }

    /// Nodal ∂/∂y of the cosine series with coefficients `coeffs`.
    void gradient_y(std::span<const double> coeffs, std::span<double> nodal) {
        const int nx = grid_.nx();
        const int ny = grid_.ny();
        for (int q = 1; q < ny; ++q) {
            for (int p = 0; p < nx; ++p) {
                const double sp = p == 0 ? 1.0 : 0.5;
                in_.data[static_cast<std::size_t>(q - 1) * nx + p] =
                    -ky_[q] * coeffs[static_cast<std::size_t>(q) * nx + p] * 0.5 * sp;
            }
        }
        std::fill(in_.data + static_cast<std::size_t>(ny - 1) * nx, in_.data + in_.size, 0.0);
        fftw_execute(sin_y_inv_);
        std::memcpy(nodal.data(), out_.data, sizeof(double) * out_.size);
    }

    /// Cosine coefficients of ∂Fx/∂x + ∂Fy/∂y, where Fx is expanded in
    /// sin(pπx/Lx) cos(qπy/Ly) and Fy in cos(pπx/Lx) sin(qπy/Ly). Both
    /// expansions vanish on the boundary, so the result has zero mean.
    /// `max_p`/`max_q` (exclusive) truncate the flux spectra.
    void divergence(std::span<const double> fx, std::span<const double> fy,
                    std::span<double> coeffs, int max_p = -1, int max_q = -1) {
        const int nx = grid_.nx();
        const int ny = grid_.ny();
        const int pcut = max_p < 0 ? nx : std::min(max_p, nx);
        const int qcut = max_q < 0 ? ny : std::min(max_q, ny);
        std::fill(coeffs.begin(), coeffs.end(), 0.0);

        std::memcpy(in_.data, fx.data(), sizeof(double) * in_.size);
        fftw_execute(sin_x_fwd_);
        {
            const double base = 1.0 / (2.0 * nx * ny);
            for (int q = 0; q < qcut; ++q) {
                const double wq = q == 0 ? 1.0 : 2.0;
                const std::size_t row = static_cast<std::size_t>(q) * nx;
                for (int p = 1; p < pcut; ++p) {
                    const double b = out_.data[row + p - 1] * base * wq;
                    coeffs[row + p] += kx_[p] * b;
                }
            }
        }

        std::memcpy(in_.data, fy.data(), sizeof(double) * in_.size);
        fftw_execute(sin_y_fwd_);
        {
            const double base = 1.0 / (2.0 * nx * ny);
            for (int q = 1; q < qcut; ++q) {
                for (int p = 0; p < pcut; ++p) {
                    const double wp = p == 0 ? 1.0 : 2.0;
                    const double b =
                        out_.data[static_cast<std::size_t>(q - 1) * nx + p] * base * wp;
                    coeffs[static_cast<std::size_t>(q) * nx + p] += ky_[q] * b;
                }
            }
        }
    }

private:
    Grid grid_;
    detail::FftwBuffer in_;
    detail::FftwBuffer out_;
    fftw_plan cos_fwd_{}, cos_inv_{}, sin_x_inv_{}, sin_y_inv_{}, sin_x_fwd_{}, sin_y_fwd_{};
    std::vector<double> lambda_;
    std::vector<double> kx_, ky_;
};

inline CosineCoeffs cos_forward(const Field& f) {
    CosineTransform t(f.grid());
    return t.forward(f);
}

inline Field cos_inverse(const CosineCoeffs& c) {
    CosineTransform t(c.grid());
    return t.inverse(c);
}

/// Spectral interpolation onto another grid over the same domain by
/// truncating or zero-padding the cosine spectrum.
inline Field resample(const Field& f, const Grid& target) {
    const auto src = cos_forward(f);
    CosineCoeffs dst(target);
    const int np = std::min(f.grid().nx(), target.nx());
    const int nq = std::min(f.grid().ny(), target.ny());
    for (int q = 0; q < nq; ++q) {
        for (int p = 0; p < np; ++p) dst.at(p, q) = src.at(p, q);
    }
    return cos_inverse(dst);
}

}  // namespace chemolab
