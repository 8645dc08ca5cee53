#pragma once

#include "chemolab/errors.hpp"
#include "chemolab/linear_stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace chemolab {

/// Cell-centred collocation grid on [0, Lx] x [0, Ly]:
/// x_i = (i + 1/2) Lx / nx, y_j = (j + 1/2) Ly / ny.
///
/// These are the nodes on which cos(pπx/Lx) cos(qπy/Ly), p < nx, q < ny, are
/// discretely orthogonal, and the midpoint rule integrates their products exactly.
class Grid {
public:
    Grid(RectDomain domain, int nx, int ny) : domain_(domain), nx_(nx), ny_(ny) {
        if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0) {
            throw ValidationError("grid sizes must be even and >= 4");
        }
    }

    const RectDomain& domain() const noexcept { return domain_; }
    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(nx_) * ny_; }
    double hx() const noexcept { return domain_.lx / nx_; }
    double hy() const noexcept { return domain_.ly / ny_; }
    double x(int i) const noexcept { return (i + 0.5) * hx(); }
    double y(int j) const noexcept { return (j + 0.5) * hy(); }
    /// Quadrature weight of every node.
    double weight() const noexcept { return hx() * hy(); }
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * nx_ + i;
    }

    friend bool operator==(const Grid& l, const Grid& r) {
        return l.nx_ == r.nx_ && l.ny_ == r.ny_ && l.domain_.lx == r.domain_.lx
               && l.domain_.ly == r.domain_.ly;
    }

private:
    RectDomain domain_;
    int nx_;
    int ny_;
};

/// Nodal values in row-major order: row j holds the nx values at y_j.
class Field {
public:
    explicit Field(const Grid& grid, double value = 0.0) : grid_(grid), v_(grid.size(), value) {}

    template <class Fn>
    static Field from_function(const Grid& grid, Fn&& fn) {
        Field f(grid);
        for (int j = 0; j < grid.ny(); ++j) {
            for (int i = 0; i < grid.nx(); ++i) {
                f.v_[grid.index(i, j)] = fn(grid.x(i), grid.y(j));
            }
        }
        return f;
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return v_.size(); }
    double& operator[](std::size_t k) noexcept { return v_[k]; }
    double operator[](std::size_t k) const noexcept { return v_[k]; }
    double& at(int i, int j) noexcept { return v_[grid_.index(i, j)]; }
    double at(int i, int j) const noexcept { return v_[grid_.index(i, j)]; }
    std::span<double> values() noexcept { return v_; }
    std::span<const double> values() const noexcept { return v_; }

    double min() const { return *std::min_element(v_.begin(), v_.end()); }
    double max() const { return *std::max_element(v_.begin(), v_.end()); }
    double max_abs() const {
        double r = 0.0;
        for (double x : v_) r = std::max(r, std::abs(x));
        return r;
    }
    bool all_finite() const {
        return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
    }
    /// ∫ field over the domain (midpoint rule).
    double integral() const {
        double s = 0.0;
        for (double x : v_) s += x;
        return s * grid_.weight();
    }

    Field& operator+=(const Field& o) {
        for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
        return *this;
    }
    Field& operator-=(const Field& o) {
        for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
        return *this;
    }
    Field& operator*=(double s) {
        for (double& x : v_) x *= s;
        return *this;
    }
    friend Field operator+(Field l, const Field& r) { return l += r; }
    friend Field operator-(Field l, const Field& r) { return l -= r; }
    friend Field operator*(double s, Field f) { return f *= s; }

private:
    Grid grid_;
    std::vector<double> v_;
};

/// ∫ u v over the domain.
inline double inner(const Field& u, const Field& v) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
    return s * u.grid().weight();
}

inline double l2_norm(const Field& u) { return std::sqrt(inner(u, u)); }

/// ∫ |u| over the domain.
inline double l1_norm(const Field& u) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += std::abs(u[k]);
    return s * u.grid().weight();
}

}  // namespace chemolab
