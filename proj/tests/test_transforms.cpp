#include "chemolab/cosine_transform.hpp"
#include "chemolab/fd_oracle.hpp"
#include "chemolab/spectral_solver.hpp"
#include "chemolab/sim_config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace chemolab;

namespace {

Field random_field(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field f(g);
    for (auto& v : f.values()) v = u(rng);
    return f;
}

// O(N^2) cosine sums straight from the basis definition
double direct_coeff(const Field& f, int p, int q) {
    const Grid& g = f.grid();
    const double kx = p * std::numbers::pi / g.domain().lx;
    const double ky = q * std::numbers::pi / g.domain().ly;
    double s = 0.0;
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) s += f.at(i, j) * std::cos(kx * g.x(i)) * std::cos(ky * g.y(j));
    }
    const double wp = p == 0 ? 1.0 : 2.0;
    const double wq = q == 0 ? 1.0 : 2.0;
    return s * wp * wq / (g.nx() * g.ny());
}

double direct_value(const CosineCoeffs& a, int i, int j) {
    const Grid& g = a.grid();
    double s = 0.0;
    for (int q = 0; q < g.ny(); ++q) {
        for (int p = 0; p < g.nx(); ++p) {
            s += a.at(p, q) * std::cos(p * std::numbers::pi * g.x(i) / g.domain().lx)
                 * std::cos(q * std::numbers::pi * g.y(j) / g.domain().ly);
        }
    }
    return s;
}

double max_diff(const Field& a, const Field& b) { return (a - b).max_abs(); }

const RectDomain square{};

}  // namespace

TEST(CosineTransform, ForwardMatchesDirectSums) {
    const Grid g(RectDomain{2.0, 3.0}, 8, 12);
    const Field f = random_field(g, 1);
    const auto a = cos_forward(f);
    for (int q = 0; q < g.ny(); ++q) {
        for (int p = 0; p < g.nx(); ++p) EXPECT_NEAR(a.at(p, q), direct_coeff(f, p, q), 1e-13);
    }
    const Field back = cos_inverse(a);
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) EXPECT_NEAR(back.at(i, j), direct_value(a, i, j), 1e-13);
    }
}

TEST(CosineTransform, RoundTripAllSizes) {
    for (int n : {8, 16, 32, 64}) {
        const Grid g(square, n, n);
        const Field f = random_field(g, n);
        EXPECT_LE(max_diff(cos_inverse(cos_forward(f)), f), 1e-12) << n;
    }
    const Grid rect(RectDomain{1.0, 4.0}, 16, 40);
    const Field f = random_field(rect, 3);
    EXPECT_LE(max_diff(cos_inverse(cos_forward(f)), f), 1e-12);
}

TEST(CosineTransform, ConstantAndBasisFunctions) {
    const Grid g(square, 64, 64);
    const auto one = cos_forward(Field(g, 1.0));
    const auto basis = cos_forward(Field::from_function(g, [](double x, double y) {
        return std::cos(2 * x) * std::cos(2 * y);
    }));
    for (int q = 0; q < g.ny(); ++q) {
        for (int p = 0; p < g.nx(); ++p) {
            EXPECT_NEAR(one.at(p, q), p == 0 && q == 0 ? 1.0 : 0.0, 1e-14);
            EXPECT_NEAR(basis.at(p, q), p == 2 && q == 2 ? 1.0 : 0.0, 1e-14);
        }
    }

    CosineCoeffs delta0(g), delta22(g);
    delta0.at(0, 0) = 1.0;
    delta22.at(2, 2) = 1.0;
    EXPECT_LE(max_diff(cos_inverse(delta0), Field(g, 1.0)), 1e-14);
    const Field expect = detail::cos_mode(g, 2, 2);
    EXPECT_LE(max_diff(cos_inverse(delta22), expect), 1e-14);
}

TEST(CosineTransform, InverseIsLinear) {
    const Grid g(square, 32, 32);
    const auto a = cos_forward(random_field(g, 5));
    const auto b = cos_forward(random_field(g, 6));
    CosineCoeffs comb(g);
    const double al = 0.7, be = -2.3;
    for (std::size_t k = 0; k < g.size(); ++k) comb.values()[k] = al * a.values()[k] + be * b.values()[k];
    Field rhs = cos_inverse(a);
    rhs *= al;
    Field tb = cos_inverse(b);
    tb *= be;
    rhs += tb;
    EXPECT_LE(max_diff(cos_inverse(comb), rhs), 1e-12);
}

TEST(SpectralLaplacian, Examples) {
    const Grid g(square, 64, 64);
    EXPECT_LE(laplacian(Field(g, 3.5)).max_abs(), 1e-12);
    const Field m22 = detail::cos_mode(g, 2, 2);
    Field expect = m22;
    expect *= -8.0;
    EXPECT_LE(max_diff(laplacian(m22), expect), 8e-12);
    const Field cx = Field::from_function(g, [](double x, double) { return std::cos(x); });
    Field mcx = cx;
    mcx *= -1.0;
    EXPECT_LE(max_diff(laplacian(cx), mcx), 1e-12);
}

TEST(SpectralLaplacian, SymmetricInDiscreteInnerProduct) {
    for (int n : {16, 64}) {
        const Grid g(RectDomain{2.0, 1.5}, n, n);
        const Field u = random_field(g, 10 + n);
        const Field v = random_field(g, 20 + n);
        const double l = inner(laplacian(u), v);
        const double r = inner(u, laplacian(v));
        EXPECT_NEAR(l, r, 1e-10 * std::abs(l));
    }
}

TEST(SpectralGradient, MatchesAnalyticDerivatives) {
    const Grid g(square, 32, 32);
    CosineTransform tr(g);
    const Field c = Field::from_function(g, [](double x, double y) {
        return std::cos(3 * x) * std::cos(y) + 0.5 * std::cos(2 * y);
    });
    const auto a = tr.forward(c);
    Field gx(g), gy(g);
    tr.gradient_x(a.values(), gx.values());
    tr.gradient_y(a.values(), gy.values());
    const Field ex = Field::from_function(g, [](double x, double y) { return -3 * std::sin(3 * x) * std::cos(y); });
    const Field ey = Field::from_function(g, [](double x, double y) {
        return -std::cos(3 * x) * std::sin(y) - std::sin(2 * y);
    });
    EXPECT_LE(max_diff(gx, ex), 1e-12);
    EXPECT_LE(max_diff(gy, ey), 1e-12);
}

TEST(ChemotaxisDivergence, ZeroCases) {
    const Grid g(square, 32, 32);
    const auto p = reference_params(1.0);
    const Field m = Field::from_function(g, [](double x, double y) { return 1.0 + 0.3 * std::cos(x) * std::cos(2 * y); });
    const Field c = Field::from_function(g, [](double x, double y) { return 2.0 + std::cos(2 * x) * std::cos(y); });
    EXPECT_LE(chemotaxis_divergence(p, m, Field(g, 4.0)).max_abs(), 1e-13);
    EXPECT_LE(chemotaxis_divergence(p, Field(g, 0.0), c).max_abs(), 1e-13);
}

TEST(ChemotaxisDivergence, ConstantMPullsOut) {
    const Grid g(square, 64, 64);
    const auto p = reference_params(1.0);
    const Field c = Field::from_function(g, [](double x, double) { return std::cos(x); });
    const Field expect = Field::from_function(g, [](double x, double) { return -0.5 * std::cos(x); });
    EXPECT_LE(max_diff(chemotaxis_divergence(p, Field(g, 1.0), c), expect), 1e-12);
    // the finite-difference operator agrees to its truncation error
    EXPECT_LE(max_diff(fd_chemotaxis(p, Field(g, 1.0), c), expect), 1e-3);
}

TEST(ChemotaxisDivergence, ZeroMeanOnRandomFields) {
    const auto p = reference_params(1.0);
    for (int n : {16, 64}) {
        const Grid g(RectDomain{3.0, 2.0}, n, n);
        Field m = random_field(g, 40 + n);
        Field c = random_field(g, 50 + n);
        for (auto& v : m.values()) v += 1.0;
        const Field div = chemotaxis_divergence(p, m, c);
        EXPECT_LE(std::abs(div.integral()) / g.domain().area(), 1e-12);
        EXPECT_NEAR(cos_forward(div).at(0, 0), 0.0, 1e-12);
    }
}

TEST(ChemotaxisDivergence, ConvergesToFiniteDifferenceOnRefinement) {
    const auto p = reference_params(1.0);
    auto rel = [&](int n) {
        const Grid g(square, n, n);
        const Field m = Field::from_function(g, [](double x, double y) { return 1.0 + 0.5 * std::cos(x) * std::cos(y); });
        const Field c = Field::from_function(g, [](double x, double y) { return 2.0 + std::cos(2 * x) + 0.3 * std::cos(y); });
        const Field s = chemotaxis_divergence(p, m, c);
        return l2_norm(s - fd_chemotaxis(p, m, c)) / l2_norm(s);
    };
    const double e1 = rel(32), e2 = rel(64), e3 = rel(128);
    EXPECT_LT(e2, e1);
    EXPECT_LT(e3, e2);
    EXPECT_LT(e3, 1e-3);
}

TEST(Resample, SpectralInterpolationIsExactForResolvedModes) {
    const Grid coarse(square, 16, 16);
    const Grid fine(square, 64, 64);
    auto fn = [](double x, double y) { return 1.0 + std::cos(3 * x) * std::cos(2 * y) - 0.2 * std::cos(5 * y); };
    const Field up = resample(Field::from_function(coarse, fn), fine);
    EXPECT_LE(max_diff(up, Field::from_function(fine, fn)), 1e-12);
    const Field down = resample(Field::from_function(fine, fn), coarse);
    EXPECT_LE(max_diff(down, Field::from_function(coarse, fn)), 1e-12);
}
