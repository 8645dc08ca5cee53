#include "chemolab/linear_stability.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

using namespace chemolab;

namespace {

ModelParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 3.0);
    const double a = 1.0 + u(rng);
    const double chi = u(rng) * 3.0;
    const double eps0 = u(rng);
    const double delta = u(rng);
    const double beta = u(rng);
    return {a, chi, eps0, delta, beta, NonlinearitySpec::saturating(u(rng))};
}

}  // namespace

TEST(NeumannEigenvalues, SmallSquare) {
    const auto modes = neumann_eigenvalues(RectDomain{}, 2, 2);
    std::vector<double> lam;
    for (const auto& m : modes) lam.push_back(m.lambda);
    const std::vector<double> expected{0, 1, 1, 2, 4, 4, 5, 5, 8};
    ASSERT_EQ(lam.size(), expected.size());
    for (std::size_t k = 0; k < lam.size(); ++k) EXPECT_NEAR(lam[k], expected[k], 1e-13);
    // ties broken by (p, q)
    EXPECT_EQ(modes[1].p, 0);
    EXPECT_EQ(modes[1].q, 1);
    EXPECT_EQ(modes[2].p, 1);
    EXPECT_EQ(modes.back().p, 2);
    EXPECT_EQ(modes.back().q, 2);
}

TEST(NeumannEigenvalues, ConstantModeOnly) {
    const auto modes = neumann_eigenvalues(RectDomain{}, 0, 0);
    ASSERT_EQ(modes.size(), 1u);
    EXPECT_EQ(modes[0].lambda, 0.0);
}

TEST(NeumannEigenvalues, RectangleFormula) {
    const RectDomain dom{2.0, 5.0};
    for (const auto& m : neumann_eigenvalues(dom, 6, 4)) {
        const double kx = m.p * std::numbers::pi / 2.0;
        const double ky = m.q * std::numbers::pi / 5.0;
        EXPECT_NEAR(m.lambda, kx * kx + ky * ky, 1e-12);
        EXPECT_EQ(m.lambda == 0.0, m.p == 0 && m.q == 0);
    }
}

TEST(ReducedMatrix, Entries) {
    const auto p = reference_params(3.125);
    const auto n0 = reduced_matrix(p, 0.0);
    EXPECT_EQ(n0[0][0], -2.0);
    EXPECT_EQ(n0[0][1], 0.0);
    EXPECT_EQ(n0[1][0], 1.0);
    EXPECT_EQ(n0[1][1], -1.0);

    const auto n8 = reduced_matrix(p, 8.0);
    EXPECT_DOUBLE_EQ(n8[0][0], -10.0);
    EXPECT_DOUBLE_EQ(n8[0][1], 12.5);
    EXPECT_DOUBLE_EQ(n8[1][0], 1.0);
    EXPECT_DOUBLE_EQ(n8[1][1], -1.25);
}

TEST(ReducedMatrix, RejectsNonpositiveF1) {
    const ModelParams p(3.0, 1.0, 0.1, 1.0, 1.0,
                        NonlinearitySpec::custom([](double) { return 0.0; },
                                                 [](double m) { return m; }, true));
    EXPECT_THROW(reduced_matrix(p, 1.0), ValidationError);
    EXPECT_THROW(chi_c0(p), ValidationError);
    EXPECT_THROW(chi_subcrit(p), ValidationError);
}

TEST(GrowthRates, HomogeneousMode) {
    const auto dp = growth_rates(reference_params(2.0), 0.0);
    EXPECT_DOUBLE_EQ(dp.sigma_plus.real(), -1.0);
    EXPECT_DOUBLE_EQ(dp.sigma_minus.real(), -2.0);
    EXPECT_EQ(dp.sigma_plus.imag(), 0.0);
    EXPECT_DOUBLE_EQ(dp.g_branch, -0.5);
}

TEST(GrowthRates, MarginalAndUnstableAtCriticalMode) {
    const auto at = growth_rates(reference_params(3.125), 8.0);
    EXPECT_NEAR(at.det, 0.0, 1e-12);
    EXPECT_NEAR(at.sigma_plus.real(), 0.0, 1e-12);

    const auto above = growth_rates(reference_params(3.18), 8.0);
    EXPECT_LT(above.det, 0.0);
    EXPECT_GT(above.sigma_plus.real(), 0.0);
    EXPECT_TRUE(above.unstable());
}

TEST(GrowthRates, MatchEigenSolverAndRootIdentities) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ul(0.0, 60.0);
    for (int k = 0; k < 500; ++k) {
        const auto p = random_params(rng);
        const double lambda = ul(rng);
        const auto dp = growth_rates(p, lambda);
        const auto n = reduced_matrix(p, lambda);

        EXPECT_NEAR(dp.trace, n[0][0] + n[1][1], 1e-12 * (1.0 + std::abs(dp.trace)));
        EXPECT_NEAR(dp.trace, -p.a() - (1.0 + p.eps0()) * lambda, 1e-12 * (1.0 + lambda));
        EXPECT_LT(dp.trace, 0.0);

        const auto sum = dp.sigma_plus + dp.sigma_minus;
        const auto prod = dp.sigma_plus * dp.sigma_minus;
        EXPECT_LE(std::abs(sum - dp.trace), 1e-10 * std::max(1.0, std::abs(dp.trace)));
        EXPECT_LE(std::abs(prod - dp.det), 1e-10 * std::max(1.0, std::abs(dp.det)));

        Eigen::Matrix2d m;
        m << n[0][0], n[0][1], n[1][0], n[1][1];
        const Eigen::Vector2cd ev = m.eigenvalues();
        const auto hi = ev(0).real() >= ev(1).real() ? ev(0) : ev(1);
        const double scale = std::max(1.0, std::abs(dp.trace));
        EXPECT_NEAR(dp.sigma_plus.real(), hi.real(), 1e-9 * scale);
        EXPECT_NEAR(std::abs(dp.sigma_plus.imag()), std::abs(hi.imag()), 1e-9 * scale);
    }
}

TEST(Thresholds, ReferenceValues) {
    const auto p = reference_params(1.0);
    EXPECT_NEAR(chi_c0(p), 3.125, 1e-12);
    EXPECT_NEAR(chi_subcrit(p), 2.0, 1e-12);
    const ModelParams q(2.0, 1.0, 1.0, 1.0, 1.0, NonlinearitySpec::saturating(1.0));
    EXPECT_NEAR(chi_c0(q), 8.0, 1e-12);
    // ε0(a-1) = 1 gives 4 / (f(1) β)
    const ModelParams r(5.0, 1.0, 0.25, 1.0, 2.0, NonlinearitySpec::saturating(1.0));
    EXPECT_NEAR(chi_c0(r), 4.0 / (0.5 * 2.0), 1e-12);
}

TEST(Thresholds, SubcritMatchesC0WhenOptimal) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.2, 4.0);
    for (int k = 0; k < 100; ++k) {
        const double a = 1.0 + u(rng);
        const ModelParams p(a, 1.0, 1.0 / (a - 1.0), u(rng), u(rng), NonlinearitySpec::saturating(u(rng)));
        EXPECT_NEAR(chi_subcrit(p), chi_c0(p), 1e-12 * chi_c0(p));
    }
}

TEST(Thresholds, SubcritVanishesAsAApproachesOne) {
    double prev = 1e300;
    for (double a : {1.5, 1.1, 1.01, 1.0001, 1.000001}) {
        const double s = chi_subcrit(ModelParams(a, 1.0, 0.03125, 1.0, 1.0, NonlinearitySpec::saturating(1.0)));
        EXPECT_LT(s, prev);
        prev = s;
    }
    EXPECT_LT(prev, 2e-3);
}

TEST(Thresholds, OrderingOverRandomParams) {
    std::mt19937_64 rng(99);
    for (int k = 0; k < 300; ++k) {
        const auto p = random_params(rng);
        const RectDomain dom{0.5 + 4.0 * std::generate_canonical<double, 53>(rng),
                             0.5 + 4.0 * std::generate_canonical<double, 53>(rng)};
        const auto [pm, qm] = default_mode_bounds(p, dom);
        const double c0 = chi_c0(p);
        EXPECT_LE(chi_subcrit(p), c0 + 1e-12);
        EXPECT_GE(chi_c_domain(p, dom, pm, qm).chi_c, c0 - 1e-12);
    }
}

TEST(ChiCDomain, ReferenceSquare) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cc = chi_c_domain(reference_params(1.0), RectDomain{}, 8, 8);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_NEAR(cc.chi_c, 3.125, 1e-12);
    EXPECT_EQ(cc.mode.p, 2);
    EXPECT_EQ(cc.mode.q, 2);
    EXPECT_NEAR(cc.mode.lambda, 8.0, 1e-12);
    EXPECT_LT(secs, 1.0);
}

TEST(ChiCDomain, EmptyModeSetRejected) {
    EXPECT_THROW(chi_c_domain(reference_params(1.0), RectDomain{}, 0, 0), ValidationError);
}

TEST(ChiCDomain, DenseSamplingFindsTheContinuumMinimum) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        const auto p = random_params(rng);
        const double ls = lambda_star(p);
        // brute force over a fine λ grid
        double best = 1e300, best_l = 0.0;
        for (int i = 1; i <= 200000; ++i) {
            const double l = 8.0 * ls * i / 200000.0;
            const double f1 = p.nonlinearity().f(1.0);
            const double chi = ((p.a() - 1.0) / l + 1.0 + p.eps0() * (p.a() - 1.0) + p.eps0() * l)
                               / (f1 * p.beta());
            if (chi < best) {
                best = chi;
                best_l = l;
            }
        }
        EXPECT_NEAR(best, chi_c0(p), 1e-8 * best);
        EXPECT_NEAR(best_l, ls, 1e-3 * ls + 8.0 * ls / 200000.0);
        // a domain whose first eigenvalue is exactly λ* reaches the floor
        const RectDomain dom{std::numbers::pi / std::sqrt(ls), 1e-3};
        EXPECT_NEAR(chi_c_domain(p, dom, 1, 0).chi_c, chi_c0(p), 1e-12 * chi_c0(p));
    }
}

TEST(UnstableBand, BelowAndAboveThreshold) {
    const RectDomain dom;
    EXPECT_TRUE(unstable_band(reference_params(3.0), dom, 8, 8).empty());
    EXPECT_TRUE(unstable_band(reference_params(3.125), dom, 8, 8).empty());

    // just above χ_c only the (2,2) mode is unstable
    const auto narrow = unstable_band(reference_params(3.13), dom, 8, 8);
    ASSERT_EQ(narrow.size(), 1u);
    EXPECT_EQ(narrow[0].p, 2);
    EXPECT_EQ(narrow[0].q, 2);

    // at χ = 3.18 the modes with λ = 9 and λ = 10 have Det < 0 as well
    const auto p = reference_params(3.18);
    const auto band = unstable_band(p, dom, 8, 8);
    std::vector<double> lam;
    for (const auto& m : band) lam.push_back(m.lambda);
    const std::vector<double> expected{8, 9, 9, 10, 10};
    ASSERT_EQ(lam.size(), expected.size());
    for (std::size_t k = 0; k < lam.size(); ++k) EXPECT_NEAR(lam[k], expected[k], 1e-12);
    for (double l : {9.0, 10.0}) {
        const double det = 2.0 + (1.0 + 0.0625 - 3.18 * 0.5) * l + 0.03125 * l * l;
        EXPECT_LT(det, 0.0);
    }
}

TEST(UnstableBand, EmptyIffChiAtMostChiC) {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 200; ++k) {
        const auto p = random_params(rng);
        const RectDomain dom{1.0 + 3.0 * std::generate_canonical<double, 53>(rng), std::numbers::pi};
        const auto [pm, qm] = default_mode_bounds(p, dom);
        const double cc = chi_c_domain(p, dom, pm, qm).chi_c;
        const bool empty = unstable_band(p, dom, pm, qm).empty();
        if (std::abs(p.chi() - cc) > 1e-9 * cc) {
            EXPECT_EQ(empty, p.chi() < cc);
        }
        if (p.chi() < chi_c0(p)) EXPECT_TRUE(empty);
        EXPECT_GT(reduced_det(p, 0.0), 0.0);
    }
}
