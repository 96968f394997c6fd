#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ignition/errors.hpp"
#include "ignition/numerics.hpp"

using namespace ignition::numerics;

TEST(Tridiagonal, FactorizationMatchesGeneralSolver) {
    const std::size_t n = 50;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> rhs(n);
    for (auto& v : rhs) v = U(rng);
    std::vector<double> lo(n, -0.7), di(n, 2.5), up(n, -0.7);
    const auto ref = solve_tridiagonal(lo, di, up, rhs);
    TridiagonalFactorization f(n, -0.7, 2.5, -0.7);
    auto x = rhs;
    f.solve(x);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-13);
    // Residual of the original system.
    for (std::size_t i = 0; i < n; ++i) {
        double r = 2.5 * x[i] - rhs[i];
        if (i > 0) r -= 0.7 * x[i - 1];
        if (i + 1 < n) r -= 0.7 * x[i + 1];
        EXPECT_NEAR(r, 0.0, 1e-13);
    }
}

TEST(Interpolation, CubicIsExactOnCubics) {
    std::vector<double> v;
    for (int i = 0; i < 20; ++i) {
        const double x = 0.1 * i;
        v.push_back(x * x * x - 2 * x + 1);
    }
    const UniformSamples s{0.0, 0.1, v};
    for (double x : {0.33, 0.71, 1.234}) {
        EXPECT_NEAR(cubic_lagrange(s, x), x * x * x - 2 * x + 1, 1e-12);
        const auto j = cubic_jet(s, x);
        EXPECT_NEAR(j.first, 3 * x * x - 2, 1e-10);
        EXPECT_NEAR(j.second, 6 * x, 1e-8);
    }
}

TEST(Interpolation, MonotoneCubicPreservesMonotonicity) {
    std::vector<double> v{1, 1, 1, 0.9, 0.2, 0.0, 0.0, 0.0};
    const UniformSamples s{0.0, 1.0, v};
    double prev = 2.0;
    for (double x = 0.0; x <= 7.0; x += 0.01) {
        const double y = monotone_cubic(s, x);
        EXPECT_LE(y, prev + 1e-14);
        EXPECT_GE(y, -1e-14);
        prev = y;
    }
    EXPECT_DOUBLE_EQ(monotone_cubic(s, -3.0), 1.0);
    EXPECT_DOUBLE_EQ(monotone_cubic(s, 30.0), 0.0);
}

TEST(Fit, LineRecoversSlope) {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) x.push_back(i), y.push_back(3.0 - 0.5 * i);
    const auto f = fit_line(x, y);
    EXPECT_NEAR(f.slope, -0.5, 1e-14);
    EXPECT_NEAR(f.intercept, 3.0, 1e-13);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_EQ(f.n, 10u);
}

TEST(Roots, BisectAndGolden) {
    EXPECT_NEAR(bisect_root([](double x) { return x * x - 2.0; }, 0.0, 2.0), std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(golden_section_minimize([](double x) { return (x - 0.3) * (x - 0.3); }, -1.0, 1.0), 0.3, 1e-8);
    EXPECT_THROW(bisect_root([](double x) { return x * x + 1.0; }, 0.0, 1.0), ignition::Error);
}

TEST(Stats, MedianAndMad) {
    EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
    const std::vector<double> v{1, 2, 3, 4, 100};
    EXPECT_DOUBLE_EQ(median_absolute_deviation(v), 1.0);
}

TEST(Quadrature, Simpson) {
    EXPECT_NEAR(simpson([](double x) { return std::sin(x); }, 0.0, M_PI), 2.0, 1e-10);
}
