#include <gtest/gtest.h>

#include <cmath>

#include "ignition/errors.hpp"
#include "ignition/supersub.hpp"

using namespace ignition;

namespace {

Field logistic(double center, double span = 60.0, double h = 0.05) {
    return Field::sample(Grid1D::centered(0.0, span, h), [=](double x) { return 1.0 / (1.0 + std::exp(x - center)); });
}

}  // namespace

TEST(Squeeze, Formulas) {
    EXPECT_DOUBLE_EQ(squeeze::alpha(1.0, 0.129302, 0.5), 0.129302 / 8.0);
    EXPECT_DOUBLE_EQ(squeeze::alpha(0.02, 1.0, 0.5), 0.01);
    EXPECT_DOUBLE_EQ(squeeze::alpha(1.0, 1.0, 0.05), 0.05);
    const double a = 0.01616, cB = 0.129302;
    EXPECT_DOUBLE_EQ(squeeze::omega(1.0, a, cB, 1.05), a * cB / 4.0 - a * a);
    EXPECT_DOUBLE_EQ(squeeze::omega(1e-6, a, cB, 1.05), 1e-6);
    EXPECT_DOUBLE_EQ(squeeze::M(1.05, 0.0113, 2.56e-6), (2.1 + 0.0113) / 2.56e-6);
    EXPECT_DOUBLE_EQ(squeeze::epsilon0(0.25, 0.75, 1.0, 1.0), 0.125);
    EXPECT_DOUBLE_EQ(squeeze::epsilon0(0.25, 0.75, cB, 1.0), cB / 4.0);
    EXPECT_DOUBLE_EQ(squeeze::epsilon0(0.25, 0.75, cB, 824008.0), cB / (4.0 * 824008.0));
    EXPECT_DOUBLE_EQ(squeeze::epsilon0(0.25, 0.9, 10.0, 1.0), 0.05);
}

TEST(Squeeze, NuDiagnostic) {
    SqueezeConstants c;
    c.alpha = 0.02;
    c.c_B = 0.2;
    EXPECT_DOUBLE_EQ(c.nu(), 0.02 * 0.1 - 0.0004);
}

TEST(Gamma, ShapeAndSmoothness) {
    const double a = 0.01616, L0 = 17.0;
    const auto g = build_gamma(a, L0);
    EXPECT_DOUBLE_EQ(g(-L0 - 5.0), 1.0);
    EXPECT_DOUBLE_EQ(g(g.bridge_start()), 1.0);
    EXPECT_LE(g.bridge_start(), L0 + 1.0);
    for (double x : {L0 + 1.0, L0 + 3.0, L0 + 40.0}) EXPECT_NEAR(g(x), std::exp(-a * (x - L0)), 1e-14);
    double prev = 1.0 + 1e-15, max_second = 0.0;
    for (double x = -L0 - 2.0; x < L0 + 10.0; x += 0.01) {
        const double v = g(x);
        EXPECT_LE(v, prev);
        EXPECT_LE(g.derivative(x), 1e-15);
        max_second = std::max(max_second, std::abs(g.second(x)));
        prev = v;
    }
    EXPECT_LE(max_second, g.C_Gamma() * (1.0 + 1e-6));
    // C^2 at both joints.
    for (double j : {g.bridge_start(), L0 + 1.0}) {
        const double e = 1e-7;
        EXPECT_NEAR(g(j - e), g(j + e), 1e-8);
        EXPECT_NEAR(g.derivative(j - e), g.derivative(j + e), 1e-7);
        EXPECT_NEAR(g.second(j - e), g.second(j + e), 1e-6);
    }
}

TEST(Gamma, DerivativesAreConsistent) {
    const auto g = build_gamma(0.3, 4.0);
    const double e = 1e-5;
    for (double x = g.bridge_start() + 0.05; x < 4.95; x += 0.1) {
        EXPECT_NEAR((g(x + e) - g(x - e)) / (2 * e), g.derivative(x), 1e-7);
        EXPECT_NEAR((g.derivative(x + e) - g.derivative(x - e)) / (2 * e), g.second(x), 1e-5);
    }
}

TEST(Gamma, RejectsBadInput) {
    EXPECT_THROW(build_gamma(0.0, 17.0), PreconditionError);
    EXPECT_THROW(build_gamma(-1.0, 17.0), PreconditionError);
}

TEST(TightestShift, RecoversTranslation) {
    const Field ref = logistic(0.0);
    const Field u = logistic(1.3);
    EXPECT_NEAR(tightest_shift(u, ref, 0.0, ShiftSide::upper, 5.0, 1e-10), 1.3, 1e-3);
    EXPECT_NEAR(tightest_shift(u, ref, 0.0, ShiftSide::lower, 5.0, 1e-10), 1.3, 1e-3);
    // Slack q loosens both sides in opposite directions.
    EXPECT_LT(tightest_shift(u, ref, 0.05, ShiftSide::upper, 5.0), 1.3);
    EXPECT_GT(tightest_shift(u, ref, 0.05, ShiftSide::lower, 5.0), 1.3);
}

TEST(TightestShift, ScanIsCenteredOnTheCrossings) {
    const Field ref = logistic(0.0);
    EXPECT_NEAR(tightest_shift(logistic(8.0), ref, 0.0, ShiftSide::upper, 2.0), 8.0, 1e-3);
}

TEST(TightestShift, NoTranslateBoundsARaisedTail) {
    const Field ref = logistic(0.0);
    Field u = ref;
    for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] = std::max(u.values[i], 0.3);
    EXPECT_THROW(tightest_shift(u, ref, 0.0, ShiftSide::upper, 2.0), RangeError);
}

TEST(Sandwich, BracketsPerturbedDatum) {
    const Field ref = logistic(0.0);
    Field u = ref;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const double x = u.grid.x(i);
        u.values[i] = std::clamp(u.values[i] + 0.01 * std::exp(-x * x / 8.0), 0.0, 1.0);
    }
    const auto g = build_gamma(0.05, 5.0);
    const double eps = 0.02;
    const auto s = initial_sandwich(u, ref, 0.0, g, eps, 5.0);
    EXPECT_LE(s.zeta_minus, s.zeta_plus);
    EXPECT_GE(s.zeta_plus - s.zeta_minus, eps - 1e-12);
    for (std::size_t i = 200; i + 200 < u.values.size(); ++i) {
        const double x = u.grid.x(i);
        EXPECT_LE(u.values[i], ref.at(x - s.zeta_plus) + eps * g(x - s.zeta_plus) + 1e-9);
        EXPECT_GE(u.values[i], ref.at(x - s.zeta_minus) - eps * g(x - s.zeta_minus) - 1e-9);
    }
}
