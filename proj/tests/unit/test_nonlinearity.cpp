#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ignition/errors.hpp"
#include "ignition/nonlinearity.hpp"

using namespace ignition;

namespace {

IgnitionNonlinearity periodic_model(double amp = 0.4) {
    return IgnitionNonlinearity(0.25, 0.75, ForcingSignal::periodic(1.0, amp, 1.0));
}

}  // namespace

TEST(Forcing, PeriodicValuesAndBounds) {
    const auto g = ForcingSignal::periodic(1.0, 0.4, 1.0);
    EXPECT_DOUBLE_EQ(g(0.0), 1.0);
    EXPECT_NEAR(g(0.25), 1.4, 1e-14);
    EXPECT_NEAR(g(0.75), 0.6, 1e-14);
    EXPECT_NEAR(g.derivative(0.0), 0.4 * 2.0 * std::numbers::pi, 1e-12);
    EXPECT_DOUBLE_EQ(g.lower_bound(), 0.6);
    EXPECT_DOUBLE_EQ(g.upper_bound(), 1.4);
    ASSERT_TRUE(g.common_period().has_value());
    EXPECT_NEAR(*g.common_period(), 1.0, 1e-12);
}

TEST(Forcing, ConstantHasNoPeriod) {
    const auto g = ForcingSignal::constant(1.3);
    EXPECT_DOUBLE_EQ(g(17.0), 1.3);
    EXPECT_FALSE(g.common_period().has_value());
    EXPECT_EQ(g.kind(), ForcingKind::constant);
}

TEST(Forcing, QuasiPeriodicIncommensurateHasNoCommonPeriod) {
    const auto g = ForcingSignal::quasi_periodic(1.0, {{1.0, 0.2, 0.0}, {std::sqrt(2.0), 0.2, 0.0}});
    EXPECT_FALSE(g.common_period().has_value());
    EXPECT_NEAR(g.lower_bound(), 0.6, 1e-15);
}

TEST(Forcing, CommensurateFrequenciesShareAPeriod) {
    const auto g = ForcingSignal::quasi_periodic(1.0, {{1.0, 0.1, 0.0}, {1.5, 0.1, 0.3}});
    ASSERT_TRUE(g.common_period().has_value());
    EXPECT_NEAR(*g.common_period(), 2.0, 1e-9);
    EXPECT_NEAR(g(0.3), g(2.3), 1e-12);
}

TEST(Forcing, ShiftAdvancesPhase) {
    const auto g = ForcingSignal::quasi_periodic(1.0, {{1.0, 0.2, 0.1}, {std::sqrt(2.0), 0.1, 0.0}});
    const auto s = g.shifted(0.37);
    for (double t : {-2.0, 0.0, 0.5, 3.3}) EXPECT_NEAR(s(t), g(t + 0.37), 1e-12);
}

TEST(Forcing, RandomPhaseSumIsSeeded) {
    const std::vector<double> f{1.0, 2.5}, a{0.1, 0.05};
    const auto g1 = ForcingSignal::random_phase_sum(1.0, f, a, 7);
    const auto g2 = ForcingSignal::random_phase_sum(1.0, f, a, 7);
    const auto g3 = ForcingSignal::random_phase_sum(1.0, f, a, 8);
    EXPECT_EQ(g1, g2);
    EXPECT_NE(g1.components()[0].phase, g3.components()[0].phase);
    for (const auto& c : g1.components()) {
        EXPECT_GE(c.phase, 0.0);
        EXPECT_LT(c.phase, 2.0 * std::numbers::pi);
    }
}

TEST(Forcing, KindNamesRoundTrip) {
    for (auto k : {ForcingKind::constant, ForcingKind::periodic, ForcingKind::quasi_periodic,
                   ForcingKind::random_phase_sum})
        EXPECT_EQ(forcing_kind_from_string(to_string(k)), k);
}

TEST(Ignition, ShapeVanishesOutsideIgnitionRange) {
    const auto m = periodic_model();
    EXPECT_DOUBLE_EQ(m.value(0.3, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(m.value(0.3, 0.2), 0.0);
    EXPECT_DOUBLE_EQ(m.value(0.3, 0.25), 0.0);
    EXPECT_DOUBLE_EQ(m.value(0.3, 1.0), 0.0);
    EXPECT_GT(m.value(0.3, 0.5), 0.0);
    // (u - theta)(1 - u) g(t)
    EXPECT_NEAR(m.value(0.25, 0.5), 1.4 * 0.25 * 0.5, 1e-14);
}

TEST(Ignition, ContinuationAboveOneIsLinear) {
    const auto m = periodic_model();
    const double slope = m.shape_derivative(1.0 - 1e-12);
    EXPECT_NEAR(m.shape_value(1.1), slope * 0.1, 1e-9);
    EXPECT_LT(m.shape_value(1.1), 0.0);
}

TEST(Ignition, EvaluateRejectsNonFinite) {
    const auto m = periodic_model();
    EXPECT_THROW(m.evaluate(0.0, std::nan(""), false), PreconditionError);
    EXPECT_THROW(m.evaluate(INFINITY, 0.5, false), PreconditionError);
    const auto e = m.evaluate(0.0, 0.5, true);
    ASSERT_TRUE(e.derivative.has_value());
    EXPECT_NEAR(*e.derivative, 1.0 * (1.0 - 2 * 0.5 + 0.25), 1e-12);
}

TEST(Ignition, ApplyMatchesValue) {
    const auto m = periodic_model();
    std::vector<double> u{0.0, 0.1, 0.3, 0.6, 0.99, 1.0, 1.05}, out(u.size());
    m.apply(0.37, u, out);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_DOUBLE_EQ(out[i], m.value(0.37, u[i]));
}

TEST(Ignition, EnvelopesBracketTheNonlinearity) {
    const auto m = periodic_model();
    for (double t = 0.0; t < 1.0; t += 0.05)
        for (double u = 0.26; u < 1.0; u += 0.05) {
            EXPECT_LE(m.f_inf(u), m.value(t, u) + 1e-15);
            EXPECT_GE(m.f_sup(u), m.value(t, u) - 1e-15);
        }
}

TEST(Ignition, TimeShift) {
    const auto m = periodic_model();
    const auto s = m.time_shift(0.2);
    EXPECT_NEAR(s.value(0.1, 0.6), m.value(0.3, 0.6), 1e-14);
}

TEST(Ignition, LipschitzCoversSampledSlopes) {
    const auto m = periodic_model();
    for (double t = 0.0; t < 1.0; t += 0.1)
        for (double u = 0.0; u < 1.2; u += 0.01)
            EXPECT_LE(std::abs(m.shape_derivative(u)) * m.forcing()(t), m.lipschitz() + 1e-12);
}

TEST(Hypotheses, DefaultModelPasses) {
    const auto r = validate_hypotheses(periodic_model());
    EXPECT_TRUE(r.all_passed()) << r.h1.detail << " / " << r.h2.detail << " / " << r.h3.detail << " / "
                                << r.h4.detail;
    EXPECT_NEAR(r.g_min, 0.6, 1e-12);
    EXPECT_NEAR(r.g_max, 1.4, 1e-12);
    EXPECT_GT(r.beta, 0.0);
}

TEST(Hypotheses, ValidatedModelCarriesReport) {
    const auto vm = ValidatedModel::create(periodic_model());
    EXPECT_TRUE(vm.report().all_passed());
    EXPECT_NEAR(vm.beta(), vm.report().beta, 0.0);
}

TEST(Hypotheses, BetaOverrideIsUsed) {
    auto m = periodic_model();
    m.beta_override = 0.01;
    const auto vm = ValidatedModel::create(m);
    EXPECT_DOUBLE_EQ(vm.beta(), 0.01);
}

TEST(Hypotheses, NonPositiveForcingFails) {
    const IgnitionNonlinearity m(0.25, 0.75, ForcingSignal::periodic(1.0, 1.2, 1.0));
    const auto r = validate_hypotheses(m);
    EXPECT_FALSE(r.all_passed());
    EXPECT_THROW(ValidatedModel::create(m), HypothesisError);
}

TEST(Bistable, ExtensionIsC1AndBistable) {
    const auto vm = ValidatedModel::create(periodic_model());
    const auto fB = bistable_extension(vm);
    const double th = fB.theta();
    EXPECT_DOUBLE_EQ(fB(0.0), 0.0);
    for (double u = 0.01; u < th; u += 0.01) EXPECT_LT(fB(u), 0.0) << u;
    for (double u = th + 0.01; u < 1.0; u += 0.01) EXPECT_NEAR(fB(u), vm.model().f_inf(u), 1e-14);
    EXPECT_NEAR(fB(th - 1e-9), fB(th + 1e-9), 1e-8);
    EXPECT_NEAR(fB.derivative(th - 1e-9), fB.derivative(th + 1e-9), 1e-6);
    EXPECT_GT(fB.integral(), 0.0);
}

TEST(Bistable, IntegralMatchesQuadrature) {
    const auto vm = ValidatedModel::create(periodic_model());
    const auto fB = bistable_extension(vm);
    double s = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) s += fB((i + 0.5) / n) / n;
    EXPECT_NEAR(fB.integral(), s, 1e-8);
}

TEST(Floored, UpperEnvelope) {
    const auto vm = ValidatedModel::create(periodic_model());
    const auto fI = floored_ignition(vm);
    EXPECT_NEAR(fI(0.5), 1.4 * 0.25 * 0.5, 1e-14);
    EXPECT_DOUBLE_EQ(fI(0.1), 0.0);
}
