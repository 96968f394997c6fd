#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "ignition/errors.hpp"
#include "ignition/experiments.hpp"
#include "ignition/homogeneous_waves.hpp"

using namespace ignition;

namespace {

ExperimentSpec small_spec(ExperimentKind kind, double h = 0.05, double dt = 0.01) {
    ExperimentSpec s;
    s.kind = kind;
    s.solver = SolverConfig::defaults_for(s.model.lipschitz(), h, 60.0);
    s.solver.dt = dt;
    s.burn_in = 120.0;
    return s;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(Kinds, NamesRoundTrip) {
    for (auto k : {ExperimentKind::stability, ExperimentKind::uniqueness, ExperimentKind::monotonicity,
                   ExperimentKind::recurrence, ExperimentKind::average_speed})
        EXPECT_EQ(experiment_kind_from_string(to_string(k)), k);
    EXPECT_THROW(experiment_kind_from_string("stabilty"), ConfigError);
}

TEST(Datum, StepAndLogistic) {
    const InitialDatum s{DatumKind::step, 1.0, 1.0};
    EXPECT_EQ(s(0.5), 1.0);
    EXPECT_EQ(s(1.5), 0.0);
    const InitialDatum l{DatumKind::logistic, 2.0, 3.0};
    EXPECT_DOUBLE_EQ(l(2.0), 0.5);
}

TEST(Spectral, ModuleIsSortedAndDeduplicated) {
    const auto m = frequency_module({1.0}, 3);
    EXPECT_EQ(m, (std::vector<double>{0.0, 1.0, 2.0, 3.0}));
    const auto q = frequency_module({1.0, std::sqrt(2.0)}, 1);
    ASSERT_EQ(q.size(), 5u);
    EXPECT_NEAR(q[1], std::sqrt(2.0) - 1.0, 1e-14);
    EXPECT_NEAR(q[4], 1.0 + std::sqrt(2.0), 1e-14);
    EXPECT_THROW(frequency_module({1.0}, -1), ConfigError);
}

TEST(Spectral, PeriodogramFindsSinusoids) {
    const double dt = 0.05;
    std::vector<double> s;
    for (int k = 0; k < 8000; ++k) {
        const double t = k * dt;
        s.push_back(0.5 + 0.3 * std::sin(2 * std::numbers::pi * t) + 0.1 * std::cos(2 * std::numbers::pi * 2 * t));
    }
    const auto module = frequency_module({1.0}, 3);
    const auto sp = periodogram(s, dt, module, {});
    EXPECT_NEAR(sp.bin_width, 1.0 / (8000 * dt), 1e-12);
    EXPECT_LE(sp.frequency.back(), 7.5 + sp.bin_width);
    bool at1 = false, at2 = false;
    for (const auto& p : sp.peaks) {
        EXPECT_TRUE(p.in_module) << p.frequency;
        at1 |= std::abs(p.frequency - 1.0) < 2 * sp.bin_width;
        at2 |= std::abs(p.frequency - 2.0) < 2 * sp.bin_width;
    }
    EXPECT_TRUE(at1);
    EXPECT_TRUE(at2);
}

TEST(Spectral, OffModulePeakIsReported) {
    const double dt = 0.05;
    std::vector<double> s;
    for (int k = 0; k < 8000; ++k) s.push_back(std::sin(2 * std::numbers::pi * 1.37 * k * dt));
    const auto sp = periodogram(s, dt, frequency_module({1.0}, 3), {});
    bool off = false;
    for (const auto& p : sp.peaks) off |= !p.in_module;
    EXPECT_TRUE(off);
    EXPECT_GT(sp.off_module_margin, 1.0);
}

TEST(AlmostPeriods, PeriodicSignal) {
    const double dt = 0.01;
    std::vector<double> s;
    for (int k = 0; k < 6000; ++k) s.push_back(std::sin(2 * std::numbers::pi * k * dt / 1.5));
    const auto ap = almost_periods(s, dt, 0.02, 10.0);
    ASSERT_GE(ap.taus.size(), 5u);
    for (std::size_t i = 0; i < ap.taus.size(); ++i) {
        EXPECT_NEAR(std::remainder(ap.taus[i], 1.5), 0.0, 0.01);
        EXPECT_LT(ap.defects[i], 0.02);
    }
    EXPECT_NEAR(ap.max_gap, 1.5, 0.02);
}

TEST(Distance, AlignedDistanceOfATranslate) {
    const auto g = Grid1D::centered(0.0, 60.0, 0.05);
    const Field a = Field::sample(g, [](double x) { return 1.0 / (1.0 + std::exp(x)); });
    const Field b = Field::sample(g, [](double x) { return 1.0 / (1.0 + std::exp(x - 0.4321)); });
    const auto d = aligned_distance(b, a);
    EXPECT_NEAR(d.shift, 0.4321, 1e-4);
    EXPECT_LT(d.distance, 1e-4);
    EXPECT_NEAR(profile_distance(a, 0.0, b, 0.4321, 20.0), 0.0, 1e-4);
}

TEST(Stability, ZeroPerturbationIsTriviallyStable) {
    auto s = small_spec(ExperimentKind::stability);
    s.perturbation.amplitude = 0.0;
    s.horizon = 10.0;
    const auto r = run_stability(s);
    EXPECT_TRUE(r.has_flag("trivially-stable"));
    EXPECT_EQ(r.quantities.count("decay_rate"), 0u);
    EXPECT_LT(r.quantities.at("final_distance"), 1e-10);
}

TEST(Stability, DeterministicAcrossRuns) {
    auto s = small_spec(ExperimentKind::stability);
    s.horizon = 30.0;
    s.fit_start = 5.0;
    s.perturbation.jitter = 1.0;
    s.seed = 42;
    const auto a = run_stability(s);
    const auto b = run_stability(s);
    ASSERT_EQ(a.quantities.size(), b.quantities.size());
    for (const auto& [k, v] : a.quantities) EXPECT_TRUE(same_bits({v}, {b.quantities.at(k)})) << k;
    ASSERT_EQ(a.series.size(), b.series.size());
    for (const auto& [k, v] : a.series) EXPECT_TRUE(same_bits(v, b.series.at(k))) << k;
    s.seed = 43;
    const auto c = run_stability(s);
    EXPECT_NE(a.quantities.at("initial_distance"), c.quantities.at("initial_distance"));
}

TEST(Stability, DecayRateConvergesUnderRefinement) {
    double r[2];
    for (int k = 0; k < 2; ++k) {
        auto s = small_spec(ExperimentKind::stability, k == 0 ? 0.05 : 0.025, k == 0 ? 0.01 : 0.005);
        s.horizon = 40.0;
        s.fit_start = 5.0;
        const auto rep = run_stability(s);
        ASSERT_EQ(rep.quantities.count("decay_rate"), 1u);
        r[k] = rep.quantities.at("decay_rate");
    }
    EXPECT_GT(r[0], 0.0);
    EXPECT_LT(std::abs(r[1] - r[0]) / r[1], 0.2) << r[0] << " vs " << r[1];
}

TEST(AverageSpeed, ConstantForcingMatchesTheIgnitionWave) {
    auto s = small_spec(ExperimentKind::average_speed);
    s.model = IgnitionNonlinearity(0.25, 0.75, ForcingSignal::constant(1.0));
    s.solver = SolverConfig::defaults_for(s.model.lipschitz(), 0.05, 60.0);
    s.speed_base_horizon = 10.0;
    s.horizon = 80.0;
    const auto r = run_average_speed(s);
    const double c = solve_ignition_wave([](double u) { return u > 0.25 ? (u - 0.25) * (1.0 - u) : 0.0; }, 0.25).speed;
    EXPECT_NEAR(r.quantities.at("average_speed"), c, 5.0 * (0.05 * 0.05 + 0.01));
    EXPECT_EQ(r.quantities.at("doublings"), 3.0);
}

TEST(AverageSpeed, TooFewDoublings) {
    auto s = small_spec(ExperimentKind::average_speed);
    s.speed_base_horizon = 25.0;
    s.horizon = 150.0;
    EXPECT_THROW(run_average_speed(s), ConfigError);
}

TEST(Recurrence, ShortHorizonIsRejected) {
    auto s = small_spec(ExperimentKind::recurrence);
    s.horizon = 10.0;
    EXPECT_THROW(run_recurrence(s), ConfigError);
}

TEST(Reference, BadThetaFloor) {
    auto s = small_spec(ExperimentKind::stability);
    s.theta_floor = 0.3;
    EXPECT_THROW(prepare_reference(s), ConfigError);
}

TEST(Reference, FailingModelIsRejected) {
    auto s = small_spec(ExperimentKind::stability);
    s.model = IgnitionNonlinearity(0.25, 0.75, ForcingSignal::periodic(1.0, 1.2, 1.0));
    EXPECT_THROW(prepare_reference(s), HypothesisError);
}
