#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "ignition/errors.hpp"
#include "ignition/experiments.hpp"
#include "ignition/pde_core.hpp"

using namespace ignition;

namespace {

double cubic(double u) { return u * (1.0 - u) * (u - 0.25); }

Field step_field(const SolverConfig& cfg, double at = 0.0) {
    return Field::sample(Grid1D::centered(0.0, cfg.window_width, cfg.h), [at](double x) { return x < at ? 1.0 : 0.0; });
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(Grid, LatticeAlignedWindow) {
    const auto g = Grid1D::centered(3.01, 10.0, 0.05);
    EXPECT_NEAR(std::abs(g.center() - 3.01), 0.0, 0.025 + 1e-12);
    EXPECT_NEAR(g.x(1) - g.x(0), 0.05, 1e-15);
    EXPECT_DOUBLE_EQ(g.x(0), static_cast<double>(g.first_index) * 0.05);
    EXPECT_THROW((Grid1D{0, 0.05, 3}).validate(), PreconditionError);
}

TEST(Solver, DefaultsRespectComparisonBound) {
    const auto cfg = SolverConfig::defaults_for(1.05);
    EXPECT_DOUBLE_EQ(cfg.dt, 0.01);
    EXPECT_NO_THROW(cfg.validate());
    auto bad = cfg;
    bad.dt = 1.0;
    try {
        bad.validate();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("1/C_Lip"), std::string::npos);
    }
    bad = cfg;
    bad.h = 0.0;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Solver, EdgesStayClamped) {
    const auto model = default_model();
    const auto cfg = SolverConfig::defaults_for(model.lipschitz(), 0.05, 20.0);
    Field f = Field::sample(Grid1D::centered(0.0, 20.0, 0.05), [](double) { return 0.5; });
    for (int k = 0; k < 20; ++k) f = step(f, model, cfg);
    EXPECT_EQ(f.values.front(), 1.0);
    EXPECT_EQ(f.values.back(), 0.0);
}

TEST(Solver, WaveFreeStateOnlyDiffuses) {
    // No reaction below theta: 1 on the left half, theta/2 on the right stays below theta far out.
    const auto model = default_model();
    const auto cfg = SolverConfig::defaults_for(model.lipschitz(), 0.05, 40.0);
    Field f = Field::sample(Grid1D::centered(0.0, 40.0, 0.05), [](double x) { return x < 0 ? 1.0 : 0.0; });
    const Field g = step(f, model, cfg);
    double mass_change = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (f.grid.x(i) > 5.0 && f.grid.x(i) < 15.0) mass_change = std::max(mass_change, std::abs(g.values[i] - f.values[i]));
    EXPECT_LT(mass_change, 1e-6);
}

TEST(Solver, StepAdvancesTime) {
    const auto model = default_model();
    const auto cfg = SolverConfig::defaults_for(model.lipschitz(), 0.05, 20.0);
    const auto f = step(step_field(cfg), model, cfg);
    EXPECT_NEAR(f.time, cfg.dt, 1e-15);
}

TEST(Solver, StepRejectsTooLargeDt) {
    const auto model = default_model();
    auto cfg = SolverConfig::defaults_for(model.lipschitz(), 0.05, 20.0);
    cfg.dt = 2.0;
    EXPECT_THROW(step(step_field(cfg), model, cfg), ConfigError);
}

// Property: ordered data stay ordered (discrete comparison principle).
TEST(Solver, ComparisonPrincipleRandomPairs) {
    const auto model = default_model();
    const auto cfg = SolverConfig::defaults_for(model.lipschitz(), 0.05, 10.0);
    const std::size_t n = cfg.node_count();
    Stepper stepper(cfg, n);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const auto grid = Grid1D::centered(0.0, cfg.window_width, cfg.h);
    std::size_t violations = 0;
    for (int pair = 0; pair < 200; ++pair) {
        Field v{grid, std::vector<double>(n), 0.0};
        Field u = v;
        for (std::size_t i = 0; i < n; ++i) {
            v.values[i] = U(rng);
            u.values[i] = v.values[i] * U(rng);
        }
        v.values.front() = u.values.front() = 1.0;
        v.values.back() = u.values.back() = 0.0;
        for (int s = 0; s < 100; ++s) {
            stepper.advance(u, model);
            stepper.advance(v, model);
            for (std::size_t i = 0; i < n; ++i) violations += u.values[i] > v.values[i] + 1e-12;
        }
    }
    EXPECT_EQ(violations, 0u);
}

TEST(Solver, ValuesStayInUnitInterval) {
    const auto model = default_model();
    const auto cfg = SolverConfig::defaults_for(model.lipschitz(), 0.05, 20.0);
    Field f = step_field(cfg);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (auto& v : f.values) v = U(rng);
    f.values.front() = 1.0, f.values.back() = 0.0;
    for (int k = 0; k < 300; ++k) {
        f = step(f, model, cfg);
        for (double v : f.values) {
            ASSERT_GE(v, -1e-14);
            ASSERT_LE(v, 1.0 + 1e-14);
        }
    }
}

TEST(Solver, TrapezoidIsSecondOrderInTime) {
    AutonomousReaction f(cubic, 1.0);
    auto run = [&](double dt, TimeScheme s) {
        SolverConfig cfg = SolverConfig::defaults_for(1.0, 0.1, 40.0);
        cfg.dt = dt;
        cfg.scheme = s;
        Field u = Field::sample(Grid1D::centered(0.0, 40.0, 0.1), [](double x) { return 1.0 / (1.0 + std::exp(x)); });
        EvolveOptions o;
        o.record_every = 0;
        o.recenter = false;
        return evolve(u, f, cfg, 2.0, o).field;
    };
    const auto ref = run(0.00125, TimeScheme::imex_trapezoid);
    auto err = [&](const Field& a) {
        double e = 0.0;
        for (std::size_t i = 0; i < a.values.size(); ++i) e = std::max(e, std::abs(a.values[i] - ref.values[i]));
        return e;
    };
    const double e1 = err(run(0.02, TimeScheme::imex_trapezoid));
    const double e2 = err(run(0.01, TimeScheme::imex_trapezoid));
    EXPECT_GT(e1 / e2, 3.0);
    const double f1 = err(run(0.02, TimeScheme::imex_euler));
    const double f2 = err(run(0.01, TimeScheme::imex_euler));
    EXPECT_GT(f1 / f2, 1.7);
    EXPECT_LT(f1 / f2, 2.5);
}

TEST(Evolve, TracksAndRecenters) {
    const auto model = default_model();
    const auto cfg = SolverConfig::defaults_for(model.lipschitz(), 0.05, 40.0);
    EvolveOptions o;
    o.track_level = 0.25;
    o.extra_levels = {0.5};
    const auto r = evolve(step_field(cfg), model, cfg, 30.0, o);
    EXPECT_GT(r.recenterings, 0u);
    EXPECT_EQ(r.trace.size(), r.steps + 1);
    EXPECT_GT(r.trace.xi.back(), r.trace.xi.front() + 5.0);
    ASSERT_EQ(r.trace.xi_by_level.count(0.5), 1u);
    EXPECT_LT(r.trace.xi_by_level.at(0.5).back(), r.trace.xi.back());
    EXPECT_NEAR(r.field.time, 30.0, 1e-9);
    EXPECT_LT(r.edge_drift, 1e-5);
}

TEST(Evolve, IsDeterministic) {
    const auto model = default_model();
    const auto cfg = SolverConfig::defaults_for(model.lipschitz(), 0.05, 30.0);
    const auto a = evolve(step_field(cfg), model, cfg, 10.0);
    const auto b = evolve(step_field(cfg), model, cfg, 10.0);
    EXPECT_TRUE(same_bits(a.field.values, b.field.values));
    EXPECT_TRUE(same_bits(a.trace.xi, b.trace.xi));
    EXPECT_TRUE(same_bits(a.trace.speed_formula, b.trace.speed_formula));
}

TEST(Evolve, WithoutRecenteringHitsTheEdge) {
    const auto model = default_model();
    auto cfg = SolverConfig::defaults_for(model.lipschitz(), 0.05, 20.0);
    // The zero Dirichlet edge pins the front about 1.4 short of it.
    cfg.edge_margin = 40;
    EvolveOptions o;
    o.recenter = false;
    EXPECT_THROW(evolve(step_field(cfg), model, cfg, 60.0, o), WindowError);
}

TEST(Window, ShiftIsExactOnTheLattice) {
    const auto cfg = SolverConfig::defaults_for(1.0, 0.05, 10.0);
    Field f = Field::sample(Grid1D::centered(0.0, 10.0, 0.05), [](double x) { return 1.0 / (1.0 + std::exp(x)); });
    const Field g = f;
    shift_window(f, 7);
    EXPECT_EQ(f.grid.first_index, g.grid.first_index + 7);
    for (std::size_t i = 0; i + 7 < g.values.size(); ++i) EXPECT_EQ(f.values[i], g.values[i + 7]);
    EXPECT_EQ(f.values.back(), 0.0);
    (void)cfg;
}

TEST(Residual, ExactWaveHasSmallResidual) {
    AutonomousReaction f(cubic, 1.0);
    auto max_residual = [&](double h, double dt) {
        const double c = 0.5 / std::sqrt(2.0);
        SpaceTimeSamples st;
        st.dt = dt;
        st.h = h;
        st.left_edge = -20.0;
        const auto nodes = static_cast<std::size_t>(std::llround(40.0 / h)) + 1;
        for (int k = 0; k < 5; ++k) {
            std::vector<double> row(nodes);
            for (std::size_t i = 0; i < nodes; ++i)
                row[i] = 1.0 / (1.0 + std::exp((-20.0 + h * i - c * k * dt) / std::sqrt(2.0)));
            st.slices.push_back(row);
        }
        const auto r = pde_residual(st, f);
        EXPECT_EQ(r.values.size(), 3u);
        return std::max(-r.min(), r.max());
    };
    const double a = max_residual(0.1, 0.02), b = max_residual(0.05, 0.01);
    EXPECT_LT(b, 1e-4);
    EXPECT_NEAR(a / b, 4.0, 0.3);
}

TEST(Residual, RejectsShortOrRaggedData) {
    AutonomousReaction f(cubic, 1.0);
    SpaceTimeSamples st{0.0, 0.1, 0.0, 0.1, {{0, 0, 0}, {0, 0, 0}}};
    EXPECT_THROW(pde_residual(st, f), PreconditionError);
    st.slices.push_back({0, 0});
    EXPECT_THROW(pde_residual(st, f), PreconditionError);
}

TEST(Io, FieldCsv) {
    const auto cfg = SolverConfig::defaults_for(1.0, 0.5, 10.0);
    const Field f = step_field(cfg);
    const auto path = (std::filesystem::temp_directory_path() / "pde_field.csv").string();
    write_field_csv(f, path);
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "x,u");
    EXPECT_THROW(write_field_csv(f, "/nonexistent-dir/f.csv"), IoError);
}
