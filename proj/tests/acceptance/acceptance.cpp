// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ignition/errors.hpp"
#include "ignition/experiments.hpp"
#include "ignition/front_tracking.hpp"
#include "ignition/homogeneous_waves.hpp"
#include "ignition/pde_core.hpp"
#include "ignition/supersub.hpp"

using namespace ignition;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

template <class... T>
std::string format(const char* f, T... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string failed_checks(const ExperimentReport& r) {
    std::string s;
    for (const auto& c : r.checks)
        if (!c.passed) s += " [" + c.name + format(" = %.4g %s %.4g]", c.value, c.relation.c_str(), c.tolerance);
    for (const auto& f : r.flags) s += " {" + f + "}";
    return s;
}

double quantity(const ExperimentReport& r, const std::string& k) {
    const auto it = r.quantities.find(k);
    return it == r.quantities.end() ? std::nan("") : it->second;
}

// ------------------------------------------------------------------ 1

constexpr double kA = 0.25;

double cubic(double u) { return u * (1.0 - u) * (u - kA); }

double tanh_wave(double x, double t) {
    const double c = (1.0 - 2.0 * kA) / std::sqrt(2.0);
    return 1.0 / (1.0 + std::exp((x - c * t) / std::sqrt(2.0)));
}

Outcome homogeneous_oracle() {
    const double exact = (1.0 - 2.0 * kA) / std::sqrt(2.0);
    const auto wave = solve_bistable_wave(cubic, 0.5);
    const double speed_err = std::abs(wave.speed - exact);

    AutonomousReaction f(cubic, 1.0);
    const auto cfg = SolverConfig::defaults_for(f.lipschitz(), 0.05, 80.0);
    Field u = Field::sample(Grid1D::centered(0.0, cfg.window_width, cfg.h), [](double x) { return tanh_wave(x, 0.0); });
    const double T = 10.0;
    const double level = kA;
    const double xi0 = interface_location(u, level, InterfaceRefinement::cubic);
    EvolveOptions o;
    o.track_level = level;
    o.record_every = 0;
    o.speed_formula = false;
    const auto run = evolve(u, f, cfg, T, o);
    const double xi1 = interface_location(run.field, level, InterfaceRefinement::cubic);
    const double disp_err = std::abs((xi1 - xi0) - exact * T);
    const double tol = 5.0 * (cfg.h * cfg.h + cfg.dt);
    Outcome out;
    out.passed = speed_err < 1e-3 && disp_err < tol;
    out.detail = format("shooting speed %.7f vs %.7f (|err| %.2e < 1e-3); displacement over T=10 %.6f vs %.6f "
                        "(|err| %.2e < 5(h^2+dt) = %.4f)",
                        wave.speed, exact, speed_err, xi1 - xi0, exact * T, disp_err, tol);
    return out;
}

// ------------------------------------------------------------------ 2

Outcome comparison_principle() {
    const auto model = default_model();
    auto cfg = SolverConfig::defaults_for(model.lipschitz(), 0.05, 20.0);
    const std::size_t n = cfg.node_count();
    Stepper stepper(cfg, n);
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Grid1D grid = Grid1D::centered(0.0, cfg.window_width, cfg.h);

    std::size_t violations = 0;
    double worst = 0.0;
    for (int pair = 0; pair < 1000; ++pair) {
        Field v{grid, std::vector<double>(n), 0.0};
        Field u = v;
        const int type = pair % 3;
        const double x0 = grid.left_edge() + U(rng) * cfg.window_width;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.x(i);
            double vi = 0.0;
            if (type == 0) vi = U(rng);
            else if (type == 1) vi = std::clamp((x < x0 ? 1.0 : 0.0) + 0.3 * (U(rng) - 0.5), 0.0, 1.0);
            else vi = 0.5 + 0.45 * std::sin(0.7 * x + 6.0 * U(rng) * (pair % 7 == 0));
            v.values[i] = vi;
            // A quarter of the nodes touch, the rest sit strictly below.
            u.values[i] = U(rng) < 0.25 ? vi : vi * U(rng);
        }
        v.values.front() = u.values.front() = 1.0;
        v.values.back() = u.values.back() = 0.0;
        for (int s = 0; s < 500; ++s) {
            stepper.advance(u, model);
            stepper.advance(v, model);
            for (std::size_t i = 0; i < n; ++i) {
                const double d = u.values[i] - v.values[i];
                if (d > 1e-12) ++violations;
                worst = std::max(worst, d);
            }
        }
    }
    Outcome out;
    out.passed = violations == 0;
    out.detail = format("1000 ordered pairs x 500 IMEX-Euler steps (h=%.3g, dt=%.3g, dt*C_Lip=%.3g): "
                        "%zu node violations beyond 1e-12, max(u-v) = %.3e",
                        cfg.h, cfg.dt, cfg.dt * model.lipschitz(), violations, worst);
    return out;
}

// ------------------------------------------------------------------ 3

Outcome stability() {
    ExperimentSpec a;
    a.kind = ExperimentKind::stability;
    a.perturbation.epsilon0_multiple = 1.0;
    a.horizon = 30.0;
    a.fit_start = 0.0;
    a.fit_floor = 1e-10;
    const auto ra = run_stability(a);

    ExperimentSpec b;
    b.kind = ExperimentKind::stability;
    const auto rb = run_stability(b);

    Outcome out;
    out.passed = ra.passed() && rb.passed();
    out.detail = format("eps0-scale bump (amp %.3g = eps0): r = %.4f, R^2 = %.5f, final %.2e, gap contracting in "
                        "%.0f%% of cycles; amp 0.05 bump: r = %.4f, R^2 = %.5f, final %.2e, gap contracting in "
                        "%.0f%% (median ratio %.3f)",
                        quantity(ra, "perturbation_amplitude"), quantity(ra, "decay_rate"),
                        quantity(ra, "fit_r_squared"), quantity(ra, "final_distance"),
                        100.0 * quantity(ra, "gap_contracting_fraction"), quantity(rb, "decay_rate"),
                        quantity(rb, "fit_r_squared"), quantity(rb, "final_distance"),
                        100.0 * quantity(rb, "gap_contracting_fraction"), quantity(rb, "gap_ratio_median")) +
                 failed_checks(ra) + failed_checks(rb);
    return out;
}

// ------------------------------------------------------------------ 4

Outcome uniqueness() {
    ExperimentSpec s;
    s.kind = ExperimentKind::uniqueness;
    const auto r = run_uniqueness(s);
    Outcome out;
    out.passed = r.passed();
    out.detail = format("step vs logistic datum, horizon %.1f = 200/c_B: aligned sup-distance %.3e < 1e-3, "
                        "relative shift %.4f",
                        quantity(r, "horizon"), quantity(r, "aligned_distance"), quantity(r, "relative_shift")) +
                 failed_checks(r);
    return out;
}

// ------------------------------------------------------------------ 5

Outcome monotonicity() {
    ExperimentSpec s;
    s.kind = ExperimentKind::monotonicity;
    const auto r = run_monotonicity_decay(s);
    Outcome out;
    out.passed = r.passed();
    out.detail = format("%.0f snapshots: %.0f monotonicity violations; c_hat_report %.4f >= c_B/2 - 0.05 = %.4f; "
                        "tail bound violations %.0f",
                        quantity(r, "snapshots"), quantity(r, "monotonicity_violations"),
                        quantity(r, "tail_rate_report"), quantity(r, "c_B") / 2.0 - 0.05,
                        quantity(r, "tail_bound_violations")) +
                 failed_checks(r);
    return out;
}

// ------------------------------------------------------------------ 6

Outcome modified_interface_bounds() {
    // Synthetic case: xi(t) = t, c_B = 1, C0 = 2 hits xi(0) + C0 + t/2 at t = 4.
    std::vector<double> ts, xs;
    for (int k = 0; k <= 2000; ++k) ts.push_back(0.01 * k), xs.push_back(0.01 * k);
    const auto syn = modified_interface(ts, xs, {1.0, 2.0, 0.5, 0.0, 0.0});
    const double T1 = syn.hitting_times.empty() ? std::nan("") : syn.hitting_times.front();
    const bool synthetic_ok = std::abs(T1 - 4.0) < 1e-12;

    // Converged run: reference front after burn-in, ten periods sampled at every step.
    ExperimentSpec spec;
    const auto ref = prepare_reference(spec);
    EvolveOptions o;
    o.track_level = spec.model.theta();
    o.speed_formula = false;
    auto run = evolve(ref.field, spec.model, ref.solver, ref.field.time + 40.0, o);
    const auto off = measure_propagation_offsets(run.trace.times, run.trace.xi, ref.c_B, ref.c_I);
    const double C0 = std::max(spec.interface_C0, 1.3 * ref.c_I * off.t_I);
    const auto mi = modified_interface(run.trace.times, run.trace.xi,
                                       {ref.c_B, C0, spec.interface_delta, off.t_I, ref.c_I});
    // Linear pieces: C0 + (3/4) c_B t_B. Inside a corner xi~ <= xi(T_n) + C0, and the upper
    // propagation bound limits xi(T_n) - xi(t) to (5/4) c_I (delta_star + t_I).
    const double bound = C0 + std::max(0.75 * ref.c_B * off.t_B, 1.25 * ref.c_I * (spec.interface_delta + off.t_I));
    // Interior samples: strictly inside the covered range, away from the first and last sample.
    double dmin = 1e300, dmax = -1e300, smin = 1e300, smax = -1e300;
    for (std::size_t j = 1; j + 1 < mi.times.size(); ++j) {
        const double d = mi.xi_tilde[j] - run.trace.xi[j];
        dmin = std::min(dmin, d), dmax = std::max(dmax, d);
        smin = std::min(smin, mi.slope[j]), smax = std::max(smax, mi.slope[j]);
    }
    const double half = 0.5 * ref.c_B;
    const bool run_ok = dmin >= 0.0 && dmax <= mi.d_max && mi.d_max <= bound && smin >= half - 1e-12 &&
                        smax <= mi.C_max + 1e-12;
    Outcome out;
    out.passed = synthetic_ok && run_ok;
    out.detail = format("synthetic first hitting time %.12g (expect 4); converged run (40 time units, %zu hits, "
                        "C0 = %.3f): xi~ - xi in [%.4f, %.4f], d_max %.4f <= a priori %.4f; slope in "
                        "[%.5f, %.4f] within [c_B/2, C_max] = [%.5f, %.4f]",
                        T1, mi.hitting_times.size(), C0, dmin, dmax, mi.d_max, bound, smin, smax, half, mi.C_max);
    return out;
}

// ------------------------------------------------------------------ 7

constexpr double kSafety = 10.0;

double oracle_residual(double h, double dt) {
    AutonomousReaction f(cubic, 1.0);
    SpaceTimeSamples st;
    st.dt = dt;
    st.h = h;
    st.left_edge = -30.0;
    const auto nodes = static_cast<std::size_t>(std::llround(60.0 / h)) + 1;
    const auto slices = static_cast<std::size_t>(std::llround(2.0 / dt)) + 1;
    for (std::size_t k = 0; k < slices; ++k) {
        std::vector<double> row(nodes);
        for (std::size_t i = 0; i < nodes; ++i) row[i] = tanh_wave(-30.0 + h * static_cast<double>(i), k * dt);
        st.slices.push_back(std::move(row));
    }
    const auto r = pde_residual(st, f);
    return std::max(-r.min(), r.max());
}

struct EnvelopeRun {
    double tol = 0.0;
    double oracle = 0.0;
    EnvelopeResiduals res;
    double eps0 = 0.0;
};

EnvelopeRun envelope_at(double h) {
    ExperimentSpec spec;
    spec.solver = SolverConfig::defaults_for(spec.model.lipschitz(), h);
    const auto ref = prepare_reference(spec);
    if (!ref.constants) throw DerivationError(ref.constants_error);
    const auto& k = *ref.constants;
    const auto gamma = build_gamma(k);

    SolverConfig cn = ref.solver;
    cn.scheme = TimeScheme::imex_trapezoid;
    ReferenceSeries series;
    series.dt = cn.dt;
    EvolveOptions o;
    o.track_level = spec.model.theta();
    o.speed_formula = false;
    o.observer = [&](const Field& f) { series.fields.push_back(f); };
    const double horizon = 20.0;
    auto run = evolve(ref.field, spec.model, cn, ref.field.time + horizon + 2.0 * cn.dt, o);
    const auto off = measure_propagation_offsets(run.trace.times, run.trace.xi, ref.c_B, ref.c_I);
    const double C0 = std::max(spec.interface_C0, 1.3 * ref.c_I * off.t_I);
    series.xi_tilde =
        modified_interface(run.trace.times, run.trace.xi, {ref.c_B, C0, spec.interface_delta, off.t_I, ref.c_I})
            .xi_tilde;

    EnvelopeRun out;
    out.eps0 = k.epsilon0;
    out.res = envelope_residuals(k, gamma, series, spec.model, -0.5 * k.epsilon0, 0.5 * k.epsilon0, k.epsilon0,
                                 horizon);
    out.oracle = oracle_residual(ref.solver.h, ref.solver.dt);
    out.tol = kSafety * out.oracle;
    return out;
}

Outcome envelope_residual_signs() {
    const auto a = envelope_at(0.05);
    const auto b = envelope_at(0.025);
    const double shrink = a.tol / b.tol;
    auto ok = [](const EnvelopeRun& r) { return r.res.min_upper >= -r.tol && r.res.max_lower <= r.tol; };
    Outcome out;
    out.passed = ok(a) && ok(b) && shrink >= 3.0;
    out.detail = format("eps = eps0 = %.3g, 20 time units, %zu slices; h=0.05: min R[u+] = %.3e >= -%.3e, "
                        "max R[u-] = %.3e <= %.3e; h=0.025: min R[u+] = %.3e >= -%.3e, max R[u-] = %.3e <= %.3e; "
                        "tol_grid = %g x oracle max|R| shrinks %.2fx (>= 3) on halving h, dt",
                        a.eps0, a.res.slices, a.res.min_upper, a.tol, a.res.max_lower, a.tol, b.res.min_upper,
                        b.tol, b.res.max_lower, b.tol, kSafety, shrink);
    return out;
}

// ------------------------------------------------------------------ 8

Outcome recurrence() {
    ExperimentSpec per;
    per.kind = ExperimentKind::recurrence;
    const auto rp = run_recurrence(per);

    ExperimentSpec qp;
    qp.kind = ExperimentKind::recurrence;
    qp.model = IgnitionNonlinearity(0.25, 0.75,
                                    ForcingSignal::quasi_periodic(1.0, {{1.0, 0.2, 0.0}, {std::sqrt(2.0), 0.2, 0.0}}));
    const auto rq = run_recurrence(qp);

    ExperimentSpec sp;
    sp.kind = ExperimentKind::average_speed;
    const auto rs = run_average_speed(sp);

    std::size_t peaks = 0;
    if (rq.spectrum) peaks = rq.spectrum->peaks.size();
    Outcome out;
    out.passed = rp.passed() && rq.passed() && rs.passed();
    out.detail = format("period-1: sup|xi'(t+1) - xi'(t)| = %.3e < 1e-2; {1, sqrt 2}: %zu peaks above floor, %.0f "
                        "off the module |m|,|n| <= 3; average speed %.6f (Cauchy increment %.2e < 1e-2) in "
                        "[c_B - 0.02, c_I + 0.02] = [%.4f, %.4f]",
                        quantity(rp, "speed_period_defect"), peaks, quantity(rq, "off_module_peaks"),
                        quantity(rs, "average_speed"), quantity(rs, "cauchy_increment"),
                        quantity(rs, "c_B") - 0.02, quantity(rs, "c_I") + 0.02) +
                 failed_checks(rp) + failed_checks(rq) + failed_checks(rs);
    return out;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> criteria{
        {"1 homogeneous oracle", homogeneous_oracle},
        {"2 discrete comparison principle", comparison_principle},
        {"3 stability", stability},
        {"4 uniqueness", uniqueness},
        {"5 monotonicity and tail", monotonicity},
        {"6 modified interface", modified_interface_bounds},
        {"7 envelope residuals", envelope_residual_signs},
        {"8 recurrence and average speed", recurrence},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %s: %s (%.1f s)\n", o.passed ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.passed ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
