#include "ignition/experiments.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "ignition/errors.hpp"
#include "ignition/homogeneous_waves.hpp"
#include "ignition/numerics.hpp"

namespace ignition {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(8) << v;
    return os.str();
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

Check judge(std::string name, double value, std::string relation, double tol, double tol_hi = 0.0) {
    Check c{std::move(name), value, std::move(relation), tol, tol_hi, false};
    if (c.relation == "<") c.passed = value < tol;
    else if (c.relation == "<=") c.passed = value <= tol;
    else if (c.relation == ">") c.passed = value > tol;
    else if (c.relation == ">=") c.passed = value >= tol;
    else if (c.relation == "in") c.passed = value >= tol && value <= tol_hi;
    else throw PreconditionError("unknown relation " + c.relation);
    return c;
}

// Base period of the forcing: the common period, else the slowest component.
double base_period(const ForcingSignal& g) {
    if (auto p = g.common_period()) return *p;
    double fmin = std::numeric_limits<double>::infinity();
    for (const auto& c : g.components())
        if (c.frequency > 0.0 && c.amplitude != 0.0) fmin = std::min(fmin, c.frequency);
    return std::isfinite(fmin) ? 1.0 / fmin : 1.0;
}

std::vector<double> forcing_frequencies(const ForcingSignal& g) {
    std::vector<double> f;
    for (const auto& c : g.components()) {
        if (c.amplitude == 0.0 || c.frequency <= 0.0) continue;
        if (std::none_of(f.begin(), f.end(), [&](double v) { return std::abs(v - c.frequency) < 1e-12; }))
            f.push_back(c.frequency);
    }
    return f;
}

std::size_t steps_for(double duration, double dt) {
    return static_cast<std::size_t>(std::llround(duration / dt));
}

// Advance by n steps with recentring and no trace; the time is reset to origin + total dt.
Field advance_steps(Field f, const Reaction& model, const SolverConfig& cfg, std::size_t n, double level,
                    double exact_time) {
    if (n == 0) return f;
    EvolveOptions o;
    o.track_level = level;
    o.record_every = 0;
    o.speed_formula = false;
    const double until = f.time + static_cast<double>(n) * cfg.dt;
    auto r = evolve(std::move(f), model, cfg, until, o);
    r.field.time = exact_time;
    return std::move(r.field);
}

Field advance_to(Field f, const Reaction& model, const SolverConfig& cfg, double until, double level) {
    const std::size_t n = steps_for(until - f.time, cfg.dt);
    return advance_steps(std::move(f), model, cfg, n, level, until);
}

double theta_interface(const Field& f, double theta) {
    return interface_location(f, theta, InterfaceRefinement::cubic);
}

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()), started_(utc_now()) {}
    void finish(ExperimentReport& r, const ExperimentSpec& spec, const SolverConfig& cfg) const {
        r.provenance.config_hash = spec.config_hash;
        r.provenance.tool_version = tool_version();
        r.provenance.h = cfg.h;
        r.provenance.dt = cfg.dt;
        r.provenance.window_width = cfg.window_width;
        r.provenance.seed = spec.seed;
        r.provenance.started = started_;
        r.provenance.finished = utc_now();
        r.provenance.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
    std::string started_;
};

void record_common(ExperimentReport& r, const ReferenceFront& ref, double theta) {
    r.quantities["theta"] = theta;
    r.hypotheses = ref.hypotheses;
    r.constants = ref.constants;
    if (!ref.constants) r.notes.push_back("squeeze constants unavailable: " + ref.constants_error);
    r.quantities["c_B"] = ref.c_B;
    r.quantities["c_I"] = ref.c_I;
    r.quantities["theta_floor"] = ref.theta_floor;
    r.quantities["burn_in"] = ref.burn_in;
}

}  // namespace

std::string tool_version() { return "0.3.0"; }

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::stability: return "stability";
        case ExperimentKind::uniqueness: return "uniqueness";
        case ExperimentKind::monotonicity: return "monotonicity";
        case ExperimentKind::recurrence: return "recurrence";
        case ExperimentKind::average_speed: return "speed";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    if (name == "stability") return ExperimentKind::stability;
    if (name == "uniqueness") return ExperimentKind::uniqueness;
    if (name == "monotonicity") return ExperimentKind::monotonicity;
    if (name == "recurrence") return ExperimentKind::recurrence;
    if (name == "speed" || name == "average_speed") return ExperimentKind::average_speed;
    throw ConfigError("unknown experiment kind '" + name +
                      "' (expected stability, uniqueness, monotonicity, recurrence or speed)");
}

IgnitionNonlinearity default_model() {
    return IgnitionNonlinearity(0.25, 0.75, ForcingSignal::periodic(1.0, 0.4, 1.0));
}

double InitialDatum::operator()(double x) const {
    if (kind == DatumKind::step) return x < offset ? 1.0 : 0.0;
    return 1.0 / (1.0 + std::exp((x - offset) / width));
}

bool ExperimentReport::passed() const {
    if (has_flag("inconclusive")) return false;
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

bool ExperimentReport::has_flag(const std::string& flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

const Check* ExperimentReport::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ReferenceFront prepare_reference(const ExperimentSpec& spec) {
    const auto vm = ValidatedModel::create(spec.model);
    const auto& model = vm.model();
    ReferenceFront out;
    out.hypotheses = vm.report();
    out.solver = spec.solver;
    out.solver.max_lip = std::max(out.solver.max_lip, model.lipschitz());
    out.solver.validate();

    const auto fB = bistable_extension(vm);
    out.c_B = solve_bistable_wave([&](double u) { return fB(u); }, 0.5).speed;
    const auto fI = floored_ignition(vm);
    out.theta_floor = spec.theta_floor > 0.0 ? spec.theta_floor : model.theta() / 4.0;
    if (!(out.theta_floor < model.theta())) throw ConfigError("theta_floor must lie below theta");
    out.c_I = solve_ignition_floor_wave([&](double u) { return fI(u); }, model.theta(), out.theta_floor).speed;
    out.burn_in = spec.burn_in > 0.0 ? spec.burn_in : std::ceil(40.0 / out.c_B);

    const auto grid = Grid1D::centered(0.0, out.solver.window_width, out.solver.h);
    Field f = Field::sample(grid, [](double x) { return x < 0.0 ? 1.0 : 0.0; });
    out.field = advance_to(std::move(f), model, out.solver, out.burn_in, model.theta());

    // Ten base periods of snapshots feed the constant derivation.
    const double period = base_period(model.forcing());
    const std::size_t every = std::max<std::size_t>(1, steps_for(0.1, out.solver.dt));
    ReferenceWaveData data;
    std::size_t count = 0;
    EvolveOptions o;
    o.track_level = model.theta();
    o.speed_formula = false;
    o.observer = [&](const Field& s) {
        if (count++ % every == 0) data.snapshots.push_back(s);
    };
    try {
        auto run = evolve(out.field, model, out.solver, out.burn_in + 10.0 * period, o);
        for (const auto& s : data.snapshots) data.xi.push_back(theta_interface(s, model.theta()));
        const auto offsets = measure_propagation_offsets(run.trace.times, run.trace.xi, out.c_B, out.c_I);
        ModifiedInterfaceOptions mo{out.c_B, std::max(spec.interface_C0, 1.3 * out.c_I * offsets.t_I),
                                    spec.interface_delta, offsets.t_I, out.c_I};
        data.d_max = modified_interface(run.trace.times, run.trace.xi, mo).d_max;
        ConstantInputs in;
        in.theta = model.theta();
        in.theta_star = model.theta_star();
        in.beta = vm.beta();
        in.C_Lip = model.lipschitz();
        in.c_B = out.c_B;
        in.alpha0 = spec.perturbation.alpha0;
        in.tail_lo = spec.tail_lo;
        in.tail_hi = spec.tail_hi;
        out.constants = derive_constants(data, in);
    } catch (const Error& e) {
        out.constants_error = e.what();
    }
    return out;
}

AlignedDistance aligned_distance(const Field& u, const Field& ref) {
    const double z0 = interface_location(u, 0.5) - interface_location(ref, 0.5);
    const double lo = ref.grid.left_edge() + 2.0 * ref.grid.spacing;
    const double hi = ref.grid.right_edge() - 2.0 * ref.grid.spacing;
    auto sup = [&](double z) {
        double m = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            const double x = u.grid.x(i) - z;
            if (x < lo + 1.0 || x > hi - 1.0) continue;
            m = std::max(m, std::abs(u.values[i] - ref.at(x)));
        }
        return m;
    };
    const double z = numerics::golden_section_minimize(sup, z0 - 1.0, z0 + 1.0, 1e-10);
    return {sup(z), z};
}

double profile_distance(const Field& a, double xi_a, const Field& b, double xi_b, double half_width) {
    const double h = std::min(a.grid.spacing, b.grid.spacing);
    const auto n = static_cast<long>(std::floor(half_width / h));
    double m = 0.0;
    for (long k = -n; k <= n; ++k) {
        const double s = static_cast<double>(k) * h;
        m = std::max(m, std::abs(a.at(xi_a + s) - b.at(xi_b + s)));
    }
    return m;
}

std::vector<double> frequency_module(const std::vector<double>& base, int order) {
    if (order < 0) throw ConfigError("module order must be nonnegative");
    const std::size_t d = base.size();
    const double combos = std::pow(2.0 * order + 1.0, static_cast<double>(d));
    if (combos > 1e6) throw ConfigError("frequency module too large: " + fmt(combos) + " combinations");
    std::vector<double> out;
    std::vector<int> n(d, -order);
    while (true) {
        double f = 0.0;
        for (std::size_t i = 0; i < d; ++i) f += n[i] * base[i];
        if (f > -1e-12) out.push_back(std::max(0.0, f));
        std::size_t i = 0;
        while (i < d && n[i] == order) n[i++] = -order;
        if (i == d) break;
        ++n[i];
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              out.end());
    return out;
}

Spectrum periodogram(const std::vector<double>& samples, double spacing, const std::vector<double>& module,
                     const SpectralWindow& window) {
    const std::size_t n = samples.size();
    if (n < 16) throw PreconditionError("periodogram needs at least 16 samples");
    if (!(spacing > 0.0)) throw PreconditionError("periodogram needs a positive sample spacing");
    std::vector<double> in(n);
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n - 1));
        in[i] = w * samples[i];
        wsum += w;
    }
    const std::size_t half = n / 2 + 1;
    auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * half));
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out, FFTW_ESTIMATE);
    fftw_execute(plan);

    Spectrum s;
    s.bin_width = 1.0 / (static_cast<double>(n) * spacing);
    s.module = module;
    const std::size_t bins = std::min(half, static_cast<std::size_t>(std::floor(window.f_max / s.bin_width)) + 1);
    const double scale = 2.0 / wsum;
    for (std::size_t k = 0; k < bins; ++k) {
        const double re = out[k][0] * scale, im = out[k][1] * scale;
        s.frequency.push_back(static_cast<double>(k) * s.bin_width);
        s.power.push_back(re * re + im * im);
    }
    fftw_destroy_plan(plan);
    fftw_free(out);

    std::vector<double> logp(bins);
    for (std::size_t k = 0; k < bins; ++k) logp[k] = std::log10(std::max(s.power[k], 1e-300));
    s.floor_statistical =
        std::pow(10.0, numerics::median(logp) + window.floor_mads * numerics::median_absolute_deviation(logp));
    s.floor = s.floor_statistical;
    if (window.dynamic_range > 0.0) s.floor = std::max(s.floor, s.power[0] * std::pow(10.0, -window.dynamic_range));

    for (std::size_t k = 0; k < bins; ++k) {
        bool is_max = true;
        for (std::size_t j = k >= 2 ? k - 2 : 0; j <= std::min(bins - 1, k + 2) && is_max; ++j)
            if (s.power[j] > s.power[k]) is_max = false;
        if (!is_max) continue;
        SpectralPeak p;
        p.frequency = s.frequency[k];
        p.power = s.power[k];
        p.distance_bins = std::numeric_limits<double>::infinity();
        for (double g : module) {
            const double d = std::abs(p.frequency - g) / s.bin_width;
            if (d < p.distance_bins) {
                p.distance_bins = d;
                p.nearest = g;
            }
        }
        p.in_module = p.distance_bins <= 1.0;
        if (!p.in_module) s.off_module_margin = std::max(s.off_module_margin, p.power / s.floor);
        if (p.power > s.floor) s.peaks.push_back(p);
    }
    return s;
}

AlmostPeriods almost_periods(const std::vector<double>& s, double spacing, double epsilon, double tau_max,
                             double tau_min) {
    if (!(spacing > 0.0) || !(tau_max > tau_min)) throw PreconditionError("almost_periods: bad lag range");
    const auto lmin = static_cast<std::size_t>(std::ceil(tau_min / spacing));
    const auto lmax = static_cast<std::size_t>(std::floor(tau_max / spacing));
    if (s.size() <= 2 * lmax) throw ConfigError("series of " + fmt(s.size() * spacing) +
                                                " time units is too short for almost periods up to " + fmt(tau_max));
    const std::size_t span = s.size() - lmax;
    AlmostPeriods out;
    bool in_run = false;
    double best = 0.0, best_tau = 0.0;
    auto close_run = [&]() {
        out.taus.push_back(best_tau);
        out.defects.push_back(best);
        in_run = false;
    };
    for (std::size_t lag = lmin; lag <= lmax; ++lag) {
        double e = 0.0;
        for (std::size_t i = 0; i < span && e < epsilon; ++i) e = std::max(e, std::abs(s[i + lag] - s[i]));
        if (e < epsilon) {
            if (!in_run || e < best) {
                best = e;
                best_tau = static_cast<double>(lag) * spacing;
            }
            in_run = true;
        } else if (in_run) {
            close_run();
        }
    }
    if (in_run) close_run();
    if (out.taus.empty()) {
        out.max_gap = kNaN;
        return out;
    }
    double prev = 0.0;
    for (double t : out.taus) {
        out.max_gap = std::max(out.max_gap, t - prev);
        prev = t;
    }
    return out;
}

ExperimentReport run_stability(const ExperimentSpec& spec) {
    Timer timer;
    const auto ref0 = prepare_reference(spec);
    const auto& model = spec.model;
    const auto& cfg = ref0.solver;
    ExperimentReport rep;
    rep.kind = ExperimentKind::stability;
    record_common(rep, ref0, spec.model.theta());

    const double theta = model.theta();
    const double horizon = spec.horizon > 0.0 ? spec.horizon : 100.0;
    const double period = base_period(model.forcing());
    Field ref = ref0.field;
    const double t0 = ref.time;
    const double xi0 = theta_interface(ref, theta);

    std::mt19937_64 rng(spec.seed);
    auto p = spec.perturbation;
    if (p.epsilon0_multiple > 0.0) {
        if (!ref0.constants)
            throw DerivationError("perturbation.epsilon0_multiple needs the squeeze constants: " + ref0.constants_error);
        p.amplitude = p.epsilon0_multiple * ref0.constants->epsilon0;
    }
    const double center =
        p.center + (p.jitter > 0.0 ? std::uniform_real_distribution<double>(-p.jitter, p.jitter)(rng) : 0.0);
    Field u = ref;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const double s = u.grid.x(i) - xi0 - center;
        u.values[i] = std::clamp(u.values[i] + p.amplitude * std::exp(-0.5 * s * s / (p.width * p.width)), 0.0, 1.0);
    }
    rep.quantities["perturbation_amplitude"] = p.amplitude;
    rep.quantities["perturbation_center"] = center;

    if (ref0.constants && p.amplitude > 0.0) {
        const auto gamma = build_gamma(*ref0.constants);
        const auto s = initial_sandwich(u, ref, xi0 + std::max(spec.interface_C0, 0.0), gamma, p.amplitude);
        rep.quantities["sandwich_zeta_minus"] = s.zeta_minus;
        rep.quantities["sandwich_zeta_plus"] = s.zeta_plus;
        rep.quantities["epsilon0"] = ref0.constants->epsilon0;
    }

    const double band = ref0.constants ? ref0.constants->L0 : 20.0;
    const std::size_t sample_steps = std::max<std::size_t>(1, steps_for(spec.sample_every, cfg.dt));
    const std::size_t cycle_steps = std::max<std::size_t>(1, steps_for(period, cfg.dt));
    const std::size_t total = steps_for(horizon, cfg.dt);

    std::vector<double> dt_t, dist, shift, gt, gplus, gminus, gap;
    auto measure_gap = [&](double t) {
        double zp = kNaN, zm = kNaN;
        try {
            zp = tightest_shift(u, ref, 0.0, ShiftSide::upper, 0.0, 1e-12, band);
            zm = tightest_shift(u, ref, 0.0, ShiftSide::lower, 0.0, 1e-12, band);
        } catch (const RangeError& e) {
            rep.notes.push_back("tightest shift at t = " + fmt(t) + ": " + e.what());
        }
        gt.push_back(t - t0);
        gplus.push_back(zp);
        gminus.push_back(zm);
        gap.push_back(zp - zm);
    };
    auto measure = [&](double t) {
        const auto a = aligned_distance(u, ref);
        dt_t.push_back(t - t0);
        dist.push_back(a.distance);
        shift.push_back(a.shift);
    };
    measure(t0);
    measure_gap(t0);
    std::size_t done = 0;
    while (done < total) {
        const std::size_t next_sample = (done / sample_steps + 1) * sample_steps;
        const std::size_t next_cycle = (done / cycle_steps + 1) * cycle_steps;
        const std::size_t next = std::min({next_sample, next_cycle, total});
        const double t = t0 + static_cast<double>(next) * cfg.dt;
        u = advance_steps(std::move(u), model, cfg, next - done, theta, t);
        ref = advance_steps(std::move(ref), model, cfg, next - done, theta, t);
        done = next;
        if (done % sample_steps == 0 || done == total) measure(t);
        if (done % cycle_steps == 0) measure_gap(t);
    }

    rep.series["distance.t"] = dt_t;
    rep.series["distance.value"] = dist;
    rep.series["distance.shift"] = shift;
    std::vector<double> ratio(gap.size(), kNaN);
    for (std::size_t n = 1; n < gap.size(); ++n) ratio[n] = gap[n] / gap[n - 1];
    rep.series["gap.t"] = gt;
    rep.series["gap.zeta_plus"] = gplus;
    rep.series["gap.zeta_minus"] = gminus;
    rep.series["gap.value"] = gap;
    rep.series["gap.ratio"] = ratio;

    const double final_distance = dist.back();
    rep.quantities["initial_distance"] = dist.front();
    rep.quantities["final_distance"] = final_distance;
    rep.quantities["final_shift"] = shift.back();
    rep.checks.push_back(judge("final_distance", final_distance, "<", spec.tol.final_distance));

    if (dist.front() < 1e-10) {
        rep.flags.push_back("trivially-stable");
        rep.notes.push_back("initial aligned distance " + fmt(dist.front()) + " is at discretization noise; r fit skipped");
    } else {
        std::vector<double> ft, fy;
        for (std::size_t k = 0; k < dt_t.size(); ++k)
            if (dt_t[k] >= spec.fit_start && dist[k] > spec.fit_floor) {
                ft.push_back(dt_t[k]);
                fy.push_back(std::log(dist[k]));
            }
        if (ft.size() < 3) {
            rep.flags.push_back("inconclusive");
            rep.notes.push_back("fewer than 3 distances above the fit floor after t0 + " + fmt(spec.fit_start));
        } else {
            const auto fit = numerics::fit_line(ft, fy);
            rep.quantities["decay_rate"] = -fit.slope;
            rep.quantities["decay_rate_stderr"] = fit.slope_stderr;
            rep.quantities["decay_prefactor"] = std::exp(fit.intercept);
            rep.quantities["fit_r_squared"] = fit.r_squared;
            rep.quantities["fit_window_begin"] = ft.front();
            rep.quantities["fit_window_end"] = ft.back();
            rep.quantities["fit_samples"] = static_cast<double>(ft.size());
            rep.checks.push_back(judge("decay_rate", -fit.slope, ">", 0.0));
            rep.checks.push_back(judge("fit_r_squared", fit.r_squared, ">=", spec.tol.r_squared));
        }
        std::size_t judged = 0, contracting = 0;
        std::vector<double> valid;
        for (std::size_t n = 1; n < ratio.size(); ++n) {
            if (!std::isfinite(ratio[n]) || !(gap[n - 1] > 0.0)) continue;
            ++judged;
            if (ratio[n] < 1.0) ++contracting;
            valid.push_back(ratio[n]);
        }
        if (judged == 0) {
            rep.flags.push_back("inconclusive");
            rep.notes.push_back("no consecutive tightest-shift gaps to compare");
        } else {
            const double frac = static_cast<double>(contracting) / static_cast<double>(judged);
            rep.quantities["gap_ratio_median"] = numerics::median(valid);
            rep.quantities["gap_contracting_fraction"] = frac;
            rep.quantities["gap_cycles"] = static_cast<double>(judged);
            rep.checks.push_back(judge("gap_contracting_fraction", frac, ">=", spec.tol.gap_fraction));
        }
    }
    timer.finish(rep, spec, cfg);
    return rep;
}

ExperimentReport run_uniqueness(const ExperimentSpec& spec) {
    Timer timer;
    const auto ref0 = prepare_reference(spec);
    const auto& model = spec.model;
    const auto& cfg = ref0.solver;
    ExperimentReport rep;
    rep.kind = ExperimentKind::uniqueness;
    record_common(rep, ref0, spec.model.theta());

    const double theta = model.theta();
    const double horizon = spec.horizon > 0.0 ? spec.horizon : 200.0 / ref0.c_B;
    rep.quantities["horizon"] = horizon;
    const auto grid = Grid1D::centered(0.0, cfg.window_width, cfg.h);
    Field a = Field::sample(grid, [&](double x) { return spec.first(x); });
    Field b = Field::sample(grid, [&](double x) { return spec.second(x); });

    const std::size_t total = steps_for(horizon, cfg.dt);
    const std::size_t chunk = std::max<std::size_t>(1, total / 200);
    std::vector<double> ts, ds, zs;
    double xa0 = kNaN, xb0 = kNaN;
    try {
        xa0 = theta_interface(a, theta);
        xb0 = theta_interface(b, theta);
        std::size_t done = 0;
        while (done < total) {
            const std::size_t next = std::min(total, done + chunk);
            const double t = static_cast<double>(next) * cfg.dt;
            a = advance_steps(std::move(a), model, cfg, next - done, theta, t);
            b = advance_steps(std::move(b), model, cfg, next - done, theta, t);
            done = next;
            const double xa = theta_interface(a, theta), xb = theta_interface(b, theta);
            ts.push_back(t);
            ds.push_back(profile_distance(a, xa, b, xb, spec.compare_half_width));
            zs.push_back(xb - xa);
        }
    } catch (const Error& e) {
        rep.flags.push_back("inconclusive");
        rep.notes.push_back(std::string("run failed: ") + e.what());
        timer.finish(rep, spec, cfg);
        return rep;
    }
    rep.series["distance.t"] = ts;
    rep.series["distance.value"] = ds;
    rep.series["distance.shift"] = zs;

    const double moved_a = theta_interface(a, theta) - xa0, moved_b = theta_interface(b, theta) - xb0;
    rep.quantities["displacement_first"] = moved_a;
    rep.quantities["displacement_second"] = moved_b;
    if (moved_a < 0.5 * ref0.c_B * horizon || moved_b < 0.5 * ref0.c_B * horizon) {
        rep.flags.push_back("inconclusive");
        rep.notes.push_back("a front advanced less than c_B/2 times the horizon");
    }
    // Largest rise of the distance over the last half, relative to the running minimum.
    double run_min = std::numeric_limits<double>::infinity(), rise = 0.0;
    for (std::size_t k = ds.size() / 2; k < ds.size(); ++k) {
        run_min = std::min(run_min, ds[k]);
        rise = std::max(rise, ds[k] - run_min);
    }
    rep.quantities["late_distance_rise"] = rise;
    rep.quantities["aligned_distance"] = ds.back();
    rep.quantities["relative_shift"] = zs.back();
    rep.checks.push_back(judge("aligned_distance", ds.back(), "<", spec.tol.uniqueness_distance));
    timer.finish(rep, spec, cfg);
    return rep;
}

ExperimentReport run_monotonicity_decay(const ExperimentSpec& spec) {
    Timer timer;
    const auto ref0 = prepare_reference(spec);
    const auto& model = spec.model;
    const auto& cfg = ref0.solver;
    ExperimentReport rep;
    rep.kind = ExperimentKind::monotonicity;
    record_common(rep, ref0, spec.model.theta());
    const double theta = model.theta();

    const std::size_t every = std::max<std::size_t>(1, steps_for(spec.monotonicity_spacing, cfg.dt));
    const std::size_t wanted = std::max<std::size_t>(1, spec.monotonicity_snapshots);
    std::vector<Field> snaps;
    std::vector<std::size_t> snap_index;
    std::size_t count = 0;
    EvolveOptions o;
    o.track_level = theta;
    o.extra_levels = spec.levels;
    o.observer = [&](const Field& f) {
        if (count % every == 0 && snaps.size() < wanted) {
            snaps.push_back(f);
            snap_index.push_back(count);
        }
        ++count;
    };
    const double t0 = ref0.field.time;
    const double extra = spec.horizon > 0.0 ? spec.horizon : 0.0;
    auto run = evolve(ref0.field, model, cfg, t0 + static_cast<double>(wanted) * spec.monotonicity_spacing + extra, o);

    const auto offsets = measure_propagation_offsets(run.trace.times, run.trace.xi, ref0.c_B, ref0.c_I);
    ModifiedInterfaceOptions mo{ref0.c_B, std::max(spec.interface_C0, 1.3 * ref0.c_I * offsets.t_I),
                                spec.interface_delta, offsets.t_I, ref0.c_I};
    const auto mi = modified_interface(run.trace.times, run.trace.xi, mo);
    run.trace.xi_tilde = mi.xi_tilde;
    rep.quantities["d_max"] = mi.d_max;
    rep.quantities["d_min"] = mi.d_min;
    rep.quantities["xi_tilde_slope_min"] = mi.slope_min;
    rep.quantities["xi_tilde_slope_max"] = mi.slope_max;
    rep.quantities["C_max"] = mi.C_max;

    // Monotonicity census over interior node pairs; pairs saturated at 1 are skipped.
    std::size_t violations = 0, saturated = 0, snaps_with = 0;
    double worst = 0.0;
    std::vector<double> per_snapshot;
    for (const auto& f : snaps) {
        std::size_t v = 0;
        for (std::size_t i = 1; i + 2 < f.values.size(); ++i) {
            const double lhs = f.values[i], rhs = f.values[i + 1];
            if (lhs >= 1.0 - 1e-12 && rhs >= 1.0 - 1e-12) {
                ++saturated;
                continue;
            }
            if (rhs >= lhs) {
                ++v;
                worst = std::max(worst, rhs - lhs);
            }
        }
        violations += v;
        if (v) ++snaps_with;
        per_snapshot.push_back(static_cast<double>(v));
    }
    rep.quantities["snapshots"] = static_cast<double>(snaps.size());
    rep.quantities["monotonicity_violations"] = static_cast<double>(violations);
    rep.quantities["snapshots_with_violations"] = static_cast<double>(snaps_with);
    rep.quantities["largest_increase"] = worst;
    rep.quantities["saturated_pairs"] = static_cast<double>(saturated);
    rep.checks.push_back(judge("monotonicity_violations", static_cast<double>(violations), "<=", 0.0));
    if (violations > 0) {
        rep.flags.push_back("inconclusive");
        rep.notes.push_back("monotonicity violations in " + std::to_string(snaps_with) + " of " +
                            std::to_string(snaps.size()) + " snapshots; the transient may not have elapsed");
    }

    // Tail rate in the theta frame.
    double rate_min = std::numeric_limits<double>::infinity(), report_rate = rate_min;
    std::vector<double> st, rates, errs;
    for (const auto& f : snaps) {
        const double xi = theta_interface(f, theta);
        const auto prof = extract_profile(f, xi, spec.tail_hi + f.grid.spacing);
        const auto fit = fit_exponential_tail(prof, spec.tail_lo, spec.tail_hi);
        rate_min = std::min(rate_min, fit.rate);
        report_rate = std::min(report_rate, fit.rate - fit.rate_stderr);
        st.push_back(f.time - t0);
        rates.push_back(fit.rate);
        errs.push_back(fit.rate_stderr);
    }
    rep.series["tail.t"] = st;
    rep.series["tail.rate"] = rates;
    rep.series["tail.stderr"] = errs;
    rep.series["monotonicity.violations"] = per_snapshot;
    rep.series["monotonicity.t"] = st;
    rep.quantities["tail_rate"] = rate_min;
    rep.quantities["tail_rate_report"] = report_rate;
    rep.checks.push_back(judge("tail_rate_report", report_rate, ">=", ref0.c_B / 2.0 - spec.tol.tail_rate_slack));

    // Tail bound psi <= theta exp(-c x) for x >= 0, in the frame xi_tilde + d_max and in the theta frame.
    auto bound_census = [&](bool hat_frame, double& max_ratio) {
        std::size_t bad = 0;
        max_ratio = 0.0;
        for (std::size_t j = 0; j < snaps.size(); ++j) {
            const auto& f = snaps[j];
            const double origin = hat_frame ? mi.xi_tilde[snap_index[j]] + mi.d_max : theta_interface(f, theta);
            for (std::size_t i = 0; i < f.values.size(); ++i) {
                const double x = f.grid.x(i) - origin;
                if (x < 0.0 || x > spec.tail_check) continue;
                const double b = theta * std::exp(-report_rate * x);
                max_ratio = std::max(max_ratio, f.values[i] / b);
                if (f.values[i] > b) ++bad;
            }
        }
        return bad;
    };
    double ratio_hat = 0.0, ratio_theta = 0.0;
    const std::size_t bad_hat = bound_census(true, ratio_hat);
    const std::size_t bad_theta = bound_census(false, ratio_theta);
    rep.quantities["tail_bound_violations"] = static_cast<double>(bad_hat);
    rep.quantities["tail_bound_max_ratio"] = ratio_hat;
    rep.quantities["tail_bound_violations_theta_frame"] = static_cast<double>(bad_theta);
    rep.quantities["tail_bound_max_ratio_theta_frame"] = ratio_theta;
    rep.checks.push_back(judge("tail_bound_violations", static_cast<double>(bad_hat), "<=", 0.0));

    rep.profile = extract_profile(snaps.back(), theta_interface(snaps.back(), theta), spec.tail_check);
    rep.trace = std::move(run.trace);
    timer.finish(rep, spec, cfg);
    return rep;
}

ExperimentReport run_recurrence(const ExperimentSpec& spec) {
    Timer timer;
    const auto& model = spec.model;
    const auto& forcing = model.forcing();
    const double pbase = base_period(forcing);
    const double horizon = spec.horizon > 0.0
                               ? spec.horizon
                               : (forcing.kind() == ForcingKind::periodic ? 60.0 : 400.0) * pbase;
    if (horizon < 50.0 * pbase)
        throw ConfigError("recurrence horizon " + fmt(horizon) + " is shorter than 50 base periods (" +
                          fmt(50.0 * pbase) + ")");
    const auto freqs = forcing_frequencies(forcing);
    const auto module = frequency_module(freqs, spec.spectral.module_order);
    double min_sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < module.size(); ++i) min_sep = std::min(min_sep, module[i] - module[i - 1]);
    if (std::isfinite(min_sep) && 1.0 / horizon > 0.5 * min_sep)
        throw ConfigError("recurrence horizon " + fmt(horizon) + " gives bin width " + fmt(1.0 / horizon) +
                          ", more than half the module spacing " + fmt(min_sep));

    const auto ref0 = prepare_reference(spec);
    const auto& cfg = ref0.solver;
    ExperimentReport rep;
    rep.kind = ExperimentKind::recurrence;
    record_common(rep, ref0, spec.model.theta());
    const double theta = model.theta();
    const double t0 = ref0.field.time;

    const auto period = forcing.common_period();
    const double P = period ? *period : 1.0;
    const std::size_t lag = std::max<std::size_t>(1, steps_for(P, cfg.dt));
    std::vector<Field> per_period;
    std::size_t count = 0;
    EvolveOptions o;
    o.track_level = theta;
    o.extra_levels = spec.levels;
    o.observer = [&](const Field& f) {
        if (count++ % lag == 0) per_period.push_back(f);
    };
    auto run = evolve(ref0.field, model, cfg, t0 + horizon, o);
    const auto& speed = run.trace.speed_formula;
    if (std::any_of(speed.begin(), speed.end(), [](double v) { return !std::isfinite(v); })) {
        rep.flags.push_back("inconclusive");
        rep.notes.push_back("speed formula undefined at some samples (flat interface)");
        rep.trace = std::move(run.trace);
        timer.finish(rep, spec, cfg);
        return rep;
    }
    rep.quantities["horizon"] = horizon;
    rep.quantities["speed_mean"] = std::accumulate(speed.begin(), speed.end(), 0.0) / static_cast<double>(speed.size());
    rep.quantities["speed_min"] = *std::min_element(speed.begin(), speed.end());
    rep.quantities["speed_max"] = *std::max_element(speed.begin(), speed.end());

    if (period || forcing.kind() == ForcingKind::constant) {
        double defect = 0.0;
        for (std::size_t i = 0; i + lag < speed.size(); ++i) defect = std::max(defect, std::abs(speed[i + lag] - speed[i]));
        double pdefect = 0.0;
        for (std::size_t k = 0; k + 1 < per_period.size(); ++k) {
            const auto& a = per_period[k];
            const auto& b = per_period[k + 1];
            pdefect = std::max(pdefect, profile_distance(a, theta_interface(a, theta), b, theta_interface(b, theta),
                                                         spec.compare_half_width));
        }
        rep.quantities["period"] = P;
        rep.quantities["speed_period_defect"] = defect;
        rep.quantities["profile_period_defect"] = pdefect;
        rep.checks.push_back(judge("speed_period_defect", defect, "<", spec.tol.recurrence));
        rep.checks.push_back(judge("profile_period_defect", pdefect, "<", spec.tol.recurrence));
    }

    auto spectrum = periodogram(speed, cfg.dt, module, spec.spectral);
    std::size_t off = 0;
    for (const auto& p : spectrum.peaks)
        if (!p.in_module) ++off;
    rep.quantities["spectral_peaks"] = static_cast<double>(spectrum.peaks.size());
    rep.quantities["off_module_peaks"] = static_cast<double>(off);
    rep.quantities["spectral_floor"] = spectrum.floor;
    rep.quantities["spectral_floor_statistical"] = spectrum.floor_statistical;
    rep.quantities["bin_width"] = spectrum.bin_width;
    rep.quantities["off_module_margin"] = spectrum.off_module_margin;
    const bool judge_spectrum = forcing.kind() != ForcingKind::periodic;
    if (judge_spectrum) rep.checks.push_back(judge("off_module_peaks", static_cast<double>(off), "<=", 0.0));

    const double tau_max = std::min(spec.spectral.almost_period_max, horizon / 2.0);
    const auto ap = almost_periods(speed, cfg.dt, spec.spectral.almost_period_epsilon, tau_max);
    rep.series["almost_periods.tau"] = ap.taus;
    rep.series["almost_periods.defect"] = ap.defects;
    rep.quantities["almost_period_epsilon"] = spec.spectral.almost_period_epsilon;
    rep.quantities["almost_period_count"] = static_cast<double>(ap.taus.size());
    rep.quantities["almost_period_max_gap"] = ap.max_gap;

    rep.spectrum = std::move(spectrum);
    rep.trace = std::move(run.trace);
    timer.finish(rep, spec, cfg);
    return rep;
}

ExperimentReport run_average_speed(const ExperimentSpec& spec) {
    Timer timer;
    const double horizon = spec.horizon > 0.0 ? spec.horizon : 16.0 * spec.speed_base_horizon;
    if (!(spec.speed_base_horizon > 0.0)) throw ConfigError("speed_base_horizon must be positive");
    const int doublings = static_cast<int>(std::floor(std::log2(horizon / spec.speed_base_horizon) + 1e-9));
    if (doublings < 3)
        throw ConfigError("horizon " + fmt(horizon) + " allows " + std::to_string(std::max(doublings, 0)) +
                          " doublings of " + fmt(spec.speed_base_horizon) + "; at least 3 are needed");

    const auto ref0 = prepare_reference(spec);
    const auto& model = spec.model;
    const auto& cfg = ref0.solver;
    ExperimentReport rep;
    rep.kind = ExperimentKind::average_speed;
    record_common(rep, ref0, spec.model.theta());
    const double theta = model.theta();
    const double t0 = ref0.field.time;

    EvolveOptions o;
    o.track_level = theta;
    o.extra_levels = spec.levels;
    o.speed_formula = false;
    const double t_end = t0 + spec.speed_base_horizon * std::pow(2.0, doublings);
    auto run = evolve(ref0.field, model, cfg, t_end, o);
    const double xi0 = run.trace.xi.front();

    std::vector<double> horizons, averages, increments;
    for (int k = 0; k <= doublings; ++k) {
        const double T = spec.speed_base_horizon * std::pow(2.0, k);
        const std::size_t idx = steps_for(T, cfg.dt);
        if (idx >= run.trace.size()) throw SolverError("trace shorter than the doubling horizon " + fmt(T));
        const double T_exact = run.trace.times[idx] - run.trace.times.front();
        horizons.push_back(T_exact);
        averages.push_back((run.trace.xi[idx] - xi0) / T_exact);
        increments.push_back(k == 0 ? kNaN : std::abs(averages[k] - averages[k - 1]));
    }
    double cauchy = 0.0;
    for (std::size_t k = 1; k < increments.size(); ++k) cauchy = std::max(cauchy, increments[k]);
    rep.series["average.horizon"] = horizons;
    rep.series["average.speed"] = averages;
    rep.series["average.increment"] = increments;
    rep.quantities["average_speed"] = averages.back();
    rep.quantities["cauchy_increment"] = cauchy;
    rep.quantities["doublings"] = doublings;
    rep.checks.push_back(judge("cauchy_increment", cauchy, "<", spec.tol.cauchy));
    rep.checks.push_back(judge("average_speed", averages.back(), "in", ref0.c_B - spec.tol.speed_bound_slack,
                               ref0.c_I + spec.tol.speed_bound_slack));
    run.trace.compute_fd_speed();
    rep.trace = std::move(run.trace);
    timer.finish(rep, spec, cfg);
    return rep;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    switch (spec.kind) {
        case ExperimentKind::stability: return run_stability(spec);
        case ExperimentKind::uniqueness: return run_uniqueness(spec);
        case ExperimentKind::monotonicity: return run_monotonicity_decay(spec);
        case ExperimentKind::recurrence: return run_recurrence(spec);
        case ExperimentKind::average_speed: return run_average_speed(spec);
    }
    throw ConfigError("unknown experiment kind");
}

}  // namespace ignition
