// ignition-lab: command-line front end for the experiment drivers.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ignition/cli_io.hpp"
#include "ignition/errors.hpp"
#include "ignition/homogeneous_waves.hpp"

namespace fs = std::filesystem;
using namespace ignition;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> h, dt, horizon;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config, "run configuration (JSON)")->check(CLI::ExistingFile);
    app->add_option("--out", f.out, "output directory (overrides output)");
    app->add_option("--seed", f.seed, "random seed (overrides seed)");
    app->add_option("--h", f.h, "grid spacing (overrides solver.h)");
    app->add_option("--dt", f.dt, "time step (overrides solver.dt)");
    app->add_option("--horizon", f.horizon, "horizon (overrides experiment.horizon)");
}

RunConfig load(const CommonFlags& f, std::optional<std::string> kind = std::nullopt) {
    ConfigOverrides o{f.h, f.dt, f.horizon, f.seed, f.out, std::move(kind)};
    return f.config.empty() ? default_config(o) : load_config(f.config, o);
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Provenance provenance(const RunConfig& cfg, const std::string& started,
                      std::chrono::steady_clock::time_point t0) {
    Provenance p;
    p.config_hash = config_hash(cfg);
    p.tool_version = tool_version();
    p.h = cfg.solver.h;
    p.dt = cfg.solver.dt;
    p.window_width = cfg.solver.window_width;
    p.seed = cfg.seed;
    p.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    p.started = started;
    p.finished = utc_now();
    return p;
}

void print_checks(const ExperimentReport& r) {
    for (const auto& c : r.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << c.value << " " << c.relation << " ";
        if (c.relation == "in") std::cout << "[" << c.tolerance << ", " << c.tolerance_hi << "]";
        else std::cout << c.tolerance;
        std::cout << "\n";
    }
    for (const auto& f : r.flags) std::cout << "flag: " << f << "\n";
    for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
}

int cmd_validate(const CommonFlags& f) {
    const auto cfg = load(f);
    const auto model = build_model(cfg.model, cfg.seed);
    const auto hyp = validate_hypotheses(model);
    const json doc{{"config_hash", config_hash(cfg)}, {"config", echo_config(cfg)}, {"hypotheses", to_json(hyp)}};
    std::cout << doc.dump(2) << "\n";
    if (f.out) {
        fs::create_directories(*f.out);
        std::ofstream(fs::path(*f.out) / "validation.json") << doc.dump(2) << "\n";
        Provenance p;
        p.config_hash = config_hash(cfg);
        p.tool_version = tool_version();
        p.started = p.finished = utc_now();
        write_manifest(*f.out, {"validation.json"}, p, echo_config(cfg));
    }
    return hyp.all_passed() ? 0 : 2;
}

int cmd_wave(const CommonFlags& f) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto started = utc_now();
    const auto cfg = load(f);
    const auto vm = ValidatedModel::create(build_model(cfg.model, cfg.seed));
    const auto fB = bistable_extension(vm);
    const auto fI = floored_ignition(vm);
    const double theta = vm.model().theta();
    const double floor = cfg.experiment.theta_floor > 0.0 ? cfg.experiment.theta_floor : theta / 4.0;
    const auto wB = solve_bistable_wave([&](double u) { return fB(u); }, 0.5);
    const auto wI = solve_ignition_floor_wave([&](double u) { return fI(u); }, theta, floor);
    const auto wS = solve_ignition_wave([&](double u) { return fI(u); }, theta);

    const fs::path dir = cfg.output;
    fs::create_directories(dir);
    write_profile_csv(wB, (dir / "wave_bistable.csv").string());
    write_profile_csv(wI, (dir / "wave_floor.csv").string());
    write_profile_csv(wS, (dir / "wave_upper.csv").string());
    const json doc{{"c_B", wB.speed},
                   {"c_I", wI.speed},
                   {"c_upper", wS.speed},
                   {"theta", theta},
                   {"theta_floor", floor},
                   {"bistable_residual", wB.shooting_residual},
                   {"floor_residual", wI.shooting_residual},
                   {"hypotheses", to_json(vm.report())}};
    std::ofstream(dir / "wave.json") << doc.dump(2) << "\n";
    write_manifest(dir.string(), {"wave.json", "wave_bistable.csv", "wave_floor.csv", "wave_upper.csv"},
                   provenance(cfg, started, t0), echo_config(cfg));
    std::cout << "c_B = " << wB.speed << "\nc_I = " << wI.speed << "\nc_upper = " << wS.speed << "\n";
    return 0;
}

int cmd_evolve(const CommonFlags& f) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto started = utc_now();
    const auto cfg = load(f);
    auto spec = build_spec(cfg);
    const auto vm = ValidatedModel::create(spec.model);
    const auto& model = vm.model();
    const auto fB = bistable_extension(vm);
    const double c_B = solve_bistable_wave([&](double u) { return fB(u); }, 0.5).speed;
    const double horizon = spec.horizon > 0.0 ? spec.horizon : std::ceil(40.0 / c_B) + 20.0;

    SolverConfig s = spec.solver;
    s.max_lip = std::max(s.max_lip, model.lipschitz());
    Field u0 = Field::sample(Grid1D::centered(0.0, s.window_width, s.h), spec.first);
    EvolveOptions o;
    o.track_level = model.theta();
    o.extra_levels = spec.levels;
    o.record_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.sample_every / s.dt / 10.0)));
    auto run = evolve(u0, model, s, horizon, o);

    ExperimentReport rep;
    rep.kind = ExperimentKind::average_speed;
    rep.hypotheses = vm.report();
    rep.quantities["theta"] = model.theta();
    rep.quantities["c_B"] = c_B;
    rep.quantities["horizon"] = horizon;
    rep.quantities["steps"] = static_cast<double>(run.steps);
    rep.quantities["recenterings"] = static_cast<double>(run.recenterings);
    rep.quantities["edge_drift"] = run.edge_drift;
    rep.quantities["mean_speed"] = (run.trace.xi.back() - run.trace.xi.front()) / horizon;
    try {
        ModifiedInterfaceOptions mo{c_B, spec.interface_C0, spec.interface_delta, 0.0, 0.0};
        const auto mi = modified_interface(run.trace.times, run.trace.xi, mo);
        run.trace.xi_tilde.assign(run.trace.times.size(), std::nan(""));
        for (std::size_t i = 0; i < mi.times.size(); ++i) run.trace.xi_tilde[run.trace.size() - mi.times.size() + i] = mi.xi_tilde[i];
        rep.quantities["d_max"] = mi.d_max;
        rep.quantities["d_min"] = mi.d_min;
        rep.quantities["slope_min"] = mi.slope_min;
        rep.quantities["slope_max"] = mi.slope_max;
        rep.quantities["C_max"] = mi.C_max;
        rep.quantities["hitting_times"] = static_cast<double>(mi.hitting_times.size());
    } catch (const Error& e) {
        rep.notes.push_back(std::string("modified interface unavailable: ") + e.what());
    }
    rep.profile = extract_profile(run.field, run.trace.xi.back(), std::min(30.0, 0.4 * s.window_width));
    rep.trace = std::move(run.trace);
    rep.provenance = provenance(cfg, started, t0);
    emit_report(rep, cfg.output, echo_config(cfg));
    for (const auto& [k, v] : rep.quantities) std::cout << k << " = " << v << "\n";
    for (const auto& n : rep.notes) std::cout << "note: " << n << "\n";
    return 0;
}

int cmd_experiment(const CommonFlags& f, const std::string& kind) {
    const auto cfg = load(f, kind);
    const auto spec = build_spec(cfg);
    const auto report = run_experiment(spec);
    const auto manifest = emit_report(report, cfg.output, echo_config(cfg));
    print_checks(report);
    std::cout << (report.passed() ? "passed" : "failed") << " (" << manifest.files.size() << " files in "
              << cfg.output << ")\n";
    return report.passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forced ignition fronts: waves, evolution and long-time experiments"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print this help and exit");
    app.set_version_flag("--version", tool_version());
    CommonFlags flags;
    std::string chosen;
    auto sub = [&](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        s->set_help_flag("--help", "print this help and exit");
        add_common(s, flags);
        s->callback([&chosen, name] { chosen = name; });
        return s;
    };
    sub("validate", "check the model hypotheses and echo the full config");
    sub("wave", "homogeneous comparison waves (bistable extension, floored ignition)");
    sub("evolve", "evolve the first datum and write its interface trace");
    sub("stability", "perturbed vs reference front");
    sub("uniqueness", "two distinct wave-like data converge to one profile");
    sub("monotonicity", "interior monotonicity and exponential tail bound");
    sub("recurrence", "recurrence and spectrum of the interface speed");
    sub("speed", "average propagation speed over doubling horizons");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        if (chosen == "validate") return cmd_validate(flags);
        if (chosen == "wave") return cmd_wave(flags);
        if (chosen == "evolve") return cmd_evolve(flags);
        return cmd_experiment(flags, chosen);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
