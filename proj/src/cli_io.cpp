#include "ignition/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "ignition/errors.hpp"

namespace ignition {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

namespace {

// ---------------------------------------------------------------- reading

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

class Reader {
public:
    Reader(const json& node, std::string path, std::vector<std::string> allowed)
        : node_(node), path_(std::move(path)) {
        if (!node_.is_object())
            throw ConfigError((path_.empty() ? std::string("config") : path_) + ": expected an object");
        for (const auto& [key, value] : node_.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
            std::string msg = "unknown key \"" + join(path_, key) + "\"";
            std::string best;
            std::size_t best_d = std::numeric_limits<std::size_t>::max();
            for (const auto& a : allowed) {
                const auto d = edit_distance(key, a);
                if (d < best_d) best_d = d, best = a;
            }
            if (!best.empty() && best_d <= std::max<std::size_t>(2, key.size() / 3))
                msg += " (did you mean \"" + join(path_, best) + "\"?)";
            throw ConfigError(msg);
        }
    }

    bool has(const std::string& key) const { return node_.contains(key) && !node_.at(key).is_null(); }
    std::string path(const std::string& key) const { return join(path_, key); }

    void number(const std::string& key, double& out) const {
        if (!has(key)) return;
        const auto& v = node_.at(key);
        if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw ConfigError(path(key) + ": must be finite");
    }
    template <class Int>
    void integer(const std::string& key, Int& out) const {
        if (!has(key)) return;
        const auto& v = node_.at(key);
        if (!v.is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
        if constexpr (std::is_unsigned_v<Int>) {
            if (v.is_number_unsigned()) {
                out = static_cast<Int>(v.get<std::uint64_t>());
                return;
            }
            if (v.get<std::int64_t>() < 0) throw ConfigError(path(key) + ": must be nonnegative");
        }
        out = static_cast<Int>(v.get<std::int64_t>());
    }
    void string(const std::string& key, std::string& out) const {
        if (!has(key)) return;
        const auto& v = node_.at(key);
        if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
        out = v.get<std::string>();
    }
    void numbers(const std::string& key, std::vector<double>& out) const {
        if (!has(key)) return;
        const auto& v = node_.at(key);
        if (!v.is_array()) throw ConfigError(path(key) + ": expected an array of numbers");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(path(key) + "[" + std::to_string(i) + "]: expected a number");
            out.push_back(v[i].get<double>());
        }
    }
    Reader child(const std::string& key, std::vector<std::string> allowed) const {
        static const json empty = json::object();
        return Reader(has(key) ? node_.at(key) : empty, path(key), std::move(allowed));
    }
    const json& raw(const std::string& key) const { return node_.at(key); }

private:
    const json& node_;
    std::string path_;
};

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path + ": " + what);
}

std::string scheme_name(TimeScheme s) { return s == TimeScheme::imex_euler ? "imex_euler" : "imex_trapezoid"; }
std::string datum_name(DatumKind k) { return k == DatumKind::step ? "step" : "logistic"; }

void read_datum(const Reader& parent, const std::string& key, InitialDatum& d) {
    const auto r = parent.child(key, {"kind", "offset", "width"});
    std::string kind = datum_name(d.kind);
    r.string("kind", kind);
    if (kind == "step") d.kind = DatumKind::step;
    else if (kind == "logistic") d.kind = DatumKind::logistic;
    else throw ConfigError(r.path("kind") + ": expected \"step\" or \"logistic\", got \"" + kind + "\"");
    r.number("offset", d.offset);
    r.number("width", d.width);
    require(d.width > 0.0, r.path("width"), "must be positive");
}

json datum_json(const InitialDatum& d) {
    return {{"kind", datum_name(d.kind)}, {"offset", d.offset}, {"width", d.width}};
}

void read_model(const Reader& root, ModelConfig& m) {
    const auto r = root.child("model", {"theta", "theta_star", "shape", "beta", "forcing"});
    r.number("theta", m.theta);
    r.number("theta_star", m.theta_star);
    r.string("shape", m.shape);
    if (r.has("beta")) {
        double b = 0.0;
        r.number("beta", b);
        require(b > 0.0, r.path("beta"), "must be positive");
        m.beta = b;
    }
    require(m.theta > 0.0 && m.theta < 1.0, r.path("theta"), "must lie in (0, 1)");
    require(m.theta_star > m.theta && m.theta_star < 1.0, r.path("theta_star"), "must lie in (theta, 1)");
    require(m.shape == "quadratic_ignition", r.path("shape"),
            "unsupported shape \"" + m.shape + "\" (expected \"quadratic_ignition\")");

    const auto f = r.child("forcing", {"kind", "base_level", "components"});
    std::string kind = to_string(m.forcing_kind);
    f.string("kind", kind);
    try {
        m.forcing_kind = forcing_kind_from_string(kind);
    } catch (const Error&) {
        throw ConfigError(f.path("kind") +
                          ": expected one of constant, periodic, quasi_periodic, random_phase_sum; got \"" + kind +
                          "\"");
    }
    f.number("base_level", m.base_level);
    require(m.base_level > 0.0, f.path("base_level"), "must be positive");
    if (f.has("components")) {
        const auto& arr = f.raw("components");
        require(arr.is_array(), f.path("components"), "expected an array");
        m.components.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const Reader c(arr[i], f.path("components") + "[" + std::to_string(i) + "]",
                           {"frequency", "amplitude", "phase"});
            ForcingComponent comp{0.0, 0.0, 0.0};
            c.number("frequency", comp.frequency);
            c.number("amplitude", comp.amplitude);
            c.number("phase", comp.phase);
            require(comp.frequency > 0.0, c.path("frequency"), "must be positive");
            m.components.push_back(comp);
        }
    }
    if (m.forcing_kind == ForcingKind::constant) m.components.clear();
    else require(!m.components.empty(), f.path("components"), "needs at least one component");
    double amp = 0.0;
    for (const auto& c : m.components) amp += std::abs(c.amplitude);
    require(m.base_level - amp > 0.0, f.path("components"),
            "sum of |amplitude| must stay below base_level so that g stays positive");
}

void read_solver(const Reader& root, SolverConfig& s, bool& dt_given) {
    const auto r = root.child("solver", {"h", "dt", "window_width", "recenter_threshold", "scheme", "edge_margin"});
    r.number("h", s.h);
    dt_given = r.has("dt");
    r.number("dt", s.dt);
    r.number("window_width", s.window_width);
    r.integer("recenter_threshold", s.recenter_threshold);
    r.integer("edge_margin", s.edge_margin);
    std::string scheme = scheme_name(s.scheme);
    r.string("scheme", scheme);
    if (scheme == "imex_euler") s.scheme = TimeScheme::imex_euler;
    else if (scheme == "imex_trapezoid") s.scheme = TimeScheme::imex_trapezoid;
    else throw ConfigError(r.path("scheme") + ": expected \"imex_euler\" or \"imex_trapezoid\", got \"" + scheme + "\"");
    require(s.h > 0.0, r.path("h"), "must be positive");
    require(!dt_given || s.dt > 0.0, r.path("dt"), "must be positive");
    require(s.window_width > 0.0, r.path("window_width"), "must be positive");
    require(s.recenter_threshold >= 1, r.path("recenter_threshold"), "must be at least 1");
    require(s.edge_margin >= 1, r.path("edge_margin"), "must be at least 1");
}

void read_experiment(const Reader& root, ExperimentSpec& e) {
    const auto r = root.child(
        "experiment", {"kind", "horizon", "burn_in", "theta_floor", "levels", "perturbation", "first", "second",
                       "sample_every", "fit_start", "fit_floor", "monotonicity_snapshots", "monotonicity_spacing",
                       "tail_lo", "tail_hi", "tail_check", "speed_base_horizon", "compare_half_width",
                       "interface", "spectral", "tolerances"});
    std::string kind = to_string(e.kind);
    r.string("kind", kind);
    try {
        e.kind = experiment_kind_from_string(kind);
    } catch (const ConfigError&) {
        throw ConfigError(r.path("kind") +
                          ": expected one of stability, uniqueness, monotonicity, recurrence, speed; got \"" + kind +
                          "\"");
    }
    r.number("horizon", e.horizon);
    r.number("burn_in", e.burn_in);
    r.number("theta_floor", e.theta_floor);
    r.numbers("levels", e.levels);
    require(e.horizon >= 0.0, r.path("horizon"), "must be nonnegative (0 picks the default)");
    require(e.burn_in >= 0.0, r.path("burn_in"), "must be nonnegative (0 picks 40 / c_B)");
    require(e.theta_floor >= 0.0, r.path("theta_floor"), "must be nonnegative (0 picks theta / 4)");
    for (std::size_t i = 0; i < e.levels.size(); ++i)
        require(e.levels[i] > 0.0 && e.levels[i] < 1.0, r.path("levels") + "[" + std::to_string(i) + "]",
                "must lie in (0, 1)");

    const auto p = r.child("perturbation", {"amplitude", "center", "width", "alpha0", "jitter", "epsilon0_multiple"});
    p.number("amplitude", e.perturbation.amplitude);
    p.number("center", e.perturbation.center);
    p.number("width", e.perturbation.width);
    p.number("alpha0", e.perturbation.alpha0);
    p.number("jitter", e.perturbation.jitter);
    p.number("epsilon0_multiple", e.perturbation.epsilon0_multiple);
    require(e.perturbation.epsilon0_multiple >= 0.0, p.path("epsilon0_multiple"), "must be nonnegative");
    require(e.perturbation.amplitude >= 0.0, p.path("amplitude"), "must be nonnegative");
    require(e.perturbation.width > 0.0, p.path("width"), "must be positive");
    require(e.perturbation.alpha0 > 0.0, p.path("alpha0"), "must be positive");
    require(e.perturbation.jitter >= 0.0, p.path("jitter"), "must be nonnegative");

    read_datum(r, "first", e.first);
    read_datum(r, "second", e.second);

    r.number("sample_every", e.sample_every);
    r.number("fit_start", e.fit_start);
    r.number("fit_floor", e.fit_floor);
    r.integer("monotonicity_snapshots", e.monotonicity_snapshots);
    r.number("monotonicity_spacing", e.monotonicity_spacing);
    r.number("tail_lo", e.tail_lo);
    r.number("tail_hi", e.tail_hi);
    r.number("tail_check", e.tail_check);
    r.number("speed_base_horizon", e.speed_base_horizon);
    r.number("compare_half_width", e.compare_half_width);
    require(e.sample_every > 0.0, r.path("sample_every"), "must be positive");
    require(e.fit_start >= 0.0, r.path("fit_start"), "must be nonnegative");
    require(e.fit_floor > 0.0, r.path("fit_floor"), "must be positive");
    require(e.monotonicity_snapshots >= 1, r.path("monotonicity_snapshots"), "must be at least 1");
    require(e.monotonicity_spacing > 0.0, r.path("monotonicity_spacing"), "must be positive");
    require(e.tail_lo >= 0.0, r.path("tail_lo"), "must be nonnegative");
    require(e.tail_hi > e.tail_lo, r.path("tail_hi"), "must exceed tail_lo");
    require(e.tail_check > 0.0, r.path("tail_check"), "must be positive");
    require(e.speed_base_horizon > 0.0, r.path("speed_base_horizon"), "must be positive");
    require(e.compare_half_width > 0.0, r.path("compare_half_width"), "must be positive");

    const auto in = r.child("interface", {"C0", "delta_star"});
    in.number("C0", e.interface_C0);
    in.number("delta_star", e.interface_delta);
    require(e.interface_C0 > 0.0, in.path("C0"), "must be positive");
    require(e.interface_delta > 0.0, in.path("delta_star"), "must be positive");

    auto& w = e.spectral;
    const auto s = r.child("spectral", {"f_max", "module_order", "floor_mads", "dynamic_range",
                                        "almost_period_epsilon", "almost_period_max"});
    s.number("f_max", w.f_max);
    s.integer("module_order", w.module_order);
    s.number("floor_mads", w.floor_mads);
    s.number("dynamic_range", w.dynamic_range);
    s.number("almost_period_epsilon", w.almost_period_epsilon);
    s.number("almost_period_max", w.almost_period_max);
    require(w.f_max > 0.0, s.path("f_max"), "must be positive");
    require(w.module_order >= 1, s.path("module_order"), "must be at least 1");
    require(w.floor_mads > 0.0, s.path("floor_mads"), "must be positive");
    require(w.almost_period_epsilon > 0.0, s.path("almost_period_epsilon"), "must be positive");
    require(w.almost_period_max > 0.0, s.path("almost_period_max"), "must be positive");

    auto& t = e.tol;
    const auto tr = r.child("tolerances", {"final_distance", "r_squared", "gap_fraction", "uniqueness_distance",
                                           "tail_rate_slack", "recurrence", "cauchy", "speed_bound_slack"});
    tr.number("final_distance", t.final_distance);
    tr.number("r_squared", t.r_squared);
    tr.number("gap_fraction", t.gap_fraction);
    tr.number("uniqueness_distance", t.uniqueness_distance);
    tr.number("tail_rate_slack", t.tail_rate_slack);
    tr.number("recurrence", t.recurrence);
    tr.number("cauchy", t.cauchy);
    tr.number("speed_bound_slack", t.speed_bound_slack);
    require(t.final_distance > 0.0, tr.path("final_distance"), "must be positive");
    require(t.r_squared > 0.0 && t.r_squared <= 1.0, tr.path("r_squared"), "must lie in (0, 1]");
    require(t.gap_fraction > 0.0 && t.gap_fraction <= 1.0, tr.path("gap_fraction"), "must lie in (0, 1]");
    require(t.uniqueness_distance > 0.0, tr.path("uniqueness_distance"), "must be positive");
    require(t.tail_rate_slack >= 0.0, tr.path("tail_rate_slack"), "must be nonnegative");
    require(t.recurrence > 0.0, tr.path("recurrence"), "must be positive");
    require(t.cauchy > 0.0, tr.path("cauchy"), "must be positive");
    require(t.speed_bound_slack >= 0.0, tr.path("speed_bound_slack"), "must be nonnegative");
}

void apply_overrides(json& j, const ConfigOverrides& o) {
    auto section = [&](const char* key) -> json& {
        if (!j.contains(key) || j[key].is_null()) j[key] = json::object();
        if (!j[key].is_object()) throw ConfigError(std::string(key) + ": expected an object");
        return j[key];
    };
    if (o.h) section("solver")["h"] = *o.h;
    if (o.dt) section("solver")["dt"] = *o.dt;
    if (o.horizon) section("experiment")["horizon"] = *o.horizon;
    if (o.kind) section("experiment")["kind"] = *o.kind;
    if (o.seed) j["seed"] = *o.seed;
    if (o.output) j["output"] = *o.output;
}

RunConfig from_json(json j, const ConfigOverrides& overrides) {
    if (j.is_null()) j = json::object();
    if (!j.is_object()) throw ConfigError("config: expected an object at the top level");
    apply_overrides(j, overrides);
    const Reader root(j, "", {"model", "solver", "experiment", "output", "seed"});
    RunConfig cfg;
    read_model(root, cfg.model);
    root.string("output", cfg.output);
    root.integer("seed", cfg.seed);
    require(!cfg.output.empty(), "output", "must not be empty");

    const auto model = build_model(cfg.model, cfg.seed);
    bool dt_given = false;
    SolverConfig s;
    read_solver(root, s, dt_given);
    if (!dt_given) s.dt = SolverConfig::defaults_for(model.lipschitz(), s.h, s.window_width).dt;
    s.max_lip = model.lipschitz();
    s.validate();
    cfg.solver = s;

    read_experiment(root, cfg.experiment);
    cfg.experiment.solver = cfg.solver;
    cfg.experiment.seed = cfg.seed;
    return cfg;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line, col = 1;
        else ++col;
    }
    return {line, col};
}

// ---------------------------------------------------------------- output

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + path.string());
    os << content;
    os.flush();
    if (!os) throw IoError("write failed for " + path.string());
}

std::string hex(const unsigned char* data, unsigned len) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        s.push_back(digits[data[i] >> 4]);
        s.push_back(digits[data[i] & 15]);
    }
    return s;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json check_json(const HypothesisCheck& c) {
    json j{{"passed", c.passed}, {"detail", c.detail}};
    j["witness"] = c.witness ? json{{"t", c.witness->first}, {"u", c.witness->second}} : json(nullptr);
    return j;
}

std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- config API

IgnitionNonlinearity build_model(const ModelConfig& m, std::uint64_t seed) {
    ForcingSignal g;
    switch (m.forcing_kind) {
        case ForcingKind::constant: g = ForcingSignal::constant(m.base_level); break;
        case ForcingKind::random_phase_sum: {
            std::vector<double> freq, amp;
            for (const auto& c : m.components) freq.push_back(c.frequency), amp.push_back(c.amplitude);
            g = ForcingSignal::random_phase_sum(m.base_level, freq, amp, seed);
            break;
        }
        default: g = ForcingSignal(m.forcing_kind, m.base_level, m.components);
    }
    IgnitionNonlinearity model(m.theta, m.theta_star, g);
    model.beta_override = m.beta;
    return model;
}

RunConfig parse_config(const std::string& text, const std::string& source, const ConfigOverrides& overrides) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::string detail = e.what();
        if (const auto p = detail.find("syntax error"); p != std::string::npos) detail = detail.substr(p);
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": parse error: " + detail);
    }
    return from_json(std::move(j), overrides);
}

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
    const std::string text = read_file(path);
    return parse_config(text, path, overrides);
}

RunConfig default_config(const ConfigOverrides& overrides) { return from_json(json::object(), overrides); }

nlohmann::json echo_config(const RunConfig& cfg) {
    const auto& m = cfg.model;
    json comps = json::array();
    for (const auto& c : m.components)
        comps.push_back({{"frequency", c.frequency}, {"amplitude", c.amplitude}, {"phase", c.phase}});
    json model{{"theta", m.theta},
               {"theta_star", m.theta_star},
               {"shape", m.shape},
               {"beta", m.beta ? json(*m.beta) : json(nullptr)},
               {"forcing", {{"kind", to_string(m.forcing_kind)}, {"base_level", m.base_level}, {"components", comps}}}};
    const auto& s = cfg.solver;
    json solver{{"h", s.h},
                {"dt", s.dt},
                {"window_width", s.window_width},
                {"recenter_threshold", s.recenter_threshold},
                {"scheme", scheme_name(s.scheme)},
                {"edge_margin", s.edge_margin}};
    const auto& e = cfg.experiment;
    const auto& w = e.spectral;
    const auto& t = e.tol;
    json experiment{
        {"kind", to_string(e.kind)},
        {"horizon", e.horizon},
        {"burn_in", e.burn_in},
        {"theta_floor", e.theta_floor},
        {"levels", e.levels},
        {"perturbation",
         {{"amplitude", e.perturbation.amplitude},
          {"center", e.perturbation.center},
          {"width", e.perturbation.width},
          {"alpha0", e.perturbation.alpha0},
          {"jitter", e.perturbation.jitter},
          {"epsilon0_multiple", e.perturbation.epsilon0_multiple}}},
        {"first", datum_json(e.first)},
        {"second", datum_json(e.second)},
        {"sample_every", e.sample_every},
        {"fit_start", e.fit_start},
        {"fit_floor", e.fit_floor},
        {"monotonicity_snapshots", e.monotonicity_snapshots},
        {"monotonicity_spacing", e.monotonicity_spacing},
        {"tail_lo", e.tail_lo},
        {"tail_hi", e.tail_hi},
        {"tail_check", e.tail_check},
        {"speed_base_horizon", e.speed_base_horizon},
        {"compare_half_width", e.compare_half_width},
        {"interface", {{"C0", e.interface_C0}, {"delta_star", e.interface_delta}}},
        {"spectral",
         {{"f_max", w.f_max},
          {"module_order", w.module_order},
          {"floor_mads", w.floor_mads},
          {"dynamic_range", w.dynamic_range},
          {"almost_period_epsilon", w.almost_period_epsilon},
          {"almost_period_max", w.almost_period_max}}},
        {"tolerances",
         {{"final_distance", t.final_distance},
          {"r_squared", t.r_squared},
          {"gap_fraction", t.gap_fraction},
          {"uniqueness_distance", t.uniqueness_distance},
          {"tail_rate_slack", t.tail_rate_slack},
          {"recurrence", t.recurrence},
          {"cauchy", t.cauchy},
          {"speed_bound_slack", t.speed_bound_slack}}}};
    return {{"model", model}, {"solver", solver}, {"experiment", experiment}, {"output", cfg.output},
            {"seed", cfg.seed}};
}

std::string config_hash(const RunConfig& cfg) { return sha256_hex(echo_config(cfg).dump()); }

ExperimentSpec build_spec(const RunConfig& cfg) {
    ExperimentSpec spec = cfg.experiment;
    spec.model = build_model(cfg.model, cfg.seed);
    spec.solver = cfg.solver;
    spec.seed = cfg.seed;
    spec.config_hash = config_hash(cfg);
    return spec;
}

// ---------------------------------------------------------------- JSON views

nlohmann::json to_json(const HypothesisReport& r) {
    return {{"all_passed", r.all_passed()},
            {"h1", check_json(r.h1)},
            {"h2", check_json(r.h2)},
            {"h3", check_json(r.h3)},
            {"h4", check_json(r.h4)},
            {"beta", number_or_null(r.beta)},
            {"g_min", number_or_null(r.g_min)},
            {"g_max", number_or_null(r.g_max)},
            {"c_lip", number_or_null(r.c_lip)},
            {"sampling",
             {{"time_samples", r.sampling.time_samples},
              {"state_samples", r.sampling.state_samples},
              {"time_span", r.sampling.time_span},
              {"state_max", r.sampling.state_max}}}};
}

nlohmann::json to_json(const SqueezeConstants& c) {
    return {{"L0", c.L0},         {"alpha", c.alpha},
            {"M", c.M},           {"omega", c.omega},
            {"epsilon0", c.epsilon0}, {"C_Lip", c.C_Lip},
            {"C_Gamma", c.C_Gamma}, {"C_L0", c.C_L0},
            {"beta", c.beta},     {"c_B", c.c_B},
            {"c_0", c.c_0},       {"alpha0", c.alpha0},
            {"theta", c.theta},   {"theta_star", c.theta_star},
            {"d_max", c.d_max},   {"L_measured", c.L_measured},
            {"nu", c.nu()}};
}

nlohmann::json to_json(const ExperimentReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) {
        json jc{{"name", c.name},
                {"value", number_or_null(c.value)},
                {"relation", c.relation},
                {"tolerance", number_or_null(c.tolerance)},
                {"passed", c.passed}};
        if (c.relation == "in") jc["tolerance_hi"] = number_or_null(c.tolerance_hi);
        checks.push_back(jc);
    }
    json quantities = json::object();
    for (const auto& [k, v] : r.quantities) quantities[k] = number_or_null(v);

    json out{{"kind", to_string(r.kind)},
             {"passed", r.passed()},
             {"checks", checks},
             {"quantities", quantities},
             {"flags", r.flags},
             {"notes", r.notes},
             {"hypotheses", to_json(r.hypotheses)},
             {"constants", r.constants ? to_json(*r.constants) : json(nullptr)}};
    if (r.spectrum) {
        const auto& s = *r.spectrum;
        json peaks = json::array();
        for (const auto& p : s.peaks)
            peaks.push_back({{"frequency", p.frequency},
                             {"power", p.power},
                             {"nearest", p.nearest},
                             {"distance_bins", p.distance_bins},
                             {"in_module", p.in_module}});
        out["spectrum"] = {{"bins", s.frequency.size()},
                           {"bin_width", s.bin_width},
                           {"floor", s.floor},
                           {"floor_statistical", s.floor_statistical},
                           {"off_module_margin", s.off_module_margin},
                           {"module", s.module},
                           {"peaks", peaks}};
    }
    const auto& p = r.provenance;
    out["provenance"] = {{"config_hash", p.config_hash}, {"tool_version", p.tool_version},
                         {"h", p.h},                     {"dt", p.dt},
                         {"window_width", p.window_width}, {"seed", p.seed},
                         {"runtime_seconds", p.runtime_seconds}, {"started", p.started},
                         {"finished", p.finished}};
    return out;
}

// ---------------------------------------------------------------- checksums and manifests

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    return hex(md, len);
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

RunManifest write_manifest(const std::string& dir, const std::vector<std::string>& files,
                           const Provenance& provenance, const nlohmann::json& echoed_config) {
    RunManifest m;
    m.config_hash = provenance.config_hash;
    m.tool_version = provenance.tool_version.empty() ? tool_version() : provenance.tool_version;
    m.started = provenance.started;
    m.finished = provenance.finished;
    m.config = echoed_config;
    std::vector<std::string> sorted = files;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    json inventory = json::array();
    for (const auto& f : sorted) {
        const auto full = (fs::path(dir) / f).string();
        const std::string bytes = read_file(full);
        ManifestEntry e{f, sha256_hex(bytes), bytes.size()};
        inventory.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
        m.files.push_back(std::move(e));
    }
    const json doc{{"config_hash", m.config_hash}, {"tool_version", m.tool_version}, {"started", m.started},
                   {"finished", m.finished},       {"files", inventory},             {"config", echoed_config}};
    write_file(fs::path(dir) / "manifest.json", doc.dump(2) + "\n");
    return m;
}

std::vector<std::string> verify_manifest(const std::string& dir) {
    const auto path = (fs::path(dir) / "manifest.json").string();
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw IoError("malformed manifest " + path + ": " + e.what());
    }
    std::vector<std::string> bad;
    for (const auto& e : doc.at("files")) {
        const auto rel = e.at("path").get<std::string>();
        const auto full = fs::path(dir) / rel;
        std::error_code ec;
        if (!fs::is_regular_file(full, ec)) {
            bad.push_back(rel);
            continue;
        }
        const std::string bytes = read_file(full.string());
        if (bytes.size() != e.at("bytes").get<std::uintmax_t>() || sha256_hex(bytes) != e.at("sha256").get<std::string>())
            bad.push_back(rel);
    }
    return bad;
}

RunManifest emit_report(const ExperimentReport& report, const std::string& dir, const nlohmann::json& echoed_config) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
    const fs::path root(dir);
    std::vector<std::string> files;

    write_file(root / "report.json", to_json(report).dump(2) + "\n");
    files.push_back("report.json");

    if (report.trace && report.trace->size() > 0) {
        write_trace_csv(*report.trace, (root / "trace.csv").string());
        emit_plot(*report.trace, (root / "trace.svg").string());
        files.push_back("trace.csv");
        files.push_back("trace.svg");
    }
    if (report.spectrum && !report.spectrum->frequency.empty()) {
        std::string csv = "frequency,power\n";
        const auto& s = *report.spectrum;
        for (std::size_t i = 0; i < s.frequency.size(); ++i)
            csv += csv_number(s.frequency[i]) + "," + csv_number(s.power[i]) + "\n";
        write_file(root / "spectra.csv", csv);
        emit_plot(s, (root / "spectrum.svg").string());
        files.push_back("spectra.csv");
        files.push_back("spectrum.svg");
    }
    if (report.profile && !report.profile->offsets.empty()) {
        const auto& p = *report.profile;
        std::string csv = "offset,psi\n";
        for (std::size_t i = 0; i < p.offsets.size(); ++i)
            csv += csv_number(p.offsets[i]) + "," + csv_number(p.values[i]) + "\n";
        write_file(root / "profile.csv", csv);
        const auto th = report.quantities.find("theta");
        emit_plot(p, th != report.quantities.end() ? th->second : 0.0, (root / "profile.svg").string());
        files.push_back("profile.csv");
        files.push_back("profile.svg");
    }

    std::map<std::string, std::vector<std::pair<std::string, const std::vector<double>*>>> groups;
    for (const auto& [name, col] : report.series) {
        const auto dot = name.find('.');
        const std::string group = dot == std::string::npos ? name : name.substr(0, dot);
        const std::string column = dot == std::string::npos ? "value" : name.substr(dot + 1);
        groups[group].emplace_back(column, &col);
    }
    for (const auto& [group, cols] : groups) {
        std::size_t n = cols.front().second->size();
        for (const auto& c : cols)
            if (c.second->size() != n)
                throw PreconditionError("series group \"" + group + "\" has columns of different lengths");
        std::string csv;
        for (std::size_t k = 0; k < cols.size(); ++k) csv += (k ? "," : "") + cols[k].first;
        csv += "\n";
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < cols.size(); ++k) csv += (k ? "," : "") + csv_number((*cols[k].second)[i]);
            csv += "\n";
        }
        const std::string name = "series_" + group + ".csv";
        write_file(root / name, csv);
        files.push_back(name);
    }

    return write_manifest(dir, files, report.provenance, echoed_config);
}

// ---------------------------------------------------------------- SVG plots

namespace {

struct Curve {
    std::vector<double> x, y;
    std::string label;
    std::string color;
    bool dashed = false;
};

struct Plot {
    std::string title, xlabel, ylabel;
    std::vector<Curve> curves;
    std::vector<std::pair<double, std::string>> hlines;  // y value, label
    std::vector<double> vmarkers;
    std::vector<std::pair<double, double>> dots_good, dots_bad;
    bool legend_right = false;
};

constexpr double kWidth = 760, kHeight = 460, kLeft = 80, kRight = 30, kTop = 40, kBottom = 60;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

std::vector<double> nice_ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(v);
    return t;
}

// Keeps the first, min, max and last point of each bucket so peaks survive.
void decimate(const Curve& c, std::vector<double>& xs, std::vector<double>& ys, std::size_t buckets = 1500) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < c.x.size(); ++i)
        if (std::isfinite(c.x[i]) && std::isfinite(c.y[i])) idx.push_back(i);
    if (idx.size() <= 4 * buckets) {
        for (auto i : idx) xs.push_back(c.x[i]), ys.push_back(c.y[i]);
        return;
    }
    const std::size_t per = (idx.size() + buckets - 1) / buckets;
    for (std::size_t b = 0; b < idx.size(); b += per) {
        const std::size_t e = std::min(idx.size(), b + per);
        std::size_t lo = b, hi = b;
        for (std::size_t k = b; k < e; ++k) {
            if (c.y[idx[k]] < c.y[idx[lo]]) lo = k;
            if (c.y[idx[k]] > c.y[idx[hi]]) hi = k;
        }
        std::set<std::size_t> keep{b, lo, hi, e - 1};
        for (auto k : keep) xs.push_back(c.x[idx[k]]), ys.push_back(c.y[idx[k]]);
    }
}

std::string render(const Plot& p) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pts;
    for (const auto& c : p.curves) {
        std::vector<double> xs, ys;
        decimate(c, xs, ys);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            x0 = std::min(x0, xs[i]), x1 = std::max(x1, xs[i]);
            y0 = std::min(y0, ys[i]), y1 = std::max(y1, ys[i]);
        }
        pts.emplace_back(std::move(xs), std::move(ys));
    }
    if (!std::isfinite(x0)) throw PreconditionError("nothing finite to plot");
    for (const auto& [v, label] : p.hlines) y0 = std::min(y0, v), y1 = std::max(y1, v);
    if (x1 - x0 <= 0.0) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 <= 0.0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad, y1 += pad;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto X = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto Y = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(p.title)
      << "</text>\n";
    for (double t : nice_ticks(x0, x1)) {
        s << "<line x1=\"" << fmt(X(t)) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(X(t)) << "\" y2=\""
          << fmt(kTop + ph) << "\" stroke=\"#eeeeee\"/>\n";
        s << "<text x=\"" << fmt(X(t)) << "\" y=\"" << fmt(kTop + ph + 16) << "\" text-anchor=\"middle\">"
          << tick_label(t) << "</text>\n";
    }
    for (double t : nice_ticks(y0, y1)) {
        s << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(Y(t)) << "\" x2=\"" << fmt(kLeft + pw) << "\" y2=\""
          << fmt(Y(t)) << "\" stroke=\"#eeeeee\"/>\n";
        s << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(Y(t) + 4) << "\" text-anchor=\"end\">"
          << tick_label(t) << "</text>\n";
    }
    s << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw) << "\" height=\""
      << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 18) << "\" text-anchor=\"middle\">"
      << escape(p.xlabel) << "</text>\n";
    s << "<text x=\"18\" y=\"" << fmt(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fmt(kTop + ph / 2) << ")\">" << escape(p.ylabel) << "</text>\n";

    for (double v : p.vmarkers) {
        if (v < x0 || v > x1) continue;
        s << "<line x1=\"" << fmt(X(v)) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(X(v)) << "\" y2=\""
          << fmt(kTop + 10) << "\" stroke=\"#2b8a3e\" stroke-width=\"1.5\"/>\n";
    }
    for (const auto& [v, label] : p.hlines) {
        s << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(Y(v)) << "\" x2=\"" << fmt(kLeft + pw) << "\" y2=\""
          << fmt(Y(v)) << "\" stroke=\"#888888\" stroke-dasharray=\"6 4\"/>\n";
        s << "<text x=\"" << fmt(kLeft + pw - 4) << "\" y=\"" << fmt(Y(v) - 4) << "\" text-anchor=\"end\" fill=\"#555555\">"
          << escape(label) << "</text>\n";
    }
    for (std::size_t k = 0; k < p.curves.size(); ++k) {
        const auto& [xs, ys] = pts[k];
        if (xs.empty()) continue;
        s << "<polyline fill=\"none\" stroke=\"" << p.curves[k].color << "\" stroke-width=\"1.4\""
          << (p.curves[k].dashed ? " stroke-dasharray=\"5 3\"" : "") << " points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? " " : "") << fmt(X(xs[i])) << "," << fmt(Y(ys[i]));
        s << "\"/>\n";
    }
    auto dots = [&](const std::vector<std::pair<double, double>>& d, const char* color) {
        for (const auto& [x, y] : d)
            if (std::isfinite(y))
                s << "<circle cx=\"" << fmt(X(x)) << "\" cy=\"" << fmt(Y(y)) << "\" r=\"3\" fill=\"" << color
                  << "\"/>\n";
    };
    dots(p.dots_good, "#2b8a3e");
    dots(p.dots_bad, "#c92a2a");
    double ly = kTop + 16;
    const double lx = p.legend_right ? kLeft + pw - 200 : kLeft + 12;
    for (const auto& c : p.curves) {
        s << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(lx + 24)
          << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << c.color << "\" stroke-width=\"2\""
          << (c.dashed ? " stroke-dasharray=\"5 3\"" : "") << "/>\n";
        s << "<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly) << "\">" << escape(c.label) << "</text>\n";
        ly += 16;
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace

void emit_plot(const FrontTrace& trace, const std::string& path) {
    if (trace.times.empty() || trace.xi.empty()) throw PreconditionError("cannot plot an empty trace");
    Plot p{"Interface location", "t", "x", {}, {}, {}, {}, {}};
    p.curves.push_back({trace.times, trace.xi, "xi (level " + tick_label(trace.primary_level) + ")", "#1c7ed6", false});
    if (trace.xi_tilde.size() == trace.times.size())
        p.curves.push_back({trace.times, trace.xi_tilde, "modified interface xi~", "#e8590c", true});
    write_file(path, render(p));
}

void emit_plot(const WaveProfileSnapshot& profile, double theta, const std::string& path) {
    if (profile.offsets.empty()) throw PreconditionError("cannot plot an empty profile");
    Plot p{"Profile at t = " + tick_label(profile.time), "x - xi(t)", "psi", {}, {}, {}, {}, {}};
    p.curves.push_back({profile.offsets, profile.values, "psi(t, x)", "#1c7ed6", false});
    p.hlines.push_back({theta, "theta = " + tick_label(theta)});
    p.legend_right = true;
    write_file(path, render(p));
}

void emit_plot(const Spectrum& spectrum, const std::string& path) {
    if (spectrum.frequency.empty()) throw PreconditionError("cannot plot an empty spectrum");
    Plot p{"Periodogram of the interface speed", "frequency", "log10 power", {}, {}, {}, {}, {}};
    Curve c{spectrum.frequency, {}, "log10 power", "#1c7ed6", false};
    for (double v : spectrum.power) c.y.push_back(v > 0.0 ? std::log10(v) : std::nan(""));
    p.curves.push_back(std::move(c));
    if (spectrum.floor > 0.0) p.hlines.push_back({std::log10(spectrum.floor), "floor"});
    p.vmarkers = spectrum.module;
    p.legend_right = true;
    for (const auto& pk : spectrum.peaks) {
        if (!(pk.power > 0.0)) continue;
        (pk.in_module ? p.dots_good : p.dots_bad).emplace_back(pk.frequency, std::log10(pk.power));
    }
    write_file(path, render(p));
}

}  // namespace ignition
