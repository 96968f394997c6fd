#include "ignition/pde_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ignition/errors.hpp"

namespace ignition {

Grid1D Grid1D::centered(double center, double width, double h) {
    if (!(h > 0.0) || !(width > 0.0)) throw PreconditionError("grid spacing and width must be positive");
    const auto half_cells = static_cast<std::int64_t>(std::llround(0.5 * width / h));
    const auto mid = static_cast<std::int64_t>(std::llround(center / h));
    Grid1D g;
    g.first_index = mid - half_cells;
    g.spacing = h;
    g.count = static_cast<std::size_t>(2 * half_cells + 1);
    g.validate();
    return g;
}

void Grid1D::validate() const {
    if (!(spacing > 0.0)) throw PreconditionError("grid spacing must be positive");
    if (count < 16) throw PreconditionError("grid needs at least 16 nodes, got " + std::to_string(count));
}

Field Field::sample(const Grid1D& grid, const std::function<double(double)>& u0, double time) {
    grid.validate();
    Field f;
    f.grid = grid;
    f.time = time;
    f.values.resize(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) f.values[i] = u0(grid.x(i));
    return f;
}

SolverConfig SolverConfig::defaults_for(double lipschitz, double h, double window_width) {
    SolverConfig cfg;
    cfg.h = h;
    cfg.window_width = window_width;
    cfg.max_lip = lipschitz;
    cfg.dt = lipschitz > 0.0 ? std::min(0.2 * h, 0.5 / lipschitz) : 0.2 * h;
    return cfg;
}

std::size_t SolverConfig::node_count() const {
    return static_cast<std::size_t>(2 * std::llround(0.5 * window_width / h) + 1);
}

void SolverConfig::validate() const {
    if (!(h > 0.0)) throw ConfigError("solver.h must be positive");
    if (!(dt > 0.0)) throw ConfigError("solver.dt must be positive");
    if (!(window_width > 0.0)) throw ConfigError("solver.window_width must be positive");
    if (node_count() < 16) throw ConfigError("solver.window_width must cover at least 16 nodes");
    if (recenter_threshold < 1) throw ConfigError("solver.recenter_threshold must be at least 1 cell");
    if (max_lip < 0.0) throw ConfigError("solver.max_lip must be nonnegative");
    if (scheme == TimeScheme::imex_euler && max_lip > 0.0 && dt > 1.0 / max_lip) {
        std::ostringstream os;
        os << std::setprecision(6) << "solver.dt = " << dt << " exceeds the comparison bound 1/C_Lip = "
           << 1.0 / max_lip;
        throw ConfigError(os.str());
    }
}

namespace {

double implicit_weight(const SolverConfig& cfg) {
    return cfg.scheme == TimeScheme::imex_euler ? 1.0 : 0.5;
}

}  // namespace

Stepper::Stepper(const SolverConfig& cfg, std::size_t count) : cfg_(cfg), count_(count) {
    cfg_.validate();
    if (count < 16) throw PreconditionError("grid needs at least 16 nodes");
    const double r = implicit_weight(cfg_) * cfg_.dt / (cfg_.h * cfg_.h);
    implicit_ = numerics::TridiagonalFactorization(count - 2, -r, 1.0 + 2.0 * r, -r);
    reaction_.resize(count);
    rhs_.resize(count - 2);
    predictor_.resize(count);
    if (cfg_.scheme == TimeScheme::imex_trapezoid) {
        const double rf = cfg_.dt / (cfg_.h * cfg_.h);
        predictor_factor_ = numerics::TridiagonalFactorization(count - 2, -rf, 1.0 + 2.0 * rf, -rf);
        reaction_next_.resize(count);
    }
}

void Stepper::advance(Field& field, const Reaction& model) {
    if (field.values.size() != count_) throw PreconditionError("field size does not match the stepper");
    auto& u = field.values;
    const std::size_t n = count_;
    const double dt = cfg_.dt;
    const double r = dt / (cfg_.h * cfg_.h);
    const double t = field.time;
    u.front() = 1.0;
    u.back() = 0.0;
    model.apply(t, u, reaction_);

    if (cfg_.scheme == TimeScheme::imex_euler) {
        for (std::size_t i = 1; i + 1 < n; ++i) rhs_[i - 1] = u[i] + dt * reaction_[i];
        rhs_.front() += r * u.front();
        rhs_.back() += r * u.back();
        implicit_.solve(rhs_);
        std::copy(rhs_.begin(), rhs_.end(), u.begin() + 1);
        field.time = t + dt;
        return;
    }

    for (std::size_t i = 1; i + 1 < n; ++i) rhs_[i - 1] = u[i] + dt * reaction_[i];
    rhs_.front() += r * u.front();
    rhs_.back() += r * u.back();
    predictor_factor_.solve(rhs_);
    predictor_.front() = 1.0;
    predictor_.back() = 0.0;
    std::copy(rhs_.begin(), rhs_.end(), predictor_.begin() + 1);
    model.apply(t + dt, predictor_, reaction_next_);
    const double half = 0.5 * r;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        rhs_[i - 1] = u[i] + half * (u[i - 1] - 2.0 * u[i] + u[i + 1]) +
                      0.5 * dt * (reaction_[i] + reaction_next_[i]);
    }
    rhs_.front() += half * u.front();
    rhs_.back() += half * u.back();
    implicit_.solve(rhs_);
    std::copy(rhs_.begin(), rhs_.end(), u.begin() + 1);
    field.time = t + dt;
}

Field step(const Field& field, const Reaction& model, const SolverConfig& cfg) {
    Stepper stepper(cfg, field.values.size());
    Field out = field;
    stepper.advance(out, model);
    return out;
}

std::size_t steps_between(double t0, double t1, double dt) {
    if (!(t1 > t0)) return 0;
    return static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9));
}

void shift_window(Field& field, std::int64_t cells) {
    if (cells == 0) return;
    auto& v = field.values;
    const auto n = static_cast<std::int64_t>(v.size());
    if (cells > 0) {
        const auto k = std::min(cells, n);
        std::move(v.begin() + k, v.end(), v.begin());
        std::fill(v.end() - k, v.end(), 0.0);
    } else {
        const auto k = std::min(-cells, n);
        std::move_backward(v.begin(), v.end() - k, v.end());
        std::fill(v.begin(), v.begin() + k, 1.0);
    }
    field.grid.first_index += cells;
}

namespace {

std::optional<double> try_location(const Field& field, double level, InterfaceRefinement ref) {
    try {
        return interface_location(field, level, ref);
    } catch (const NoCrossingError&) {
        return std::nullopt;
    }
}

void check_margin(const Field& field, double xi, int margin) {
    const double m = margin * field.grid.spacing;
    if (xi < field.grid.left_edge() + m || xi > field.grid.right_edge() - m) {
        std::ostringstream os;
        os << std::setprecision(8) << "interface at x = " << xi << " (t = " << field.time
           << ") is within " << margin << " cells of the window [" << field.grid.left_edge() << ", "
           << field.grid.right_edge() << "]";
        throw WindowError(os.str());
    }
}

}  // namespace

EvolveResult evolve(Field field, const Reaction& model, const SolverConfig& cfg, double until,
                    const EvolveOptions& opts) {
    if (!(until > field.time)) throw PreconditionError("evolve: `until` must exceed the field time");
    if (std::abs(field.grid.spacing - cfg.h) > 1e-14 * cfg.h)
        throw PreconditionError("evolve: field spacing differs from solver.h");
    Stepper stepper(cfg, field.values.size());

    EvolveResult out;
    out.trace.primary_level = opts.track_level;
    const double t_start = field.time;
    const std::size_t n_steps = steps_between(t_start, until, cfg.dt);

    auto record = [&](const Field& f, std::optional<double> xi) {
        if (!xi) return;
        out.trace.times.push_back(f.time);
        out.trace.xi.push_back(*xi);
        out.trace.xi_by_level[opts.track_level].push_back(*xi);
        for (double level : opts.extra_levels) {
            auto x = try_location(f, level, InterfaceRefinement::cubic);
            out.trace.xi_by_level[level].push_back(x.value_or(std::numeric_limits<double>::quiet_NaN()));
        }
        if (opts.speed_formula) {
            double s = std::numeric_limits<double>::quiet_NaN();
            try {
                s = speed_at_position(f, model, *xi);
            } catch (const DegenerateInterfaceError&) {
            }
            out.trace.speed_formula.push_back(s);
        }
    };

    auto track = [&](std::size_t k) {
        auto xi = try_location(field, opts.track_level, InterfaceRefinement::cubic);
        if (xi) check_margin(field, *xi, cfg.edge_margin);
        if (opts.record_every > 0 && k % opts.record_every == 0) record(field, xi);
        if (xi && opts.recenter) {
            const double drift = (*xi - field.grid.center()) / field.grid.spacing;
            if (std::abs(drift) > cfg.recenter_threshold) {
                shift_window(field, static_cast<std::int64_t>(std::llround(drift)));
                ++out.recenterings;
            }
        }
    };

    track(0);
    if (opts.observer) opts.observer(field);
    const std::size_t n = field.values.size();
    for (std::size_t k = 1; k <= n_steps; ++k) {
        stepper.advance(field, model);
        field.time = t_start + static_cast<double>(k) * cfg.dt;
        out.edge_drift = std::max({out.edge_drift, std::abs(field.values[1] - 1.0), std::abs(field.values[n - 2])});
        track(k);
        if (opts.observer) opts.observer(field);
    }
    out.steps = n_steps;
    out.trace.compute_fd_speed();
    out.field = std::move(field);
    return out;
}

ResidualField pde_residual(const SpaceTimeSamples& c, const Reaction& model) {
    if (c.slices.size() < 3) throw PreconditionError("pde_residual needs at least 3 time slices");
    if (!(c.dt > 0.0) || !(c.h > 0.0)) throw PreconditionError("pde_residual needs positive dt and h");
    const std::size_t n = c.slices.front().size();
    if (n < 3) throw PreconditionError("pde_residual needs at least 3 nodes per slice");
    for (const auto& s : c.slices)
        if (s.size() != n) throw PreconditionError("pde_residual: ragged space-time samples");

    ResidualField r;
    r.t0 = c.t0 + c.dt;
    r.dt = c.dt;
    r.left_edge = c.left_edge + c.h;
    r.h = c.h;
    const double inv_2dt = 0.5 / c.dt;
    const double inv_h2 = 1.0 / (c.h * c.h);
    for (std::size_t k = 1; k + 1 < c.slices.size(); ++k) {
        const auto& prev = c.slices[k - 1];
        const auto& cur = c.slices[k];
        const auto& next = c.slices[k + 1];
        const double t = c.t0 + static_cast<double>(k) * c.dt;
        std::vector<double> row(n - 2);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double ut = (next[i] - prev[i]) * inv_2dt;
            const double uxx = (cur[i - 1] - 2.0 * cur[i] + cur[i + 1]) * inv_h2;
            row[i - 1] = ut - uxx - model.value(t, cur[i]);
        }
        r.values.push_back(std::move(row));
    }
    return r;
}

double ResidualField::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& row : values)
        for (double v : row) m = std::min(m, v);
    return m;
}

double ResidualField::max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& row : values)
        for (double v : row) m = std::max(m, v);
    return m;
}

void write_field_csv(const Field& field, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    os << std::setprecision(17) << "x,u\n";
    for (std::size_t i = 0; i < field.values.size(); ++i) os << field.grid.x(i) << ',' << field.values[i] << '\n';
    if (!os) throw IoError("write failed for " + path);
}

}  // namespace ignition
