#include "ignition/front_tracking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ignition/errors.hpp"

namespace ignition {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

double interface_location(const Field& field, double level, InterfaceRefinement refinement) {
    const auto& u = field.values;
    const std::size_t n = u.size();
    if (n < 2) throw NoCrossingError("field has fewer than two nodes");
    std::size_t i = n;
    for (std::size_t k = n; k-- > 0;) {
        if (u[k] >= level) {
            i = k;
            break;
        }
    }
    if (i == n || i + 1 == n)
        throw NoCrossingError("level " + fmt(level) + " is not crossed by the field at t = " + fmt(field.time));
    const double h = field.grid.spacing;
    const double x0 = field.grid.x(i);
    const double lin = x0 + h * (u[i] - level) / (u[i] - u[i + 1]);
    if (refinement == InterfaceRefinement::linear || n < 4) return lin;

    const auto samples = field.samples();
    double a = x0, b = x0 + h;
    // Newton from the linear estimate, falling back to bisection on the bracket.
    double x = lin;
    for (int it = 0; it < 60; ++it) {
        const auto jet = numerics::cubic_jet(samples, x);
        const double r = jet.value - level;
        if (r >= 0.0) a = x; else b = x;
        if (std::abs(r) < 1e-15 || b - a < 1e-15 * h) break;
        double next = jet.first != 0.0 ? x - r / jet.first : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        x = next;
    }
    return x;
}

void FrontTrace::compute_fd_speed() {
    const std::size_t n = times.size();
    speed_fd.assign(n, kNaN);
    if (n < 2) return;
    speed_fd[0] = (xi[1] - xi[0]) / (times[1] - times[0]);
    speed_fd[n - 1] = (xi[n - 1] - xi[n - 2]) / (times[n - 1] - times[n - 2]);
    for (std::size_t k = 1; k + 1 < n; ++k) speed_fd[k] = (xi[k + 1] - xi[k - 1]) / (times[k + 1] - times[k - 1]);
}

FrontTrace FrontTrace::window(double t_begin, double t_end) const {
    FrontTrace out;
    out.primary_level = primary_level;
    auto keep = [&](const std::vector<double>& src, std::vector<double>& dst) {
        if (src.size() != times.size()) return;
        for (std::size_t k = 0; k < times.size(); ++k)
            if (times[k] >= t_begin && times[k] <= t_end) dst.push_back(src[k]);
    };
    keep(times, out.times);
    keep(xi, out.xi);
    keep(xi_tilde, out.xi_tilde);
    keep(speed_formula, out.speed_formula);
    keep(speed_fd, out.speed_fd);
    for (const auto& [level, series] : xi_by_level) keep(series, out.xi_by_level[level]);
    return out;
}

void write_trace_csv(const FrontTrace& trace, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    os << std::setprecision(17);
    os << "t,xi_theta,xi_tilde,speed_formula,speed_fd";
    std::vector<const std::vector<double>*> extra;
    for (const auto& [level, series] : trace.xi_by_level) {
        if (level == trace.primary_level) continue;
        os << ",xi_" << level;
        extra.push_back(&series);
    }
    os << '\n';
    auto cell = [&](const std::vector<double>& v, std::size_t k) {
        os << ',';
        if (k < v.size() && std::isfinite(v[k])) os << v[k];
    };
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        os << trace.times[k];
        cell(trace.xi, k);
        cell(trace.xi_tilde, k);
        cell(trace.speed_formula, k);
        cell(trace.speed_fd, k);
        for (const auto* s : extra) cell(*s, k);
        os << '\n';
    }
    if (!os) throw IoError("write failed for " + path);
}

namespace {

// Quintic smoothstep 10t^3 - 15t^4 + 6t^5 and its derivative.
double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_slope(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }

}  // namespace

double corner_bridge(double s, double c_B, double C0, double delta_star) {
    const double tau = std::clamp((s + delta_star) / delta_star, 0.0, 1.0);
    return 0.5 * c_B * s + C0 * smoothstep(tau);
}

double corner_bridge_slope(double s, double c_B, double C0, double delta_star) {
    const double tau = std::clamp((s + delta_star) / delta_star, 0.0, 1.0);
    return 0.5 * c_B + C0 * smoothstep_slope(tau) / delta_star;
}

ModifiedInterface modified_interface(std::span<const double> times, std::span<const double> xi,
                                     const ModifiedInterfaceOptions& opts) {
    if (times.size() != xi.size() || times.size() < 2)
        throw PreconditionError("modified_interface needs matching time and position samples");
    if (!(opts.c_B > 0.0) || !(opts.C0 > 0.0) || !(opts.delta_star > 0.0))
        throw PreconditionError("modified_interface needs c_B, C0 and delta_star positive");
    if (opts.t_I > 0.0 && !(opts.C0 > 1.25 * opts.c_I * opts.t_I))
        throw PreconditionError("C0 = " + fmt(opts.C0) + " does not exceed (5/4) c_I t_I = " +
                                fmt(1.25 * opts.c_I * opts.t_I));
    const double half = 0.5 * opts.c_B;
    const std::size_t n = times.size();

    // Hitting times T_n and the base values xi(T_n) of each restarted line.
    std::vector<double> T{times[0]};
    std::vector<double> base{xi[0]};
    std::size_t k = 1;
    while (k < n) {
        const double t0 = T.back();
        const double b = base.back() + opts.C0;
        auto gap = [&](std::size_t j) { return xi[j] - (b + half * (times[j] - t0)); };
        double prev = -opts.C0;
        double prev_t = t0;
        bool hit = false;
        for (; k < n; ++k) {
            if (times[k] <= t0) continue;
            const double g = gap(k);
            if (g >= 0.0) {
                const double w = prev < 0.0 && g > prev ? -prev / (g - prev) : 1.0;
                const double Tn = prev_t + w * (times[k] - prev_t);
                T.push_back(Tn);
                base.push_back(b + half * (Tn - t0));
                hit = true;
                break;
            }
            prev = g;
            prev_t = times[k];
        }
        if (!hit) break;
    }
    if (T.size() < 2)
        throw IncompleteTraceError("xi never reaches the envelope xi(t0) + C0 + (c_B/2)(t - t0) after t0 = " +
                                       fmt(times[0]),
                                   times[0]);

    ModifiedInterface out;
    out.hitting_times.assign(T.begin() + 1, T.end());
    out.min_segment = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < T.size(); ++j) out.min_segment = std::min(out.min_segment, T[j] - T[j - 1]);
    if (!(opts.delta_star < out.min_segment))
        throw PreconditionError("delta_star = " + fmt(opts.delta_star) + " is not below the shortest segment " +
                                fmt(out.min_segment));
    out.C_max = half + 1.875 * opts.C0 / opts.delta_star;

    out.times.assign(times.begin(), times.end());
    out.xi_tilde.resize(n);
    out.slope.resize(n);
    out.d_max = -std::numeric_limits<double>::infinity();
    out.d_min = std::numeric_limits<double>::infinity();
    out.slope_min = std::numeric_limits<double>::infinity();
    out.slope_max = -std::numeric_limits<double>::infinity();
    std::size_t seg = 0;  // segment [T[seg], T[seg+1])
    for (std::size_t j = 0; j < n; ++j) {
        const double t = times[j];
        while (seg + 1 < T.size() && t >= T[seg + 1]) ++seg;
        double value = base[seg] + opts.C0 + half * (t - T[seg]);
        double slope = half;
        if (seg + 1 < T.size()) {
            const double s = t - T[seg + 1];
            if (s > -opts.delta_star) {
                value = base[seg + 1] + corner_bridge(s, opts.c_B, opts.C0, opts.delta_star);
                slope = corner_bridge_slope(s, opts.c_B, opts.C0, opts.delta_star);
            }
        }
        out.xi_tilde[j] = value;
        out.slope[j] = slope;
        out.d_max = std::max(out.d_max, value - xi[j]);
        out.d_min = std::min(out.d_min, value - xi[j]);
        out.slope_min = std::min(out.slope_min, slope);
        out.slope_max = std::max(out.slope_max, slope);
    }
    return out;
}

PropagationOffsets measure_propagation_offsets(std::span<const double> times, std::span<const double> xi,
                                               double c_B, double c_I) {
    if (times.size() != xi.size() || times.size() < 2)
        throw PreconditionError("propagation offsets need matching samples");
    if (!(c_B > 0.0) || !(c_I > 0.0)) throw PreconditionError("propagation offsets need positive speeds");
    const double a = 0.75 * c_B, b = 1.25 * c_I;
    // t_B = max_{s<t} [(t - xi(t)/a) - (s - xi(s)/a)], t_I = max_{s<t} [(xi(t)/b - t) - (xi(s)/b - s)].
    PropagationOffsets out;
    double min_lo = times[0] - xi[0] / a;
    double min_hi = xi[0] / b - times[0];
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double lo = times[k] - xi[k] / a;
        const double hi = xi[k] / b - times[k];
        out.t_B = std::max(out.t_B, lo - min_lo);
        out.t_I = std::max(out.t_I, hi - min_hi);
        min_lo = std::min(min_lo, lo);
        min_hi = std::min(min_hi, hi);
    }
    return out;
}

double WaveProfileSnapshot::value_at(double offset) const {
    if (offsets.empty()) throw PreconditionError("empty profile");
    return numerics::monotone_cubic({offsets.front(), h, values}, offset);
}

WaveProfileSnapshot extract_profile(const Field& field, double xi, double half_width) {
    const double h = field.grid.spacing;
    if (!(half_width > 0.0)) throw PreconditionError("profile half width must be positive");
    if (xi - half_width < field.grid.left_edge() || xi + half_width > field.grid.right_edge()) {
        throw WindowError("profile span [" + fmt(xi - half_width) + ", " + fmt(xi + half_width) +
                          "] leaves the window [" + fmt(field.grid.left_edge()) + ", " +
                          fmt(field.grid.right_edge()) + "]");
    }
    WaveProfileSnapshot p;
    p.time = field.time;
    p.xi = xi;
    p.h = h;
    const auto K = static_cast<long>(std::floor(half_width / h + 1e-12));
    const auto samples = field.samples();
    for (long k = -K; k <= K; ++k) {
        const double off = static_cast<double>(k) * h;
        p.offsets.push_back(off);
        p.values.push_back(numerics::monotone_cubic(samples, xi + off));
    }
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        const double off = field.grid.x(i) - xi;
        if (off < -half_width - 2.0 * h || off > half_width + 2.0 * h) continue;
        p.node_offsets.push_back(off);
        p.node_values.push_back(field.values[i]);
    }
    return p;
}

namespace {

double speed_from_jet(const numerics::LocalJet& jet, const Reaction& model, double t, double floor) {
    if (!(std::abs(jet.first) >= floor))
        throw DegenerateInterfaceError("|psi_x| = " + fmt(std::abs(jet.first)) + " is below the steepness floor " +
                                       fmt(floor) + " at t = " + fmt(t));
    return -(jet.second + model.value(t, jet.value)) / jet.first;
}

numerics::LocalJet speed_jet(const numerics::UniformSamples& s, double x, SpeedStencil stencil) {
    if (stencil == SpeedStencil::centered) return numerics::cubic_jet(s, x);
    const long first = static_cast<long>(std::floor((x - s.origin) / s.h)) + 1;
    return numerics::cubic_jet_at(s, x, first);
}

}  // namespace

double speed_at_interface(const WaveProfileSnapshot& profile, const Reaction& model, double level_offset,
                          double steepness_floor, SpeedStencil stencil) {
    if (profile.node_offsets.size() < 4) throw PreconditionError("profile has fewer than 4 raw nodes");
    const numerics::UniformSamples raw{profile.node_offsets.front(), profile.h, profile.node_values};
    return speed_from_jet(speed_jet(raw, level_offset, stencil), model, profile.time, steepness_floor);
}

double speed_at_position(const Field& field, const Reaction& model, double xi, double steepness_floor,
                         SpeedStencil stencil) {
    return speed_from_jet(speed_jet(field.samples(), xi, stencil), model, field.time, steepness_floor);
}

TailFit fit_exponential_tail(const WaveProfileSnapshot& profile, double x_lo, double x_hi) {
    if (x_lo < 0.0) throw PreconditionError("tail fit range must start ahead of the interface (x_lo >= 0)");
    if (!(x_hi > x_lo)) throw PreconditionError("tail fit range is empty");
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < profile.offsets.size(); ++k) {
        const double x = profile.offsets[k];
        if (x < x_lo - 1e-12 || x > x_hi + 1e-12) continue;
        if (!(profile.values[k] > 0.0))
            throw PreconditionError("nonpositive profile value " + fmt(profile.values[k]) + " at x = " + fmt(x));
        xs.push_back(x);
        ys.push_back(std::log(profile.values[k]));
    }
    if (xs.size() < 3) throw PreconditionError("tail fit range holds fewer than 3 samples");
    const auto line = numerics::fit_line(xs, ys);
    TailFit fit;
    fit.rate = -line.slope;
    fit.prefactor = std::exp(line.intercept);
    fit.residual = line.rms_residual;
    fit.rate_stderr = line.slope_stderr;
    fit.samples = xs.size();
    return fit;
}

}  // namespace ignition
