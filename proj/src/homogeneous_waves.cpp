#include "ignition/homogeneous_waves.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ignition/errors.hpp"
#include "ignition/numerics.hpp"

namespace ignition {

namespace {

using State = std::array<double, 2>;  // (phi, phi')

struct PhasePlane {
    const std::function<double(double)>& f;
    double c;

    State operator()(const State& y) const { return {y[1], -c * y[1] - f(y[0])}; }
};

State axpy(const State& y, double h, const State& k) { return {y[0] + h * k[0], y[1] + h * k[1]}; }

// One Dormand-Prince 5(4) step; returns the 5th-order solution and an error estimate.
std::pair<State, double> dopri_step(const PhasePlane& rhs, const State& y, double h) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    const State k1 = rhs(y);
    const State k2 = rhs(axpy(y, h * a21, k1));
    const State k3 = rhs({y[0] + h * (a31 * k1[0] + a32 * k2[0]), y[1] + h * (a31 * k1[1] + a32 * k2[1])});
    const State k4 = rhs({y[0] + h * (a41 * k1[0] + a42 * k2[0] + a43 * k3[0]),
                          y[1] + h * (a41 * k1[1] + a42 * k2[1] + a43 * k3[1])});
    const State k5 = rhs({y[0] + h * (a51 * k1[0] + a52 * k2[0] + a53 * k3[0] + a54 * k4[0]),
                          y[1] + h * (a51 * k1[1] + a52 * k2[1] + a53 * k3[1] + a54 * k4[1])});
    const State k6 = rhs({y[0] + h * (a61 * k1[0] + a62 * k2[0] + a63 * k3[0] + a64 * k4[0] + a65 * k5[0]),
                          y[1] + h * (a61 * k1[1] + a62 * k2[1] + a63 * k3[1] + a64 * k4[1] + a65 * k5[1])});
    State y5{};
    for (int i = 0; i < 2; ++i) {
        y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    const State k7 = rhs(y5);
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        err = std::max(err, std::fabs(e));
    }
    return {y5, err};
}

// Where the orbit leaving the saddle at 1 ends up.
struct ShotTarget {
    double floor_level;   // phi level where the shot is judged (0 or theta)
    double floor_limit;   // right limit of the wave (0 or theta_floor)
    bool linear_below;    // f vanishes below floor_level (ignition case)
};

struct Shot {
    enum class Outcome { overshoot, stall, unresolved } outcome = Outcome::unresolved;
    double residual = 0.0;  // > 0 overshoot, < 0 stall
};

double saddle_eigenvalue(const std::function<double(double)>& f, double c) {
    const double eps = 1e-6;
    const double fp = (f(1.0 + eps) - f(1.0 - eps)) / (2 * eps);
    return 0.5 * (-c + std::sqrt(c * c - 4.0 * fp));
}

State departure_state(const std::function<double(double)>& f, double c, double delta) {
    const double lam = saddle_eigenvalue(f, c);
    return {1.0 - delta, -lam * delta};
}

// Signed miss of the orbit: positive when it arrives at the floor too steep,
// negative when it turns back (phi' = 0) above the floor.
double judge(const State& y, double c, const ShotTarget& tgt, bool hit_floor) {
    if (hit_floor) {
        if (tgt.linear_below) return -(y[1] + c * (tgt.floor_level - tgt.floor_limit));
        return -y[1];
    }
    return -(y[0] - tgt.floor_level);
}

Shot shoot(const std::function<double(double)>& f, double c, const ShotTarget& tgt,
           const ShootingOptions& opts) {
    PhasePlane rhs{f, c};
    State y = departure_state(f, c, opts.departure);
    double h = 1e-3;
    double s = 0.0;
    const double s_max = 4000.0;
    while (s < s_max) {
        auto [y_new, err] = dopri_step(rhs, y, h);
        const double scale = opts.ode_tolerance * (1.0 + std::max(std::fabs(y[0]), std::fabs(y[1])));
        if (err > scale && h > 1e-12) {
            h *= std::max(0.2, 0.9 * std::pow(scale / err, 0.2));
            continue;
        }
        const bool floor_hit = y_new[0] <= tgt.floor_level;
        const bool stalled = y_new[1] >= 0.0;
        if (floor_hit || stalled) {
            // Shrink the accepted step onto the first event.
            double lo = 0.0, hi = h;
            State y_event = y_new;
            bool floor_first = floor_hit;
            for (int k = 0; k < 60; ++k) {
                const double mid = 0.5 * (lo + hi);
                const State ym = dopri_step(rhs, y, mid).first;
                if (ym[0] <= tgt.floor_level || ym[1] >= 0.0) {
                    hi = mid;
                    y_event = ym;
                    floor_first = ym[0] <= tgt.floor_level;
                } else {
                    lo = mid;
                }
            }
            Shot shot;
            shot.outcome = floor_first ? Shot::Outcome::overshoot : Shot::Outcome::stall;
            shot.residual = judge(y_event, c, tgt, floor_first);
            return shot;
        }
        y = y_new;
        s += h;
        if (std::fabs(y[1]) < 1e-14 && std::fabs(f(y[0])) < 1e-14) break;  // captured by an interior node
        const double grow = err > 0 ? 0.9 * std::pow(scale / err, 0.2) : 5.0;
        h = std::min(opts.max_step, h * std::clamp(grow, 0.2, 5.0));
    }
    // Orbit never reached the floor: it settled above it, which counts as a stall.
    Shot shot;
    if (y[0] > tgt.floor_level) {
        shot.outcome = Shot::Outcome::stall;
        shot.residual = judge(y, c, tgt, false);
    }
    return shot;
}

struct Trajectory {
    double step;
    std::vector<double> phi;  // phi(s_k), s_k = k * step, s = 0 is the departure point
    std::vector<double> dphi;
};

// Fixed-step RK4 trace of the orbit down to a cut level above the floor.
Trajectory trace_orbit(const std::function<double(double)>& f, double c, double cut_level,
                       const ShootingOptions& opts) {
    PhasePlane rhs{f, c};
    Trajectory tr;
    tr.step = opts.profile_dx / 4.0;
    const double h = tr.step;
    State y = departure_state(f, c, opts.departure);
    tr.phi.push_back(y[0]);
    tr.dphi.push_back(y[1]);
    for (int k = 0; k < 40000000 && y[0] > cut_level; ++k) {
        const State k1 = rhs(y);
        const State k2 = rhs(axpy(y, 0.5 * h, k1));
        const State k3 = rhs(axpy(y, 0.5 * h, k2));
        const State k4 = rhs(axpy(y, h, k3));
        for (int i = 0; i < 2; ++i) y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        if (y[1] >= 0.0) break;  // orbit turned back before the cut
        tr.phi.push_back(y[0]);
        tr.dphi.push_back(y[1]);
    }
    return tr;
}

HomogeneousWave build_wave(const std::function<double(double)>& f, double c, const ShotTarget& tgt,
                           WaveKind kind, double center_level, double residual,
                           const ShootingOptions& opts) {
    // Cut the numerical orbit before it reaches the floor and continue the
    // right tail analytically.
    const double cut = tgt.linear_below ? tgt.floor_level : tgt.floor_level + 1e-4;
    Trajectory tr = trace_orbit(f, c, cut, opts);
    if (tr.phi.size() < 8) throw SolverError("traveling-wave orbit too short to sample");
    const double lam_left = saddle_eigenvalue(f, c);

    // Right tail: phi = limit + A exp(-mu (s - s_end)).
    const double s_end = tr.step * static_cast<double>(tr.phi.size() - 1);
    const double phi_end = tr.phi.back();
    double mu;
    if (tgt.linear_below) {
        mu = c;  // phi'' + c phi' = 0 below theta
    } else {
        const double eps = 1e-6;
        const double fp0 = (f(eps) - f(-eps)) / (2 * eps);
        mu = 0.5 * (c + std::sqrt(c * c - 4.0 * fp0));
        if (!(mu > 0)) mu = std::max(c, 1e-6);  // degenerate floor: decay along strong direction
    }
    const double amp = phi_end - tgt.floor_limit;

    numerics::UniformSamples samples{0.0, tr.step, tr.phi};
    auto raw = [&](double s) {
        if (s <= 0.0) return 1.0 - opts.departure * std::exp(lam_left * s);
        if (s >= s_end) return tgt.floor_limit + amp * std::exp(-mu * (s - s_end));
        return numerics::cubic_lagrange(samples, s);
    };

    // Pin phi(s_c) = center_level (trajectory is strictly decreasing).
    double s_c;
    if (center_level >= tr.phi.front()) {
        s_c = std::log((1.0 - center_level) / opts.departure) / lam_left;
    } else if (center_level <= phi_end) {
        s_c = s_end + std::log(amp / (center_level - tgt.floor_limit)) / mu;
    } else {
        std::size_t k = 0;
        while (k + 1 < tr.phi.size() && tr.phi[k + 1] > center_level) ++k;
        s_c = numerics::bisect_root([&](double s) { return raw(s) - center_level; },
                                    tr.step * static_cast<double>(k),
                                    tr.step * static_cast<double>(k + 1), 1e-14);
    }

    const double tol = opts.edge_tolerance;
    const double s_left = std::min(0.0, std::log(tol / opts.departure) / lam_left);
    const double s_right = s_end + std::max(0.0, std::log(std::max(amp, tol) / tol) / mu);
    const double half = std::ceil(std::max(s_c - s_left, s_right - s_c) / opts.profile_dx) * opts.profile_dx;

    HomogeneousWave w;
    w.kind = kind;
    w.speed = c;
    w.left_limit = 1.0;
    w.right_limit = tgt.floor_limit;
    w.dx = opts.profile_dx;
    w.half_width = half;
    w.center_level = center_level;
    w.shooting_residual = residual;
    const auto n = static_cast<std::size_t>(std::llround(2.0 * half / opts.profile_dx)) + 1;
    w.profile.resize(n);
    for (std::size_t k = 0; k < n; ++k) w.profile[k] = raw(s_c + w.x(k));
    return w;
}

HomogeneousWave solve(const std::function<double(double)>& f, const ShotTarget& tgt, WaveKind kind,
                      double center_level, const ShootingOptions& opts) {
    auto residual = [&](double c) { return shoot(f, c, tgt, opts).residual; };

    if (!tgt.linear_below) {
        // Balanced bistable reaction: the standing wave c = 0.
        const Shot still = shoot(f, 0.0, tgt, opts);
        if (still.outcome == Shot::Outcome::unresolved || std::fabs(still.residual) < 1e-6) {
            return build_wave(f, 0.0, tgt, kind, center_level, std::fabs(still.residual), opts);
        }
    }

    double lo = opts.bracket_lo, hi = opts.bracket_hi;
    double r_lo = residual(lo), r_hi = residual(hi);
    if (!(r_lo > 0.0 && r_hi < 0.0)) {
        std::ostringstream os;
        os << "traveling-wave shooting: no sign change on the speed bracket [" << lo << ", " << hi
           << "] (residuals " << r_lo << ", " << r_hi << ")";
        throw SolverError(os.str());
    }
    while (hi - lo > opts.tolerance) {
        const double mid = 0.5 * (lo + hi);
        const double r = residual(mid);
        if (r > 0.0) {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
            r_hi = r;
        }
    }
    const double c = 0.5 * (lo + hi);
    return build_wave(f, c, tgt, kind, center_level, std::max(std::fabs(r_lo), std::fabs(r_hi)), opts);
}

}  // namespace

double HomogeneousWave::value(double xq) const {
    if (xq <= -half_width) return profile.front();
    if (xq >= half_width) return profile.back();
    numerics::UniformSamples s{-half_width, dx, profile};
    return numerics::cubic_lagrange(s, xq);
}

HomogeneousWave solve_bistable_wave(const std::function<double(double)>& f, double center_level,
                                    const ShootingOptions& opts) {
    if (!(center_level > 0.0 && center_level < 1.0)) {
        throw PreconditionError("center level must lie in (0,1)");
    }
    return solve(f, ShotTarget{0.0, 0.0, false}, WaveKind::bistable, center_level, opts);
}

HomogeneousWave solve_ignition_floor_wave(const std::function<double(double)>& f, double theta,
                                          double theta_floor, const ShootingOptions& opts) {
    if (!(theta_floor > 0.0 && theta_floor < theta)) {
        throw PreconditionError("ignition floor must lie in (0, theta)");
    }
    return solve(f, ShotTarget{theta, theta_floor, true}, WaveKind::ignition_floor,
                 0.5 * (1.0 + theta_floor), opts);
}

HomogeneousWave solve_ignition_wave(const std::function<double(double)>& f, double theta,
                                    const ShootingOptions& opts) {
    if (!(theta > 0.0 && theta < 1.0)) throw PreconditionError("theta must lie in (0,1)");
    return solve(f, ShotTarget{theta, 0.0, true}, WaveKind::ignition_floor, 0.5, opts);
}

void write_profile_csv(const HomogeneousWave& wave, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << "x,phi\n" << std::setprecision(17);
    for (std::size_t k = 0; k < wave.profile.size(); ++k) os << wave.x(k) << ',' << wave.profile[k] << '\n';
    if (!os) throw IoError("write failed for " + path);
}

}  // namespace ignition
