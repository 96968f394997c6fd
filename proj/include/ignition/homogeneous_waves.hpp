#pragma once

// Classical traveling waves phi(x - c t) of autonomous comparison equations
// u_t = u_xx + f(u), found by phase-plane shooting with speed bisection.

#include <functional>
#include <string>
#include <vector>

namespace ignition {

enum class WaveKind { bistable, ignition_floor };

struct ShootingOptions {
    /// Bisection stops once the speed bracket is narrower than this.
    double tolerance = 1e-9;
    double bracket_lo = 1e-4;
    double bracket_hi = 10.0;
    /// Relative/absolute tolerance of the adaptive Dormand-Prince integrator.
    double ode_tolerance = 1e-11;
    /// Largest phase-plane step.
    double max_step = 0.05;
    /// Departure distance from the saddle at u = 1 along its unstable manifold.
    double departure = 1e-7;
    /// Spacing of the exported profile samples.
    double profile_dx = 0.01;
    /// Profile edges are pushed out until both tails are this close to their limits.
    double edge_tolerance = 1e-8;
};

/// Monotone traveling profile sampled on x_k = -half_width + k dx.
struct HomogeneousWave {
    WaveKind kind = WaveKind::bistable;
    double speed = 0.0;
    double left_limit = 1.0;
    double right_limit = 0.0;
    double dx = 0.0;
    double half_width = 0.0;
    std::vector<double> profile;
    /// Distance of the shooting endpoint from the target equilibrium at the returned speed.
    double shooting_residual = 0.0;
    /// Level pinned at x = 0.
    double center_level = 0.5;

    double x(std::size_t k) const { return -half_width + dx * static_cast<double>(k); }
    /// Cubic interpolation on the samples; tails continue with the limits.
    double value(double x) const;
};

/// Wave of u_t = u_xx + f(u) connecting 1 (left) to 0 (right) for bistable f.
/// The profile is pinned so that phi(0) = center_level. Throws SolverError on
/// bracket failure.
HomogeneousWave solve_bistable_wave(const std::function<double(double)>& f,
                                    double center_level, const ShootingOptions& opts = {});

/// Wave connecting 1 (left) to theta_floor (right) for an ignition reaction f
/// vanishing on [0, theta]. Pinned at phi(0) = (1 + theta_floor)/2.
/// theta_floor must lie in (0, theta).
HomogeneousWave solve_ignition_floor_wave(const std::function<double(double)>& f, double theta,
                                          double theta_floor, const ShootingOptions& opts = {});

/// Same construction with right limit 0: the classical ignition wave.
HomogeneousWave solve_ignition_wave(const std::function<double(double)>& f, double theta,
                                    const ShootingOptions& opts = {});

/// Writes "x,phi" rows with 17 significant digits.
void write_profile_csv(const HomogeneousWave& wave, const std::string& path);

}  // namespace ignition
