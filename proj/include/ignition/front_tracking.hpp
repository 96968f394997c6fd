#pragma once

// Interface locations, the hitting-time modified interface, the interface
// speed formula, wave profiles in the interface frame and tail fits.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ignition/field.hpp"
#include "ignition/nonlinearity.hpp"

namespace ignition {

enum class InterfaceRefinement {
    linear,  // interpolate between the two bracketing nodes
    cubic,   // root of the four-point cubic through the bracket
};

/// Rightmost crossing of `level`: the largest node with u >= level, refined
/// towards its right neighbour. Throws NoCrossingError if u never straddles it.
double interface_location(const Field& field, double level,
                          InterfaceRefinement refinement = InterfaceRefinement::linear);

/// Time series of interface data produced by evolution.
struct FrontTrace {
    std::vector<double> times;
    double primary_level = 0.0;
    std::vector<double> xi;  // level primary_level (theta for ignition models)
    std::map<double, std::vector<double>> xi_by_level;
    std::vector<double> xi_tilde;        // filled by modified_interface
    std::vector<double> speed_formula;   // -(psi_xx + f(t,level)) / psi_x at the interface
    std::vector<double> speed_fd;        // centered difference of xi

    std::size_t size() const { return times.size(); }
    /// Recomputes speed_fd from xi (one-sided at the ends).
    void compute_fd_speed();
    /// Keeps samples with times in [t_begin, t_end].
    FrontTrace window(double t_begin, double t_end) const;
};

/// Writes t, xi_theta, xi_tilde, speed_formula, speed_fd and one column per
/// extra level ("xi_<level>"), 17 significant digits.
void write_trace_csv(const FrontTrace& trace, const std::string& path);

struct ModifiedInterfaceOptions {
    double c_B = 0.0;
    double C0 = 0.0;
    double delta_star = 0.0;
    /// Measured propagation offset t_I; when positive, C0 > (5/4) c_I t_I is enforced.
    double t_I = 0.0;
    double c_I = 0.0;
};

struct ModifiedInterface {
    std::vector<double> times;
    std::vector<double> xi_tilde;
    std::vector<double> slope;
    std::vector<double> hitting_times;  // T_1, T_2, ...
    double d_max = 0.0;                 // sup (xi_tilde - xi) over samples
    double d_min = 0.0;                 // inf (xi_tilde - xi) over samples
    double C_max = 0.0;                 // slope bound of the corner bridge
    double slope_min = 0.0;
    double slope_max = 0.0;
    double min_segment = 0.0;           // shortest T_n - T_{n-1}
};

/// Piecewise-linear envelope of slope c_B/2 restarted at every hitting time,
/// with each corner replaced on (T_n - delta_star, T_n) by a quintic bridge.
/// The construction starts at times.front(). Throws IncompleteTraceError if
/// xi never hits the first envelope, PreconditionError on bad options.
ModifiedInterface modified_interface(std::span<const double> times, std::span<const double> xi,
                                     const ModifiedInterfaceOptions& opts);

/// Corner function delta(s) on [-delta_star, 0]: from -(c_B/2) delta_star to
/// C0, slope c_B/2 at both ends, zero curvature at both ends.
double corner_bridge(double s, double c_B, double C0, double delta_star);
double corner_bridge_slope(double s, double c_B, double C0, double delta_star);

/// Offsets t_B, t_I of the two-sided propagation bound
///   (3 c_B/4)(t - t0 - t_B) <= xi(t) - xi(t0) <= (5 c_I/4)(t - t0 + t_I)
/// as the smallest offsets valid over all sample pairs s < t of the trace.
struct PropagationOffsets {
    double t_B = 0.0;
    double t_I = 0.0;
};
PropagationOffsets measure_propagation_offsets(std::span<const double> times,
                                               std::span<const double> xi, double c_B, double c_I);

/// u(t, x + xi) resampled on offsets k h, together with the raw nodes seen
/// from the interface.
struct WaveProfileSnapshot {
    double time = 0.0;
    double xi = 0.0;
    double h = 0.0;
    std::vector<double> offsets;
    std::vector<double> values;
    /// Node offsets x_i - xi and node values of the source field.
    std::vector<double> node_offsets;
    std::vector<double> node_values;

    double value_at(double offset) const;
};

/// Resamples u onto offsets k h, |k h| <= half_width, by monotone cubic
/// interpolation. Throws WindowError if the requested span leaves the window.
WaveProfileSnapshot extract_profile(const Field& field, double xi, double half_width);

enum class SpeedStencil {
    /// Four nodes around the interface.
    centered,
    /// The four nodes just ahead of the interface (extrapolated back to it).
    leading,
};

/// Interface speed -(psi_xx(0) + f(t, psi(0))) / psi_x(0), with derivatives of
/// the four-point cubic through raw nodes next to offset level_offset.
/// Throws DegenerateInterfaceError if |psi_x| is below steepness_floor.
double speed_at_interface(const WaveProfileSnapshot& profile, const Reaction& model,
                          double level_offset = 0.0, double steepness_floor = 1e-8,
                          SpeedStencil stencil = SpeedStencil::leading);

/// Same formula evaluated directly on a field at position xi.
double speed_at_position(const Field& field, const Reaction& model, double xi,
                         double steepness_floor = 1e-8,
                         SpeedStencil stencil = SpeedStencil::leading);

struct TailFit {
    double rate = 0.0;       // c-hat, magnitude of the log-slope
    double prefactor = 0.0;  // exp(intercept)
    double residual = 0.0;   // RMS residual of log psi
    double rate_stderr = 0.0;
    std::size_t samples = 0;
};

/// Least-squares fit of log psi against x on [x_lo, x_hi] (x_lo >= 0).
TailFit fit_exponential_tail(const WaveProfileSnapshot& profile, double x_lo, double x_hi);

}  // namespace ignition
