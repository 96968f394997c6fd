#pragma once

// Squeezing constants, the cutoff Gamma and the exponentially shrinking
// super/sub-solutions built from a reference front.

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "ignition/field.hpp"
#include "ignition/nonlinearity.hpp"

namespace ignition {

struct SqueezeConstants {
    double L0 = 0.0;
    double alpha = 0.0;
    double M = 0.0;
    double omega = 0.0;
    double epsilon0 = 0.0;
    double C_Lip = 0.0;
    double C_Gamma = 0.0;
    double C_L0 = 0.0;
    double beta = 0.0;
    double c_B = 0.0;
    double c_0 = 0.0;
    // Inputs and measurements the bundle was derived from.
    double alpha0 = 0.0;
    double theta = 0.0;
    double theta_star = 0.0;
    double d_max = 0.0;
    double L_measured = 0.0;

    /// alpha c_B / 2 - alpha^2, diagnostic only.
    double nu() const { return alpha * c_B / 2.0 - alpha * alpha; }
};

namespace squeeze {
double alpha(double alpha0, double c_B, double c_0);
/// min{beta, alpha c_B / 4 - alpha^2, C_Lip}
double omega(double beta, double alpha, double c_B, double C_Lip);
double M(double C_Lip, double C_Gamma, double C_L0);
double epsilon0(double theta, double theta_star, double c_B, double M);
}  // namespace squeeze

/// Nonincreasing C^2 cutoff: 1 on (-inf, -L0-1], exp(-alpha (x - L0)) on
/// [L0+1, inf). Inside, a quintic Hermite piece on [bridge_start, L0+1]
/// (as wide as monotonicity allows) and 1 to its left.
class GammaBridge {
public:
    double operator()(double x) const;
    double derivative(double x) const;
    double second(double x) const;

    double alpha() const noexcept { return alpha_; }
    double L0() const noexcept { return L0_; }
    double C_Gamma() const noexcept { return C_Gamma_; }
    double bridge_start() const noexcept { return start_; }
    double bridge_width() const noexcept { return width_; }
    /// Monomial coefficients in tau = (x - bridge_start) / bridge_width.
    const std::array<double, 6>& coefficients() const noexcept { return coef_; }

private:
    friend GammaBridge build_gamma(double alpha, double L0);
    double alpha_ = 0.0;
    double L0_ = 0.0;
    double C_Gamma_ = 0.0;
    double start_ = 0.0;
    double width_ = 0.0;
    std::array<double, 6> coef_{};
};

/// C_Gamma is the sampled max |Gamma''| (bridge at 10^4 points plus the
/// exponential branch at L0+1). Throws PreconditionError if no monotone
/// bridge exists.
GammaBridge build_gamma(double alpha, double L0);
inline GammaBridge build_gamma(const SqueezeConstants& c) { return build_gamma(c.alpha, c.L0); }

/// Converged front snapshots with their theta-level interface.
struct ReferenceWaveData {
    std::vector<Field> snapshots;
    std::vector<double> xi;
    /// sup (xi_tilde - xi) of the modified interface on the same run.
    double d_max = 0.0;
};

struct ConstantInputs {
    double theta = 0.25;
    double theta_star = 0.75;
    double beta = 0.0;
    double C_Lip = 0.0;
    double c_B = 0.0;
    double alpha0 = 0.0;
    /// Range ahead of the interface used for the tail rate c_0.
    double tail_lo = 2.0;
    double tail_hi = 20.0;
};

/// Throws DerivationError when condition-L cannot be met inside the windows
/// or the front is not strictly decreasing on the steepness band.
SqueezeConstants derive_constants(const ReferenceWaveData& ref, const ConstantInputs& in);

struct SandwichShifts {
    double zeta_minus = 0.0;
    double zeta_plus = 0.0;
    double epsilon = 0.0;
    /// Shifts found before gap widening.
    double raw_minus = 0.0;
    double raw_plus = 0.0;
};

/// Smallest zeta+ and largest zeta- such that on u0's nodes
///   ref(x - zeta-) - eps Gamma(x - xi_tilde0 - zeta-) <= u0 <= ref(x - zeta+) + eps Gamma(x - xi_tilde0 - zeta+),
/// then widened symmetrically to zeta+ - zeta- >= eps. Throws SandwichError
/// with the worst offset when no shift within +-scan works.
SandwichShifts initial_sandwich(const Field& u0, const Field& reference, double xi_tilde0,
                                const GammaBridge& gamma, double epsilon, double scan = 0.0);

/// Reference solution on consecutive steps t_k = t0 + k dt, with xi_tilde at each.
struct ReferenceSeries {
    std::vector<Field> fields;
    std::vector<double> xi_tilde;
    double dt = 0.0;
};

struct EnvelopeResiduals {
    double min_upper = 0.0;  // min over the grid of the residual of u+
    double max_lower = 0.0;  // max over the grid of the residual of u-
    double argmin_upper_t = 0.0;
    double argmin_upper_x = 0.0;
    double argmax_lower_t = 0.0;
    double argmax_lower_x = 0.0;
    std::size_t slices = 0;
};

/// Residuals of u+-(t,x) = ref(t, x - zeta+-(t)) +- q(t) Gamma(x - xi_tilde(t) - zeta+-(t)),
/// q = eps exp(-omega (t - t0)), zeta+-(t) = zeta0+- +- (M eps / omega)(1 - exp(-omega (t - t0))),
/// evaluated with pde_residual on each reference window (minus `margin_cells`
/// at both edges). Throws PreconditionError if the series is shorter than the horizon.
EnvelopeResiduals envelope_residuals(const SqueezeConstants& consts, const GammaBridge& gamma,
                                     const ReferenceSeries& ref, const Reaction& model,
                                     double zeta_minus0, double zeta_plus0, double epsilon,
                                     double horizon, std::size_t margin_cells = 40);

enum class ShiftSide { upper, lower };

/// Upper: smallest zeta with u <= ref(. - zeta) + q at every node of u.
/// Lower: largest zeta with u >= ref(. - zeta) - q. Bisection to `tol`.
/// zeta is searched on center +- scan, center from the 0.5 crossings; nodes
/// whose shifted position leaves the reference window for some zeta in that
/// range are not compared (scan <= 0 picks a quarter of the window).
/// band > 0 further restricts the comparison to |x - xi_0.5(u)| <= band.
/// Throws RangeError if the inequality fails across the scan range.
double tightest_shift(const Field& u, const Field& reference, double q, ShiftSide side,
                      double scan = 0.0, double tol = 1e-10, double band = 0.0);

}  // namespace ignition
