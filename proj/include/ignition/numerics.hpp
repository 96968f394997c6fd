#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ignition::numerics {

/// LU factorization of a constant-coefficient tridiagonal matrix.
///
/// Row i reads  lower * x[i-1] + diag * x[i] + upper * x[i+1] = rhs[i].
/// The factorization is computed once and reused for every solve, which is
/// the common case for implicit diffusion with a fixed time step.
class TridiagonalFactorization {
public:
    TridiagonalFactorization() = default;
    TridiagonalFactorization(std::size_t n, double lower, double diag, double upper);

    /// Solves in place; rhs.size() must equal size().
    void solve(std::span<double> rhs) const;

    std::size_t size() const noexcept { return pivots_.size(); }

private:
    std::vector<double> pivots_;    // modified diagonal
    std::vector<double> c_star_;    // eliminated super-diagonal
    double lower_ = 0.0;
};

/// General Thomas algorithm for non-constant coefficients.
std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs);

/// Samples on a uniform lattice x_i = origin + i*h with constant extension
/// beyond both ends.
struct UniformSamples {
    double origin;
    double h;
    std::span<const double> values;
};

/// Four-point Lagrange interpolation (third order) on a uniform lattice.
double cubic_lagrange(const UniformSamples& s, double x);

/// Value, first and second derivative of the four-point Lagrange cubic
/// through the nodes bracketing x.
struct LocalJet {
    double value;
    double first;
    double second;
};
LocalJet cubic_jet(const UniformSamples& s, double x);

/// Same jet from the fixed stencil first..first+3 (clamped into the data);
/// x may lie outside the stencil.
LocalJet cubic_jet_at(const UniformSamples& s, double x, long first);

/// Monotone piecewise-cubic Hermite interpolation (Fritsch-Butland slopes).
double monotone_cubic(const UniformSamples& s, double x);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double rms_residual = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Bisection for a sign change of f on [a, b]; f(a) and f(b) must differ in sign.
double bisect_root(const std::function<double(double)>& f, double a, double b,
                   double tol = 1e-13, int max_iter = 200);

/// Golden-section minimization of a unimodal f on [a, b].
double golden_section_minimize(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-10, int max_iter = 200);

double median(std::vector<double> v);

/// Median absolute deviation (unscaled).
double median_absolute_deviation(std::span<const double> v);

/// Composite Simpson rule with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000);

}  // namespace ignition::numerics
