#pragma once

// Experiment drivers: stability, uniqueness, monotonicity and tail decay,
// recurrence of the interface speed, and the average propagation speed.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ignition/front_tracking.hpp"
#include "ignition/nonlinearity.hpp"
#include "ignition/pde_core.hpp"
#include "ignition/supersub.hpp"

namespace ignition {

enum class ExperimentKind { stability, uniqueness, monotonicity, recurrence, average_speed };

std::string to_string(ExperimentKind kind);
/// Throws ConfigError for unknown names.
ExperimentKind experiment_kind_from_string(const std::string& name);

/// theta = 0.25, theta* = 0.75, g(t) = 1 + 0.4 sin(2 pi t).
IgnitionNonlinearity default_model();

/// u0 = u_ref + amplitude exp(-(x - xi - center)^2 / (2 width^2)), clipped to [0, 1].
struct PerturbationRecipe {
    double amplitude = 0.05;
    double center = 0.0;
    double width = 2.0;
    /// Decay rate alpha0 of the admissible perturbation class.
    double alpha0 = 1.0;
    /// Center jitter: a seeded uniform draw in [-jitter, jitter] is added to `center`.
    double jitter = 0.0;
    /// When positive, amplitude = epsilon0_multiple * epsilon0 of the derived constants.
    double epsilon0_multiple = 0.0;
};

enum class DatumKind { step, logistic };

/// step: 1 for x < offset, 0 after. logistic: 1 / (1 + exp((x - offset) / width)).
struct InitialDatum {
    DatumKind kind = DatumKind::step;
    double offset = 0.0;
    double width = 1.0;

    double operator()(double x) const;
};

struct SpectralWindow {
    /// Analysed band [0, f_max].
    double f_max = 7.5;
    /// Module orders |n_i| <= module_order for each forcing frequency.
    int module_order = 3;
    /// Statistical floor = median + floor_mads * MAD of log10 power.
    double floor_mads = 6.0;
    /// Peaks more than this many decades below the zero-frequency power are
    /// not counted (<= 0 disables).
    double dynamic_range = 9.0;
    double almost_period_epsilon = 0.02;
    double almost_period_max = 50.0;
};

struct Tolerances {
    double final_distance = 1e-3;
    double r_squared = 0.95;
    double gap_fraction = 0.8;
    double uniqueness_distance = 1e-3;
    double tail_rate_slack = 0.05;
    double recurrence = 1e-2;
    double cauchy = 1e-2;
    double speed_bound_slack = 0.02;
};

struct ExperimentSpec {
    IgnitionNonlinearity model = default_model();
    SolverConfig solver = SolverConfig::defaults_for(default_model().lipschitz());
    ExperimentKind kind = ExperimentKind::stability;
    /// Post burn-in horizon; <= 0 picks the kind default.
    double horizon = 0.0;
    /// <= 0 picks 40 / c_B.
    double burn_in = 0.0;
    /// Floor of the upper comparison wave; <= 0 picks theta / 4.
    double theta_floor = 0.0;
    /// Extra levels tracked in emitted traces.
    std::vector<double> levels;

    PerturbationRecipe perturbation;
    InitialDatum first{DatumKind::step, 0.0, 1.0};
    InitialDatum second{DatumKind::logistic, 5.0, 2.0};

    /// Output cadence of distances and snapshots.
    double sample_every = 0.5;
    /// Stability fit starts this long after the perturbation.
    double fit_start = 20.0;
    /// Distances below this are excluded from the fit.
    double fit_floor = 1e-8;
    std::size_t monotonicity_snapshots = 50;
    double monotonicity_spacing = 0.2;
    /// Tail fit range ahead of the interface and the sampled range of the tail bound.
    double tail_lo = 2.0;
    double tail_hi = 20.0;
    double tail_check = 30.0;
    /// First horizon of the doubling sequence.
    double speed_base_horizon = 25.0;
    /// Half-width of the aligned profile comparison.
    double compare_half_width = 30.0;
    /// Modified interface parameters.
    double interface_C0 = 1.0;
    double interface_delta = 0.5;

    SpectralWindow spectral;
    Tolerances tol;
    std::uint64_t seed = 0;
    /// Filled by the caller with the hash of the source configuration.
    std::string config_hash;
};

/// One judged quantity: passed == (value `relation` tolerance).
struct Check {
    std::string name;
    double value = 0.0;
    std::string relation;  // "<", "<=", ">", ">=" or "in"
    double tolerance = 0.0;
    /// Upper end for relation "in" (tolerance is the lower end).
    double tolerance_hi = 0.0;
    bool passed = false;
};

struct SpectralPeak {
    double frequency = 0.0;
    double power = 0.0;
    /// Nearest module frequency m nu_1 + n nu_2 + ...
    double nearest = 0.0;
    double distance_bins = 0.0;
    bool in_module = false;
};

struct Spectrum {
    std::vector<double> frequency;
    std::vector<double> power;
    double bin_width = 0.0;
    /// Effective floor: max of the statistical floor and the dynamic-range floor.
    double floor = 0.0;
    double floor_statistical = 0.0;
    std::vector<double> module;
    std::vector<SpectralPeak> peaks;
    /// Largest power / floor over local maxima outside the module (below the floor or not).
    double off_module_margin = 0.0;
};

struct Provenance {
    std::string config_hash;
    std::string tool_version;
    double h = 0.0;
    double dt = 0.0;
    double window_width = 0.0;
    std::uint64_t seed = 0;
    double runtime_seconds = 0.0;
    std::string started;
    std::string finished;
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::stability;
    std::map<std::string, double> quantities;
    /// Columns named "<group>.<column>"; columns of one group share a length.
    std::map<std::string, std::vector<double>> series;
    std::vector<Check> checks;
    /// Markers such as "trivially-stable" or "inconclusive".
    std::vector<std::string> flags;
    std::vector<std::string> notes;
    std::optional<FrontTrace> trace;
    std::optional<Spectrum> spectrum;
    std::optional<WaveProfileSnapshot> profile;
    HypothesisReport hypotheses;
    std::optional<SqueezeConstants> constants;
    Provenance provenance;

    /// All checks passed and no "inconclusive" flag.
    bool passed() const;
    bool has_flag(const std::string& flag) const;
    const Check* check(const std::string& name) const;
};

/// Burned-in reference front shared by the drivers.
struct ReferenceFront {
    HypothesisReport hypotheses;
    double c_B = 0.0;
    double c_I = 0.0;
    double theta_floor = 0.0;
    double burn_in = 0.0;
    SolverConfig solver;
    Field field;
    std::optional<SqueezeConstants> constants;
    std::string constants_error;
};

/// Throws HypothesisError for a model that fails validation, ConfigError for bad solver settings.
ReferenceFront prepare_reference(const ExperimentSpec& spec);

/// inf over zeta of sup_x |u(x) - ref(x - zeta)| on the overlap of the windows
/// (golden section on [zeta0 - 1, zeta0 + 1], zeta0 from the 0.5 crossings).
struct AlignedDistance {
    double distance = 0.0;
    double shift = 0.0;
};
AlignedDistance aligned_distance(const Field& u, const Field& ref);

/// sup over |s| <= half_width of |a(xi_a + s) - b(xi_b + s)|.
double profile_distance(const Field& a, double xi_a, const Field& b, double xi_b, double half_width);

/// Hann-windowed periodogram of uniformly sampled data restricted to
/// [0, window.f_max]; peaks are maxima over +-2 bins above the floor.
Spectrum periodogram(const std::vector<double>& samples, double sample_spacing,
                     const std::vector<double>& module, const SpectralWindow& window);

/// {sum n_i nu_i : |n_i| <= order}, nonnegative values only, sorted and deduplicated.
std::vector<double> frequency_module(const std::vector<double>& base, int order);

struct AlmostPeriods {
    /// Centers of the maximal runs of tau with sup_t |s(t + tau) - s(t)| < epsilon.
    std::vector<double> taus;
    std::vector<double> defects;
    double max_gap = 0.0;
};
AlmostPeriods almost_periods(const std::vector<double>& samples, double sample_spacing,
                             double epsilon, double tau_max, double tau_min = 0.5);

ExperimentReport run_stability(const ExperimentSpec& spec);
ExperimentReport run_uniqueness(const ExperimentSpec& spec);
ExperimentReport run_monotonicity_decay(const ExperimentSpec& spec);
ExperimentReport run_recurrence(const ExperimentSpec& spec);
ExperimentReport run_average_speed(const ExperimentSpec& spec);

std::string tool_version();

/// Dispatch on spec.kind.
ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace ignition
