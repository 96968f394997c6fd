#pragma once

// IMEX finite differences for u_t = u_xx + f(t,u) on a moving window with
// Dirichlet values 1 (left) and 0 (right).

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ignition/field.hpp"
#include "ignition/front_tracking.hpp"
#include "ignition/nonlinearity.hpp"
#include "ignition/numerics.hpp"

namespace ignition {

enum class TimeScheme {
    /// (I - dt D2) u^{n+1} = u^n + dt f(t_n, u^n). Preserves order when dt <= 1/C_Lip.
    imex_euler,
    /// Crank-Nicolson diffusion, trapezoidal reaction with an IMEX Euler predictor. Second
    /// order in dt but not order preserving; used for reference solutions.
    imex_trapezoid,
};

enum class Boundary { dirichlet_1_0 };

struct SolverConfig {
    double h = 0.05;
    double dt = 0.01;
    double window_width = 120.0;
    /// Recenter once the tracked interface is this many cells away from the window center.
    int recenter_threshold = 20;
    Boundary boundary = Boundary::dirichlet_1_0;
    double max_lip = 0.0;
    TimeScheme scheme = TimeScheme::imex_euler;
    /// Fail when the tracked interface comes this close (in cells) to an edge.
    int edge_margin = 10;

    /// dt = min(0.2 h, 0.5 / C_Lip).
    static SolverConfig defaults_for(double lipschitz, double h = 0.05, double window_width = 120.0);
    std::size_t node_count() const;
    /// Throws ConfigError on dt > 1/max_lip (euler scheme) or nonpositive sizes.
    void validate() const;
};

/// Reusable stepper: caches the tridiagonal factorization and work buffers.
class Stepper {
public:
    Stepper(const SolverConfig& cfg, std::size_t count);
    void advance(Field& field, const Reaction& model);
    const SolverConfig& config() const { return cfg_; }

private:
    SolverConfig cfg_;
    std::size_t count_;
    numerics::TridiagonalFactorization implicit_;
    numerics::TridiagonalFactorization predictor_factor_;
    std::vector<double> reaction_;
    std::vector<double> rhs_;
    std::vector<double> predictor_;
    std::vector<double> reaction_next_;
};

/// One step of `cfg.scheme`. Throws ConfigError when cfg is invalid for the model.
Field step(const Field& field, const Reaction& model, const SolverConfig& cfg);

/// Number of whole steps of size dt covering [t0, t1], rounded.
std::size_t steps_between(double t0, double t1, double dt);

/// Shift the window by `cells` lattice cells; entrant nodes take the boundary values.
void shift_window(Field& field, std::int64_t cells);

struct EvolveOptions {
    /// Level whose crossing drives recentring and the edge check.
    double track_level = 0.5;
    std::vector<double> extra_levels;
    /// Record the trace every this many steps (0 disables tracing).
    std::size_t record_every = 1;
    bool recenter = true;
    bool speed_formula = true;
    /// Called after every accepted step (and once for the initial state).
    std::function<void(const Field&)> observer;
};

struct EvolveResult {
    Field field;
    FrontTrace trace;
    /// max over steps of |u_1 - 1| and |u_{N-2}|, the node values beside the clamped edges.
    double edge_drift = 0.0;
    std::size_t steps = 0;
    std::size_t recenterings = 0;
};

/// Advance to `until` (which must exceed field.time) in steps of cfg.dt. Times
/// are computed as t_start + k dt. Throws WindowError when the interface gets
/// within cfg.edge_margin cells of an edge.
EvolveResult evolve(Field field, const Reaction& model, const SolverConfig& cfg, double until,
                    const EvolveOptions& opts = {});

/// Samples u(t0 + k dt, left_edge + i h), k = 0..K-1, i = 0..N-1.
struct SpaceTimeSamples {
    double t0 = 0.0;
    double dt = 0.0;
    double left_edge = 0.0;
    double h = 0.0;
    std::vector<std::vector<double>> slices;
};

/// R = (u^{k+1} - u^{k-1}) / (2 dt) - D_xx u^k - f(t_k, u^k) at slices
/// k = 1..K-2 and interior nodes. Throws PreconditionError with fewer than 3
/// slices or ragged data.
struct ResidualField {
    double t0 = 0.0;  // time of the first residual slice
    double dt = 0.0;
    double left_edge = 0.0;  // position of the first residual node
    double h = 0.0;
    std::vector<std::vector<double>> values;
    double min() const;
    double max() const;
};
ResidualField pde_residual(const SpaceTimeSamples& candidate, const Reaction& model);

/// Writes "x,u" rows with 17 significant digits.
void write_field_csv(const Field& field, const std::string& path);

}  // namespace ignition
