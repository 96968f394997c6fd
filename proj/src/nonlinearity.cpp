#include "ignition/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <numbers>
#include <random>
#include <sstream>

#include "ignition/errors.hpp"
#include "ignition/numerics.hpp"

namespace ignition {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string format_point(double t, double u) {
    std::ostringstream os;
    os << "(t=" << t << ", u=" << u << ")";
    return os.str();
}

}  // namespace

void Reaction::apply(double t, std::span<const double> u, std::span<double> out) const {
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = value(t, u[i]);
}

AutonomousReaction::AutonomousReaction(std::function<double(double)> f, double lipschitz)
    : f_(std::move(f)), lip_(lipschitz) {
    if (!(lipschitz > 0.0)) throw PreconditionError("Lipschitz constant must be positive");
}

// ---------------------------------------------------------------------------
// Forcing

std::string to_string(ForcingKind kind) {
    switch (kind) {
        case ForcingKind::constant: return "constant";
        case ForcingKind::periodic: return "periodic";
        case ForcingKind::quasi_periodic: return "quasi_periodic";
        case ForcingKind::random_phase_sum: return "random_phase_sum";
    }
    return "constant";
}

ForcingKind forcing_kind_from_string(const std::string& name) {
    if (name == "constant") return ForcingKind::constant;
    if (name == "periodic") return ForcingKind::periodic;
    if (name == "quasi_periodic") return ForcingKind::quasi_periodic;
    if (name == "random_phase_sum") return ForcingKind::random_phase_sum;
    throw ConfigError("unknown forcing kind '" + name +
                      "' (expected constant, periodic, quasi_periodic, random_phase_sum)");
}

ForcingSignal::ForcingSignal(ForcingKind kind, double base_level,
                             std::vector<ForcingComponent> components)
    : kind_(kind), base_(base_level), components_(std::move(components)) {
    if (!std::isfinite(base_level)) throw ConfigError("forcing base_level must be finite");
    for (const auto& c : components_) {
        if (!std::isfinite(c.frequency) || !std::isfinite(c.amplitude) ||
            !std::isfinite(c.phase)) {
            throw ConfigError("forcing component values must be finite");
        }
        if (c.frequency < 0.0) throw ConfigError("forcing frequencies must be nonnegative");
    }
    if (kind_ == ForcingKind::constant && !components_.empty()) {
        throw ConfigError("constant forcing takes no components");
    }
}

ForcingSignal ForcingSignal::constant(double level) {
    return ForcingSignal(ForcingKind::constant, level, {});
}

ForcingSignal ForcingSignal::periodic(double base_level, double amplitude, double frequency,
                                      double phase) {
    return ForcingSignal(ForcingKind::periodic, base_level, {{frequency, amplitude, phase}});
}

ForcingSignal ForcingSignal::quasi_periodic(double base_level,
                                            std::vector<ForcingComponent> components) {
    return ForcingSignal(ForcingKind::quasi_periodic, base_level, std::move(components));
}

ForcingSignal ForcingSignal::random_phase_sum(double base_level,
                                              std::span<const double> frequencies,
                                              std::span<const double> amplitudes,
                                              std::uint64_t seed) {
    if (frequencies.size() != amplitudes.size()) {
        throw ConfigError("random_phase_sum needs one amplitude per frequency");
    }
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    std::vector<ForcingComponent> comps;
    comps.reserve(frequencies.size());
    for (std::size_t k = 0; k < frequencies.size(); ++k) {
        comps.push_back({frequencies[k], amplitudes[k], phase(engine)});
    }
    return ForcingSignal(ForcingKind::random_phase_sum, base_level, std::move(comps));
}

double ForcingSignal::operator()(double t) const {
    double g = base_;
    for (const auto& c : components_) g += c.amplitude * std::sin(kTwoPi * c.frequency * t + c.phase);
    return g;
}

double ForcingSignal::derivative(double t) const {
    double dg = 0.0;
    for (const auto& c : components_) {
        dg += c.amplitude * kTwoPi * c.frequency * std::cos(kTwoPi * c.frequency * t + c.phase);
    }
    return dg;
}

double ForcingSignal::lower_bound() const {
    double s = 0.0;
    for (const auto& c : components_) s += std::fabs(c.amplitude);
    return base_ - s;
}

double ForcingSignal::upper_bound() const {
    double s = 0.0;
    for (const auto& c : components_) s += std::fabs(c.amplitude);
    return base_ + s;
}

ForcingSignal ForcingSignal::shifted(double tau) const {
    ForcingSignal out = *this;
    for (auto& c : out.components_) {
        c.phase = std::fmod(c.phase + kTwoPi * c.frequency * tau, kTwoPi);
        if (c.phase < 0) c.phase += kTwoPi;
    }
    return out;
}

std::optional<double> ForcingSignal::common_period() const {
    double fmin = 0.0;
    for (const auto& c : components_) {
        if (c.frequency > 0 && c.amplitude != 0.0 && (fmin == 0.0 || c.frequency < fmin)) {
            fmin = c.frequency;
        }
    }
    if (fmin == 0.0) return std::nullopt;
    // Every ratio f / fmin must be p / q with q <= 1000; the period is lcm(q) / fmin.
    std::int64_t denominators = 1;
    for (const auto& c : components_) {
        if (c.frequency <= 0 || c.amplitude == 0.0) continue;
        const double ratio = c.frequency / fmin;
        std::int64_t q = 1;
        while (q <= 1000 && std::fabs(ratio * q - std::round(ratio * q)) > 1e-12 * ratio * q) ++q;
        if (q > 1000) return std::nullopt;
        denominators = std::lcm(denominators, q);
        if (denominators > 1000) return std::nullopt;
    }
    return static_cast<double>(denominators) / fmin;
}

// ---------------------------------------------------------------------------
// Ignition nonlinearity

IgnitionNonlinearity::IgnitionNonlinearity(double theta, double theta_star,
                                           ForcingSignal forcing, ReactionShape shape)
    : theta_(theta), theta_star_(theta_star), forcing_(std::move(forcing)),
      shape_(std::move(shape)) {
    if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0,1)");
    if (!(theta_star > theta && theta_star < 1.0)) {
        throw ConfigError("theta_star must lie in (theta,1)");
    }
    if (shape_.kind == ReactionShapeKind::custom && !shape_.custom) {
        throw ConfigError("custom reaction shape needs a callable");
    }
    const double gmax = std::max(std::fabs(forcing_.upper_bound()), std::fabs(forcing_.lower_bound()));
    if (shape_.kind == ReactionShapeKind::quadratic_ignition) {
        lip_ = gmax * (1.0 - theta_);
    } else {
        double m = 0.0;
        for (int i = 0; i <= 2400; ++i) {
            m = std::max(m, std::fabs(shape_derivative(1.2 * i / 2400.0)));
        }
        lip_ = gmax * m;
    }
}

double IgnitionNonlinearity::shape_value(double u) const {
    if (shape_.kind == ReactionShapeKind::custom) return shape_.custom(u);
    if (u <= theta_) return 0.0;
    if (u <= 1.0) return (u - theta_) * (1.0 - u);
    return -(1.0 - theta_) * (u - 1.0);
}

double IgnitionNonlinearity::shape_derivative(double u) const {
    if (shape_.kind == ReactionShapeKind::custom) {
        const double eps = 1e-6;
        return (shape_.custom(u + eps) - shape_.custom(u - eps)) / (2.0 * eps);
    }
    // Right derivative at the kink u = theta.
    if (u < theta_) return 0.0;
    if (u <= 1.0) return 1.0 + theta_ - 2.0 * u;
    return -(1.0 - theta_);
}

double IgnitionNonlinearity::value(double t, double u) const {
    return forcing_(t) * shape_value(u);
}

void IgnitionNonlinearity::apply(double t, std::span<const double> u,
                                 std::span<double> out) const {
    const double g = forcing_(t);
    if (shape_.kind == ReactionShapeKind::quadratic_ignition) {
        const double th = theta_;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double v = u[i];
            double f0;
            if (v <= th) f0 = 0.0;
            else if (v <= 1.0) f0 = (v - th) * (1.0 - v);
            else f0 = -(1.0 - th) * (v - 1.0);
            out[i] = g * f0;
        }
        return;
    }
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = g * shape_value(u[i]);
}

Evaluation IgnitionNonlinearity::evaluate(double t, double u, bool with_derivative) const {
    if (!std::isfinite(t) || !std::isfinite(u)) {
        throw PreconditionError("evaluate: non-finite input " + format_point(t, u));
    }
    const double g = forcing_(t);
    Evaluation e{g * shape_value(u), std::nullopt};
    if (with_derivative) e.derivative = g * shape_derivative(u);
    return e;
}

IgnitionNonlinearity IgnitionNonlinearity::time_shift(double tau) const {
    IgnitionNonlinearity out(theta_, theta_star_, forcing_.shifted(tau), shape_);
    out.beta_override = beta_override;
    return out;
}

// ---------------------------------------------------------------------------
// Hypothesis validation

namespace {

double sampling_half_span(const IgnitionNonlinearity& m, const SamplingGrid& grid) {
    if (grid.time_span > 0) return grid.time_span;
    if (auto p = m.forcing().common_period()) return *p;
    double fmin = 0.0;
    for (const auto& c : m.forcing().components()) {
        if (c.frequency > 0 && (fmin == 0.0 || c.frequency < fmin)) fmin = c.frequency;
    }
    return fmin > 0 ? 1.0 / fmin : 1.0;
}

// Largest |q(t_{k+1},u) - q(t_k,u)| / |t_{k+1} - t_k| over an n-point time grid.
double time_quotient(const std::function<double(double, double)>& q, double t0, double t1,
                     int nt, int nu, double umax) {
    double best = 0.0;
    const double dt = (t1 - t0) / nt;
    for (int j = 0; j <= nu; ++j) {
        const double u = umax * j / nu;
        double prev = q(t0, u);
        for (int k = 1; k <= nt; ++k) {
            const double cur = q(t0 + k * dt, u);
            best = std::max(best, std::fabs(cur - prev) / dt);
            prev = cur;
        }
    }
    return best;
}

}  // namespace

HypothesisReport validate_hypotheses(const IgnitionNonlinearity& model, const SamplingGrid& grid) {
    if (grid.time_samples <= 0 || grid.state_samples <= 0 || !(grid.state_max > 1.0)) {
        throw PreconditionError("sampling resolution must be positive and cover u > 1");
    }
    HypothesisReport rep;
    rep.sampling = grid;
    const double T = sampling_half_span(model, grid);
    rep.sampling.time_span = T;
    const double theta = model.theta();
    const double theta_star = model.theta_star();
    rep.g_min = model.forcing().lower_bound();
    rep.g_max = model.forcing().upper_bound();

    const int nt = grid.time_samples;
    const int nu = grid.state_samples;
    std::vector<double> ts(static_cast<std::size_t>(nt) + 1);
    for (int k = 0; k <= nt; ++k) ts[static_cast<std::size_t>(k)] = -2 * T + 4 * T * k / nt;
    std::vector<double> us;
    for (int j = 0; j <= nu; ++j) us.push_back(grid.state_max * j / nu);
    us.push_back(-1.0);
    us.push_back(-0.5);
    us.push_back(theta);
    us.push_back(theta_star);
    us.push_back(1.0);
    std::sort(us.begin(), us.end());

    auto fail = [](HypothesisCheck& c, std::string what, double t, double u) {
        if (!c.passed) return;
        c.passed = false;
        c.detail = what + " at " + format_point(t, u);
        c.witness = std::make_pair(t, u);
    };

    // H1: sign structure.
    for (double t : ts) {
        for (double u : us) {
            const double f = model.value(t, u);
            if (u <= theta || u == 1.0) {
                if (f != 0.0) fail(rep.h1, "f must vanish on (-inf,theta] and at 1", t, u);
            } else if (u < 1.0) {
                if (!(f > 0.0)) fail(rep.h1, "f must be positive on (theta,1)", t, u);
            } else {
                if (!(f < 0.0)) fail(rep.h1, "f must be negative for u > 1", t, u);
            }
        }
    }
    if (rep.h1.passed) rep.h1.detail = "sign structure holds on the sample grid";

    // H2: envelopes f_inf = g_min f0, f_sup = g_max f0.
    if (!(rep.g_min > 0.0)) {
        fail(rep.h2, "forcing lower bound g_min = " + std::to_string(rep.g_min) +
                         " is not positive so f_inf vanishes on (theta,1)",
             0.0, 0.5 * (1.0 + theta));
    }
    if (rep.h2.passed) {
        const double d_theta = model.shape_derivative(theta);
        const double d_one = model.shape_derivative(1.0);
        if (!(d_theta > 0.0)) fail(rep.h2, "f_inf'(theta+) must be positive", 0.0, theta);
        if (!(d_one < 0.0)) fail(rep.h2, "f_inf'(1) must be negative", 0.0, 1.0);
        for (double t : ts) {
            for (double u : us) {
                if (u < theta || u > 1.0) continue;
                const double f = model.value(t, u);
                const double lo = model.f_inf(u), hi = model.f_sup(u);
                const double slack = 1e-14 * std::max(1.0, std::fabs(hi));
                if (f < lo - slack || f > hi + slack) {
                    fail(rep.h2, "f outside [f_inf, f_sup]", t, u);
                }
                if (u > theta && u < 1.0 && !(lo > 0.0)) fail(rep.h2, "f_inf not positive", t, u);
            }
        }
    }
    if (rep.h2.passed) {
        rep.h2.detail = rep.g_min == rep.g_max
                            ? "autonomous model: envelopes coincide with f"
                            : "f_inf <= f <= f_sup with f_inf > 0 on (theta,1)";
    }

    // H3: f_u <= -beta for u >= theta_star; beta is the sampled minimum of -f_u.
    double beta = std::numeric_limits<double>::infinity();
    for (double t : ts) {
        for (double u : us) {
            if (u < theta_star) continue;
            const double d = *model.evaluate(t, u, true).derivative;
            if (-d < beta) beta = -d;
        }
    }
    rep.beta = beta;
    if (!(beta > 0.0)) {
        fail(rep.h3, "f_u is not uniformly negative above theta_star", 0.0, theta_star);
    } else {
        rep.h3.detail = "beta = " + std::to_string(beta);
    }

    // C_Lip on [0, state_max]; (H1) only asks for local Lipschitz continuity.
    double lip = 0.0;
    for (double t : ts) {
        for (double u : us) {
            if (u < 0.0) continue;
            lip = std::max(lip, std::fabs(*model.evaluate(t, u, true).derivative));
        }
    }
    rep.c_lip = lip;

    // H4: uniform Hoelder continuity in t of f and f_u, probed by the
    // Lipschitz quotient at two resolutions; growth under refinement flags a
    // non-Hoelder family.
    auto fq = [&](double t, double u) { return model.value(t, u); };
    auto dq = [&](double t, double u) { return *model.evaluate(t, u, true).derivative; };
    const int nu4 = std::max(8, nu / 8);
    const double qf1 = time_quotient(fq, -2 * T, 2 * T, nt, nu4, grid.state_max);
    const double qf2 = time_quotient(fq, -2 * T, 2 * T, 2 * nt, nu4, grid.state_max);
    const double qd1 = time_quotient(dq, -2 * T, 2 * T, nt, nu4, grid.state_max);
    const double qd2 = time_quotient(dq, -2 * T, 2 * T, 2 * nt, nu4, grid.state_max);
    const bool finite = std::isfinite(qf2) && std::isfinite(qd2);
    const bool bounded = qf2 <= 1.5 * qf1 + 1e-12 && qd2 <= 1.5 * qd1 + 1e-12;
    if (!finite || !bounded) {
        fail(rep.h4, "time-difference quotient grows under refinement", 0.0, 0.5);
    } else {
        std::ostringstream os;
        os << "time quotients f: " << qf2 << ", f_u: " << qd2;
        rep.h4.detail = os.str();
    }
    return rep;
}

ValidatedModel ValidatedModel::create(IgnitionNonlinearity model, const SamplingGrid& grid) {
    HypothesisReport rep = validate_hypotheses(model, grid);
    const std::pair<const char*, const HypothesisCheck*> checks[] = {
        {"H1", &rep.h1}, {"H2", &rep.h2}, {"H3", &rep.h3}, {"H4", &rep.h4}};
    for (const auto& [name, c] : checks) {
        if (!c->passed) throw HypothesisError(std::string(name) + " failed: " + c->detail);
    }
    if (model.beta_override && !(*model.beta_override > 0.0)) {
        throw HypothesisError("beta override must be positive");
    }
    return ValidatedModel(std::move(model), std::move(rep));
}

double ValidatedModel::beta() const {
    return model_.beta_override ? *model_.beta_override : report_.beta;
}

// ---------------------------------------------------------------------------
// Bistable extension and floored ignition reaction

double BistableReaction::operator()(double u) const {
    if (u <= 0.0) return 0.0;
    if (u < theta_) {
        const double w = theta_ - u;
        return -bump_scale_ * u * u * w * w + slope_theta_ * (u - theta_) * u * u / (theta_ * theta_);
    }
    return f_inf_(u);
}

double BistableReaction::derivative(double u) const {
    if (u <= 0.0) return 0.0;
    if (u < theta_) {
        const double w = theta_ - u;
        const double bump = -bump_scale_ * (2.0 * u * w * w - 2.0 * u * u * w);
        const double corr = slope_theta_ * (3.0 * u * u - 2.0 * theta_ * u) / (theta_ * theta_);
        return bump + corr;
    }
    return f_inf_prime_(u);
}

double BistableReaction::integral() const {
    const double th = theta_;
    const double bump = -bump_scale_ * std::pow(th, 5) / 30.0;
    const double corr = -slope_theta_ * th * th / 12.0;
    const double upper = numerics::simpson(f_inf_, th, 1.0, 4000);
    return bump + corr + upper;
}

BistableReaction bistable_extension(const ValidatedModel& vm) {
    const IgnitionNonlinearity& m = vm.model();
    const double th = m.theta();
    const double gmin = m.forcing().lower_bound();
    BistableReaction fb;
    fb.theta_ = th;
    fb.g_min_ = gmin;
    fb.f_inf_ = [m, gmin](double u) { return gmin * m.shape_value(u); };
    fb.f_inf_prime_ = [m, gmin](double u) { return gmin * m.shape_derivative(u); };
    fb.slope_theta_ = gmin * m.shape_derivative(th);
    const double upper = numerics::simpson(fb.f_inf_, th, 1.0, 4000);
    const double available = upper - fb.slope_theta_ * th * th / 12.0;
    if (!(available > 0.0)) {
        throw HypothesisError(
            "bistable extension: integral of f_inf over [theta,1] cannot dominate the C^1 "
            "matching term; the lower envelope is degenerate");
    }
    // Half of the largest bump scale that keeps the integral positive.
    const double s_max = 30.0 * available / std::pow(th, 5);
    fb.bump_scale_ = 0.5 * s_max;
    double lip = 0.0;
    for (int i = 0; i <= 4800; ++i) lip = std::max(lip, std::fabs(fb.derivative(1.2 * i / 4800.0)));
    fb.lip_ = lip;
    return fb;
}

AutonomousReaction floored_ignition(const ValidatedModel& vm) {
    const IgnitionNonlinearity m = vm.model();
    const double gmax = m.forcing().upper_bound();
    double lip = 0.0;
    for (int i = 0; i <= 4800; ++i) lip = std::max(lip, std::fabs(gmax * m.shape_derivative(1.2 * i / 4800.0)));
    return AutonomousReaction([m, gmax](double u) { return gmax * m.shape_value(u); }, lip);
}

}  // namespace ignition
