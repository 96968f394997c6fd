#pragma once

// Time-heterogeneous ignition nonlinearities f(t,u) = g(t) f0(u), their
// envelopes, the floored ignition nonlinearity and the bistable extension.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ignition {

/// Reaction term of u_t = u_xx + f(t,u).
class Reaction {
public:
    virtual ~Reaction() = default;

    virtual double value(double t, double u) const = 0;

    /// Writes f(t, u[i]) into out[i]; overridden where a per-step factor can be hoisted.
    virtual void apply(double t, std::span<const double> u, std::span<double> out) const;

    /// Global Lipschitz constant of f(t,.) on the invariant region.
    virtual double lipschitz() const = 0;
};

/// Autonomous reaction f(u) given by a callable.
class AutonomousReaction final : public Reaction {
public:
    AutonomousReaction(std::function<double(double)> f, double lipschitz);

    double value(double /*t*/, double u) const override { return f_(u); }
    double lipschitz() const override { return lip_; }
    double operator()(double u) const { return f_(u); }

private:
    std::function<double(double)> f_;
    double lip_;
};

enum class ForcingKind { constant, periodic, quasi_periodic, random_phase_sum };

std::string to_string(ForcingKind kind);
ForcingKind forcing_kind_from_string(const std::string& name);

struct ForcingComponent {
    double frequency = 0.0;  // 1/time
    double amplitude = 0.0;
    double phase = 0.0;      // radians

    bool operator==(const ForcingComponent&) const = default;
};

/// g(t) = base_level + sum_k amplitude_k sin(2 pi frequency_k t + phase_k).
class ForcingSignal {
public:
    ForcingSignal() = default;
    ForcingSignal(ForcingKind kind, double base_level, std::vector<ForcingComponent> components);

    static ForcingSignal constant(double level);
    static ForcingSignal periodic(double base_level, double amplitude, double frequency,
                                  double phase = 0.0);
    static ForcingSignal quasi_periodic(double base_level,
                                        std::vector<ForcingComponent> components);
    /// Components with phases drawn uniformly from [0, 2 pi) by a seeded engine.
    static ForcingSignal random_phase_sum(double base_level, std::span<const double> frequencies,
                                          std::span<const double> amplitudes,
                                          std::uint64_t seed);

    double operator()(double t) const;
    double derivative(double t) const;

    /// base_level - sum |a_k|; a certified lower bound of g.
    double lower_bound() const;
    /// base_level + sum |a_k|.
    double upper_bound() const;

    /// Forcing of f(. + tau, .): phases advanced by 2 pi frequency tau.
    ForcingSignal shifted(double tau) const;

    /// Smallest period shared by all components, if any (constant forcing -> nullopt).
    std::optional<double> common_period() const;

    ForcingKind kind() const noexcept { return kind_; }
    double base_level() const noexcept { return base_; }
    const std::vector<ForcingComponent>& components() const noexcept { return components_; }

    bool operator==(const ForcingSignal&) const = default;

private:
    ForcingKind kind_ = ForcingKind::constant;
    double base_ = 1.0;
    std::vector<ForcingComponent> components_;
};

enum class ReactionShapeKind { quadratic_ignition, custom };

/// Reaction shape f0(u). The default is (u - theta)^+ (1 - u) on u <= 1,
/// continued linearly with slope f0'(1-) for u > 1.
struct ReactionShape {
    ReactionShapeKind kind = ReactionShapeKind::quadratic_ignition;
    std::function<double(double)> custom;  // only for kind == custom

    static ReactionShape quadratic() { return {}; }
    static ReactionShape from_function(std::function<double(double)> f0) {
        return {ReactionShapeKind::custom, std::move(f0)};
    }
};

struct Evaluation {
    double value;
    std::optional<double> derivative;
};

/// f(t,u) = g(t) f0(u) of ignition type.
class IgnitionNonlinearity final : public Reaction {
public:
    IgnitionNonlinearity(double theta, double theta_star, ForcingSignal forcing,
                         ReactionShape shape = ReactionShape::quadratic());

    double value(double t, double u) const override;
    void apply(double t, std::span<const double> u, std::span<double> out) const override;
    double lipschitz() const override { return lip_; }

    /// Throws PreconditionError for non-finite input.
    Evaluation evaluate(double t, double u, bool with_derivative) const;

    double shape_value(double u) const;
    double shape_derivative(double u) const;

    /// Lower envelope g_min f0 and upper envelope g_max f0.
    double f_inf(double u) const { return forcing_.lower_bound() * shape_value(u); }
    double f_sup(double u) const { return forcing_.upper_bound() * shape_value(u); }

    /// Model of f(. + tau, .).
    IgnitionNonlinearity time_shift(double tau) const;

    double theta() const noexcept { return theta_; }
    double theta_star() const noexcept { return theta_star_; }
    const ForcingSignal& forcing() const noexcept { return forcing_; }
    const ReactionShape& shape() const noexcept { return shape_; }

    /// Optional user value for beta; validation otherwise uses the sampled minimum.
    std::optional<double> beta_override;

private:
    double theta_;
    double theta_star_;
    ForcingSignal forcing_;
    ReactionShape shape_;
    double lip_;
};

struct SamplingGrid {
    int time_samples = 400;
    int state_samples = 400;
    /// Half-length T of the sampled window [-2T, 2T]; <= 0 picks the forcing period (or 1).
    double time_span = 0.0;
    double state_max = 1.2;
};

struct HypothesisCheck {
    bool passed = true;
    std::string detail;
    /// Witness (t,u) of the first violation found.
    std::optional<std::pair<double, double>> witness;
};

struct HypothesisReport {
    HypothesisCheck h1, h2, h3, h4;
    double beta = 0.0;
    double g_min = 0.0;
    double g_max = 0.0;
    double c_lip = 0.0;
    SamplingGrid sampling;

    bool all_passed() const { return h1.passed && h2.passed && h3.passed && h4.passed; }
};

HypothesisReport validate_hypotheses(const IgnitionNonlinearity& model,
                                     const SamplingGrid& grid = {});

/// A model paired with a passing HypothesisReport. Downstream code that relies
/// on the hypotheses takes this type rather than a bare model.
class ValidatedModel {
public:
    /// Throws HypothesisError naming the first failed hypothesis.
    static ValidatedModel create(IgnitionNonlinearity model, const SamplingGrid& grid = {});

    const IgnitionNonlinearity& model() const noexcept { return model_; }
    const HypothesisReport& report() const noexcept { return report_; }
    /// beta_override if set, else the sampled beta.
    double beta() const;

private:
    ValidatedModel(IgnitionNonlinearity m, HypothesisReport r)
        : model_(std::move(m)), report_(std::move(r)) {}

    IgnitionNonlinearity model_;
    HypothesisReport report_;
};

/// C^1 bistable reaction f_B: zero at 0, negative on (0,theta), equal to
/// f_inf on [theta, 1]. On (0,theta):
///     f_B(u) = -s u^2 (theta-u)^2 + d (u - theta) u^2 / theta^2,
/// with d = f_inf'(theta+) so the derivative matches at theta.
class BistableReaction final : public Reaction {
public:
    double value(double /*t*/, double u) const override { return (*this)(u); }
    double lipschitz() const override { return lip_; }
    double operator()(double u) const;
    double derivative(double u) const;

    double theta() const noexcept { return theta_; }
    double bump_scale() const noexcept { return bump_scale_; }
    double slope_at_theta() const noexcept { return slope_theta_; }
    /// Closed-form integral over [0,1].
    double integral() const;

private:
    friend BistableReaction bistable_extension(const ValidatedModel& model);
    BistableReaction() = default;

    double theta_ = 0.0;
    double g_min_ = 0.0;
    double bump_scale_ = 0.0;
    double slope_theta_ = 0.0;
    double lip_ = 0.0;
    std::function<double(double)> f_inf_;
    std::function<double(double)> f_inf_prime_;
};

/// Throws HypothesisError if int_theta^1 f_inf cannot dominate the C^1 correction.
BistableReaction bistable_extension(const ValidatedModel& model);

/// f_I = f_sup, the upper envelope as an autonomous reaction.
AutonomousReaction floored_ignition(const ValidatedModel& model);

}  // namespace ignition
