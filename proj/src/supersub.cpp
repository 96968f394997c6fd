#include "ignition/supersub.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ignition/errors.hpp"
#include "ignition/front_tracking.hpp"
#include "ignition/pde_core.hpp"

namespace ignition {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

namespace squeeze {

double alpha(double alpha0, double c_B, double c_0) { return std::min({alpha0 / 2.0, c_B / 8.0, c_0}); }

double omega(double beta, double alpha, double c_B, double C_Lip) {
    return std::min({beta, alpha * c_B / 4.0 - alpha * alpha, C_Lip});
}

double M(double C_Lip, double C_Gamma, double C_L0) { return (2.0 * C_Lip + C_Gamma) / C_L0; }

double epsilon0(double theta, double theta_star, double c_B, double M) {
    return std::min({theta / 2.0, (1.0 - theta_star) / 2.0, c_B / (4.0 * M)});
}

}  // namespace squeeze

double GammaBridge::operator()(double x) const {
    const double b = L0_ + 1.0;
    if (x <= start_) return 1.0;
    if (x >= b) return std::exp(-alpha_ * (x - L0_));
    const double t = (x - start_) / width_;
    const auto& c = coef_;
    return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
}

double GammaBridge::derivative(double x) const {
    const double b = L0_ + 1.0;
    if (x <= start_) return 0.0;
    if (x >= b) return -alpha_ * std::exp(-alpha_ * (x - L0_));
    const double t = (x - start_) / width_;
    const auto& c = coef_;
    return (c[1] + t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5])))) / width_;
}

double GammaBridge::second(double x) const {
    const double b = L0_ + 1.0;
    if (x <= start_) return 0.0;
    if (x >= b) return alpha_ * alpha_ * std::exp(-alpha_ * (x - L0_));
    const double t = (x - start_) / width_;
    const auto& c = coef_;
    return (2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5]))) / (width_ * width_);
}

namespace {

// Quintic Hermite from (1, 0, 0) to the exponential branch at L0+1 over `width`.
std::array<double, 6> quintic_bridge(double alpha, double width) {
    const double e = std::exp(-alpha);
    const double y0 = 1.0, d0 = 0.0, s0 = 0.0;
    const double y1 = e, d1 = -alpha * e * width, s1 = alpha * alpha * e * width * width;
    std::array<double, 6> c{};
    c[0] = y0;
    c[1] = d0;
    c[2] = 0.5 * s0;
    c[3] = -10 * y0 - 6 * d0 - 1.5 * s0 + 10 * y1 - 4 * d1 + 0.5 * s1;
    c[4] = 15 * y0 + 8 * d0 + 1.5 * s0 - 15 * y1 + 7 * d1 - s1;
    c[5] = -6 * y0 - 3 * d0 - 0.5 * s0 + 6 * y1 - 3 * d1 + 0.5 * s1;
    return c;
}

}  // namespace

GammaBridge build_gamma(double alpha, double L0) {
    if (!(alpha > 0.0) || !(L0 > 0.0)) throw PreconditionError("Gamma needs alpha > 0 and L0 > 0");
    GammaBridge g;
    g.alpha_ = alpha;
    g.L0_ = L0;
    const int n = 10000;
    // Widest quintic (up to the full [-L0-1, L0+1]) that stays nonincreasing.
    for (double w = 2.0 * L0 + 2.0; w > 1e-3; w *= 0.95) {
        g.width_ = w;
        g.start_ = L0 + 1.0 - w;
        g.coef_ = quintic_bridge(alpha, w);
        bool monotone = true;
        for (int k = 0; k <= n && monotone; ++k) monotone = g.derivative(g.start_ + w * k / n) <= 0.0;
        if (monotone) break;
    }
    double cg = alpha * alpha * std::exp(-alpha);
    for (int k = 0; k <= n; ++k) {
        const double x = g.start_ + g.width_ * k / n;
        if (g.derivative(x) > 0.0)
            throw PreconditionError("no monotone Gamma bridge for alpha = " + fmt(alpha) + ", L0 = " + fmt(L0));
        cg = std::max(cg, std::abs(g.second(x)));
    }
    g.C_Gamma_ = cg;
    return g;
}

namespace {

// Leftmost crossing of `level` coming from the left (u >= level before it).
double leftmost_crossing(const Field& f, double level) {
    const auto& u = f.values;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < level) {
            if (i == 0) throw DerivationError("field is below " + fmt(level) + " at the left window edge");
            return f.grid.x(i - 1) + f.grid.spacing * (u[i - 1] - level) / (u[i - 1] - u[i]);
        }
    }
    throw DerivationError("field never drops below " + fmt(level));
}

}  // namespace

SqueezeConstants derive_constants(const ReferenceWaveData& ref, const ConstantInputs& in) {
    if (ref.snapshots.empty() || ref.snapshots.size() != ref.xi.size())
        throw PreconditionError("reference data needs snapshots with matching interface positions");
    if (!(in.alpha0 > 0.0)) throw PreconditionError("alpha0 must be positive");
    if (!(in.c_B > 0.0) || !(in.beta > 0.0) || !(in.C_Lip > 0.0))
        throw PreconditionError("c_B, beta and C_Lip must be positive");

    SqueezeConstants k;
    k.theta = in.theta;
    k.theta_star = in.theta_star;
    k.beta = in.beta;
    k.C_Lip = in.C_Lip;
    k.c_B = in.c_B;
    k.alpha0 = in.alpha0;
    k.d_max = ref.d_max;

    const double upper_level = 0.5 * (1.0 + in.theta_star);
    const double lower_level = 0.5 * in.theta;
    double half = 0.0;
    for (std::size_t j = 0; j < ref.snapshots.size(); ++j) {
        const auto& f = ref.snapshots[j];
        double right;
        try {
            right = interface_location(f, lower_level);
        } catch (const NoCrossingError&) {
            throw DerivationError("reference never crosses theta/2 at t = " + fmt(f.time));
        }
        half = std::max({half, ref.xi[j] - leftmost_crossing(f, upper_level), right - ref.xi[j]});
    }
    k.L_measured = 2.0 * half;
    k.L0 = std::max(2.0 * k.L_measured, 2.0 * (ref.d_max - 1.0));

    const double band = k.L0 + 1.0 + ref.d_max;
    k.C_L0 = std::numeric_limits<double>::infinity();
    k.c_0 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ref.snapshots.size(); ++j) {
        const auto& f = ref.snapshots[j];
        const double xi = ref.xi[j];
        if (xi - band < f.grid.x(1) || xi + band > f.grid.x(f.grid.count - 2))
            throw DerivationError("steepness band |x - xi| <= " + fmt(band) + " leaves the window at t = " +
                                  fmt(f.time));
        const double h = f.grid.spacing;
        for (std::size_t i = 1; i + 1 < f.values.size(); ++i) {
            if (std::abs(f.grid.x(i) - xi) > band) continue;
            k.C_L0 = std::min(k.C_L0, -(f.values[i + 1] - f.values[i - 1]) / (2.0 * h));
        }
        const auto profile = extract_profile(f, xi, in.tail_hi + h);
        const auto tail = fit_exponential_tail(profile, in.tail_lo, in.tail_hi);
        k.c_0 = std::min(k.c_0, tail.rate - tail.rate_stderr);
    }
    if (!(k.C_L0 > 0.0))
        throw DerivationError("reference front is not strictly decreasing on |x - xi| <= " + fmt(band));
    if (!(k.c_0 > 0.0)) throw DerivationError("reference tail does not decay");

    k.alpha = squeeze::alpha(in.alpha0, in.c_B, k.c_0);
    const GammaBridge gamma = build_gamma(k.alpha, k.L0);
    k.C_Gamma = gamma.C_Gamma();
    k.M = squeeze::M(k.C_Lip, k.C_Gamma, k.C_L0);
    k.omega = squeeze::omega(k.beta, k.alpha, k.c_B, k.C_Lip);
    k.epsilon0 = squeeze::epsilon0(k.theta, k.theta_star, k.c_B, k.M);
    if (!(k.omega > 0.0) || !(k.epsilon0 > 0.0)) throw DerivationError("nonpositive omega or epsilon0");
    return k;
}

namespace {

double default_center(const Field& u, const Field& ref) {
    try {
        return interface_location(u, 0.5) - interface_location(ref, 0.5);
    } catch (const NoCrossingError&) {
        return 0.0;
    }
}

double default_scan(const Field& ref, double scan) {
    return scan > 0.0 ? scan : 0.25 * (ref.grid.right_edge() - ref.grid.left_edge());
}

// Nodes of u whose shifted positions stay inside the reference window for
// every zeta in [lo, hi].
std::vector<std::size_t> comparable_nodes(const Field& u, const Field& ref, double lo, double hi) {
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const double x = u.grid.x(i);
        if (x - hi >= ref.grid.left_edge() && x - lo <= ref.grid.right_edge()) nodes.push_back(i);
    }
    return nodes;
}

// Bisection for the transition of a predicate that is false at lo and true at hi
// (increasing) or true at lo and false at hi (decreasing).
double bisect_predicate(const std::function<bool(double)>& holds, double lo, double hi, bool increasing,
                        double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (holds(mid) == increasing) hi = mid; else lo = mid;
    }
    return increasing ? hi : lo;
}

}  // namespace

SandwichShifts initial_sandwich(const Field& u0, const Field& reference, double xi_tilde0,
                                const GammaBridge& gamma, double epsilon, double scan) {
    if (!(epsilon > 0.0)) throw PreconditionError("sandwich epsilon must be positive");
    const double center = default_center(u0, reference);
    const double range = default_scan(reference, scan);
    const double lo = center - range, hi = center + range;
    const auto nodes = comparable_nodes(u0, reference, lo, hi);
    if (nodes.empty()) throw PreconditionError("no comparable nodes between u0 and the reference");

    // Largest violation of the upper (sign +1) or lower (sign -1) inequality at shift z.
    auto violation = [&](double z, double sign, double* where) {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i : nodes) {
            const double x = u0.grid.x(i);
            const double env = reference.at_monotone(x - z) + sign * epsilon * gamma(x - xi_tilde0 - z);
            const double v = sign * (u0.values[i] - env);
            if (v > worst) {
                worst = v;
                if (where) *where = x;
            }
        }
        return worst;
    };
    auto upper_ok = [&](double z) { return violation(z, 1.0, nullptr) <= 0.0; };
    auto lower_ok = [&](double z) { return violation(z, -1.0, nullptr) <= 0.0; };

    double where = 0.0;
    if (!upper_ok(hi)) {
        const double v = violation(hi, 1.0, &where);
        throw SandwichError("u0 exceeds every upper envelope with shift <= " + fmt(hi) + " (excess " + fmt(v) +
                                " at x = " + fmt(where) + ")",
                            where);
    }
    if (!lower_ok(lo)) {
        const double v = violation(lo, -1.0, &where);
        throw SandwichError("u0 undercuts every lower envelope with shift >= " + fmt(lo) + " (deficit " + fmt(v) +
                                " at x = " + fmt(where) + ")",
                            where);
    }
    const double tol = 1e-10 * std::max(1.0, range);
    SandwichShifts s;
    s.epsilon = epsilon;
    s.raw_plus = upper_ok(lo) ? lo : bisect_predicate(upper_ok, lo, hi, true, tol);
    s.raw_minus = lower_ok(hi) ? hi : bisect_predicate(lower_ok, lo, hi, false, tol);
    s.zeta_plus = s.raw_plus;
    s.zeta_minus = s.raw_minus;
    if (s.zeta_plus - s.zeta_minus < epsilon) {
        const double mid = 0.5 * (s.zeta_plus + s.zeta_minus);
        s.zeta_plus = mid + 0.5 * epsilon;
        s.zeta_minus = mid - 0.5 * epsilon;
    }
    return s;
}

EnvelopeResiduals envelope_residuals(const SqueezeConstants& consts, const GammaBridge& gamma,
                                     const ReferenceSeries& ref, const Reaction& model, double zeta_minus0,
                                     double zeta_plus0, double epsilon, double horizon,
                                     std::size_t margin_cells) {
    if (ref.fields.size() != ref.xi_tilde.size()) throw PreconditionError("reference series is ragged");
    if (!(ref.dt > 0.0)) throw PreconditionError("reference series needs a positive dt");
    const auto needed = static_cast<std::size_t>(std::llround(horizon / ref.dt)) + 1;
    if (ref.fields.size() < std::max<std::size_t>(needed, 3))
        throw PreconditionError("reference series covers " + fmt((ref.fields.size() - 1) * ref.dt) +
                                " time units, horizon " + fmt(horizon) + " requested");
    if (!(consts.omega > 0.0)) throw PreconditionError("envelope needs omega > 0");

    const double t0 = ref.fields.front().time;
    const double drift = consts.M * epsilon / consts.omega;
    auto q = [&](double t) { return epsilon * std::exp(-consts.omega * (t - t0)); };
    auto zeta = [&](double t, double sign, double z0) {
        return z0 + sign * drift * (1.0 - std::exp(-consts.omega * (t - t0)));
    };

    EnvelopeResiduals out;
    out.min_upper = std::numeric_limits<double>::infinity();
    out.max_lower = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < needed; ++k) {
        const Grid1D& g = ref.fields[k].grid;
        if (g.count <= 2 * margin_cells + 3) throw PreconditionError("reference window narrower than the margins");
        const std::size_t first = margin_cells, last = g.count - margin_cells;  // [first, last)
        SpaceTimeSamples st;
        st.dt = ref.dt;
        st.h = g.spacing;
        st.left_edge = g.x(first);
        for (double sign : {1.0, -1.0}) {
            const double z0 = sign > 0 ? zeta_plus0 : zeta_minus0;
            st.slices.clear();
            for (std::size_t j = k - 1; j <= k + 1; ++j) {
                const Field& f = ref.fields[j];
                const double t = f.time;
                const double z = zeta(t, sign, z0);
                const double qt = q(t);
                std::vector<double> row(last - first);
                for (std::size_t i = first; i < last; ++i) {
                    const double x = g.x(i);
                    row[i - first] = f.at(x - z) + sign * qt * gamma(x - ref.xi_tilde[j] - z);
                }
                st.slices.push_back(std::move(row));
            }
            st.t0 = ref.fields[k - 1].time;
            const auto r = pde_residual(st, model);
            const auto& row = r.values.front();
            for (std::size_t i = 0; i < row.size(); ++i) {
                const double x = r.left_edge + r.h * static_cast<double>(i);
                if (sign > 0 && row[i] < out.min_upper) {
                    out.min_upper = row[i];
                    out.argmin_upper_t = r.t0;
                    out.argmin_upper_x = x;
                }
                if (sign < 0 && row[i] > out.max_lower) {
                    out.max_lower = row[i];
                    out.argmax_lower_t = r.t0;
                    out.argmax_lower_x = x;
                }
            }
        }
        ++out.slices;
    }
    return out;
}

double tightest_shift(const Field& u, const Field& reference, double q, ShiftSide side, double scan, double tol,
                      double band) {
    if (q < 0.0) throw PreconditionError("tightest_shift slack must be nonnegative");
    const double center = default_center(u, reference);
    const double range = default_scan(reference, scan);
    const double lo = center - range, hi = center + range;
    auto nodes = comparable_nodes(u, reference, lo, hi);
    if (band > 0.0) {
        const double xi = interface_location(u, 0.5);
        std::erase_if(nodes, [&](std::size_t i) { return std::abs(u.grid.x(i) - xi) > band; });
    }
    if (nodes.empty()) throw PreconditionError("no comparable nodes between the fields");
    const bool upper = side == ShiftSide::upper;
    auto holds = [&](double z) {
        for (std::size_t i : nodes) {
            const double r = reference.at_monotone(u.grid.x(i) - z);
            if (upper ? u.values[i] > r + q : u.values[i] < r - q) return false;
        }
        return true;
    };
    if (upper) {
        if (!holds(hi)) throw RangeError("no upper shift within [" + fmt(lo) + ", " + fmt(hi) + "]");
        if (holds(lo)) return lo;
        return bisect_predicate(holds, lo, hi, true, tol);
    }
    if (!holds(lo)) throw RangeError("no lower shift within [" + fmt(lo) + ", " + fmt(hi) + "]");
    if (holds(hi)) return hi;
    return bisect_predicate(holds, lo, hi, false, tol);
}

}  // namespace ignition
