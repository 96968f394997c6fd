#include "ignition/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "ignition/errors.hpp"

namespace ignition::numerics {

TridiagonalFactorization::TridiagonalFactorization(std::size_t n, double lower, double diag,
                                                   double upper)
    : pivots_(n), c_star_(n), lower_(lower) {
    if (n == 0) throw PreconditionError("tridiagonal system must be nonempty");
    pivots_[0] = diag;
    c_star_[0] = upper / diag;
    for (std::size_t i = 1; i < n; ++i) {
        pivots_[i] = diag - lower * c_star_[i - 1];
        c_star_[i] = upper / pivots_[i];
    }
}

void TridiagonalFactorization::solve(std::span<double> rhs) const {
    const std::size_t n = pivots_.size();
    if (rhs.size() != n) throw PreconditionError("tridiagonal rhs size mismatch");
    rhs[0] /= pivots_[0];
    for (std::size_t i = 1; i < n; ++i) {
        rhs[i] = (rhs[i] - lower_ * rhs[i - 1]) / pivots_[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] -= c_star_[i] * rhs[i + 1];
    }
}

std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n || n == 0) {
        throw PreconditionError("tridiagonal operand sizes disagree");
    }
    std::vector<double> c(n), d(n), x(n);
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

namespace {

double node(const UniformSamples& s, long i) {
    const long n = static_cast<long>(s.values.size());
    if (i < 0) return s.values.front();
    if (i >= n) return s.values.back();
    return s.values[static_cast<std::size_t>(i)];
}

// Base index i and fractional offset so that x = origin + (i + frac) h.
std::pair<long, double> locate(const UniformSamples& s, double x) {
    const double pos = (x - s.origin) / s.h;
    const double fl = std::floor(pos);
    return {static_cast<long>(fl), pos - fl};
}

}  // namespace

LocalJet cubic_jet(const UniformSamples& s, double x) {
    if (s.values.size() < 4) throw PreconditionError("cubic interpolation needs 4 samples");
    auto [i, t] = locate(s, x);
    (void)t;
    return cubic_jet_at(s, x, i - 1);
}

LocalJet cubic_jet_at(const UniformSamples& s, double x, long first) {
    const long n = static_cast<long>(s.values.size());
    if (n < 4) throw PreconditionError("cubic interpolation needs 4 samples");
    // Keep the stencil inside the data where possible.
    const long base = std::clamp(first, 0L, n - 4);
    const double t = (x - s.origin) / s.h - static_cast<double>(base + 1);
    const double y0 = node(s, base), y1 = node(s, base + 1), y2 = node(s, base + 2),
                 y3 = node(s, base + 3);
    // Nodes at -1, 0, 1, 2 in units of h.
    const double l0 = -t * (t - 1) * (t - 2) / 6.0;
    const double l1 = (t + 1) * (t - 1) * (t - 2) / 2.0;
    const double l2 = -(t + 1) * t * (t - 2) / 2.0;
    const double l3 = (t + 1) * t * (t - 1) / 6.0;
    const double d0 = -(3 * t * t - 6 * t + 2) / 6.0;
    const double d1 = (3 * t * t - 4 * t - 1) / 2.0;
    const double d2 = -(3 * t * t - 2 * t - 2) / 2.0;
    const double d3 = (3 * t * t - 1) / 6.0;
    const double s0 = -(6 * t - 6) / 6.0;
    const double s1 = (6 * t - 4) / 2.0;
    const double s2 = -(6 * t - 2) / 2.0;
    const double s3 = (6 * t) / 6.0;
    LocalJet jet;
    jet.value = l0 * y0 + l1 * y1 + l2 * y2 + l3 * y3;
    jet.first = (d0 * y0 + d1 * y1 + d2 * y2 + d3 * y3) / s.h;
    jet.second = (s0 * y0 + s1 * y1 + s2 * y2 + s3 * y3) / (s.h * s.h);
    return jet;
}

double cubic_lagrange(const UniformSamples& s, double x) {
    const double last = s.origin + s.h * static_cast<double>(s.values.size() - 1);
    if (x <= s.origin) return s.values.front();
    if (x >= last) return s.values.back();
    return cubic_jet(s, x).value;
}

double monotone_cubic(const UniformSamples& s, double x) {
    const long n = static_cast<long>(s.values.size());
    if (n < 2) throw PreconditionError("interpolation needs 2 samples");
    const double last = s.origin + s.h * static_cast<double>(n - 1);
    if (x <= s.origin) return s.values.front();
    if (x >= last) return s.values.back();
    auto [i, t] = locate(s, x);
    i = std::clamp(i, 0L, n - 2);
    t = (x - s.origin) / s.h - static_cast<double>(i);
    auto secant = [&](long k) { return node(s, k + 1) - node(s, k); };
    // Fritsch-Butland harmonic-mean slopes (per unit index), zero at extrema.
    auto fb = [&](long k) {
        if (k <= 0 || k >= n - 1) return k <= 0 ? secant(0) : secant(n - 2);
        const double a = secant(k - 1), b = secant(k);
        if (a * b <= 0.0) return 0.0;
        const double lo = std::min(std::fabs(a), std::fabs(b));
        const double hi = std::max(std::fabs(a), std::fabs(b));
        const double m = 3.0 * lo * hi / (2.0 * hi + lo);
        return a > 0 ? m : -m;
    };
    const double y0 = node(s, i), y1 = node(s, i + 1);
    const double m0 = fb(i), m1 = fb(i + 1);
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw PreconditionError("line fit needs at least two paired samples");
    }
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0) throw PreconditionError("line fit abscissae are degenerate");
    LinearFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ssr += r * r;
    }
    fit.rms_residual = std::sqrt(ssr / static_cast<double>(n));
    fit.slope_stderr = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
    fit.r_squared = syy > 0 ? 1.0 - ssr / syy : 1.0;
    return fit;
}

double bisect_root(const std::function<double(double)>& f, double a, double b, double tol,
                   int max_iter) {
    double fa = f(a);
    const double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw PreconditionError("bisection interval has no sign change");
    for (int k = 0; k < max_iter && std::fabs(b - a) > tol; ++k) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

double golden_section_minimize(const std::function<double(double)>& f, double a, double b,
                               double tol, int max_iter) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int k = 0; k < max_iter && std::fabs(b - a) > tol; ++k) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

double median(std::vector<double> v) {
    if (v.empty()) throw PreconditionError("median of empty sample");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lower = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
        m = 0.5 * (m + lower);
    }
    return m;
}

double median_absolute_deviation(std::span<const double> v) {
    std::vector<double> copy(v.begin(), v.end());
    const double m = median(copy);
    for (auto& x : copy) x = std::fabs(x - m);
    return median(std::move(copy));
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2 != 0) ++n;
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

}  // namespace ignition::numerics
