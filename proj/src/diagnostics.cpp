#include "skyrmion/diagnostics.hpp"

#include "skyrmion/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace skyrmion {

namespace {

constexpr double kUnderflow = 1e-250;

// First-derivative weights at z for the points x (Fornberg's recursion, one derivative).
template <std::size_t M>
std::array<double, M> d1_weights(double z, const std::array<double, M>& x) {
    std::array<std::array<double, 2>, M> c{};
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < M; ++i) {
        double c2 = 1.0, c5 = c4;
        c4 = x[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::array<double, M> w{};
    for (std::size_t i = 0; i < M; ++i)
        w[i] = c[i][1];
    return w;
}

StrictSign strict_negative(std::span<const double> x, std::span<const double> scale, std::span<const double> f) {
    StrictSign out;
    out.max_value = -std::numeric_limits<double>::infinity();
    out.max_ratio = -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(f[i]) < kUnderflow)
            continue;
        ++used;
        out.max_value = std::max(out.max_value, x[i]);
        out.max_ratio = std::max(out.max_ratio, scale[i] > 0.0 ? x[i] / scale[i] : 0.0);
    }
    out.strict = used > 0 && out.max_ratio < -kStrictMargin;
    if (!used)
        out.max_value = out.max_ratio = 0.0;
    return out;
}

} // namespace

std::vector<double> derivative(const RadialGrid& g, std::span<const double> v, double origin) {
    const std::size_t n = v.size();
    if (n != g.size())
        throw ValidationError("derivative: grid mismatch");
    if (n < 4)
        throw ValidationError("derivative: need at least four nodes");
    // Extended arrays with the origin as index 0.
    auto xe = [&](std::size_t j) { return j ? g.node(j - 1) : 0.0; };
    auto ye = [&](std::size_t j) { return j ? v[j - 1] : origin; };
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + 1;
        std::size_t lo = j < 2 ? 0 : j - 2;
        lo = std::min(lo, n - 4); // window [lo, lo+4] inside [0, n]
        std::array<double, 5> xs{};
        for (std::size_t k = 0; k < 5; ++k)
            xs[k] = xe(lo + k);
        auto w = d1_weights(xe(j), xs);
        double s = 0.0;
        for (std::size_t k = 0; k < 5; ++k)
            s += w[k] * ye(lo + k);
        d[i] = s;
    }
    return d;
}

DiagnosticsSeries diagnostics(const Profile& f) {
    f.validate();
    const auto& g = *f.grid;
    const double r = f.params.r, b2 = f.params.beta * f.params.beta;
    DiagnosticsSeries d;
    d.fprime = derivative(g, f.values, Profile::origin_value);
    const std::size_t n = f.size();
    d.q.resize(n), d.q_bar.resize(n), d.n_fn.resize(n), d.f_fn.resize(n), d.p_fn.resize(n);
    d.max_q = d.max_n = -std::numeric_limits<double>::infinity();
    d.min_f = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double rho = g.node(i), fp = d.fprime[i];
        double s = std::sin(f.values[i]), c = std::cos(f.values[i]);
        double sh = std::sin(0.5 * f.values[i]), omc = 2.0 * sh * sh;
        d.q[i] = fp + s / rho;
        d.q_bar[i] = fp - s / rho;
        d.n_fn[i] = d.q_bar[i] + r * omc;
        d.f_fn[i] = rho * rho * fp * fp - s * s;
        d.p_fn[i] = omc - 2.0 * r * s / rho + b2 * (1.0 + c);
        if (i + 1 < n) { // interior nodes
            d.max_q = std::max(d.max_q, d.q[i]);
            d.max_n = std::max(d.max_n, d.n_fn[i]);
            d.min_f = std::min(d.min_f, d.f_fn[i]);
        }
    }
    return d;
}

StrictSign monotonicity_check(const Profile& f) {
    auto d = diagnostics(f);
    const std::size_t m = f.size() - 1;
    std::vector<double> scale(m);
    for (std::size_t i = 0; i < m; ++i)
        scale[i] = std::abs(d.fprime[i]) + std::abs(std::sin(f.values[i]) / f.grid->node(i));
    return strict_negative(std::span(d.q).first(m), scale, std::span(f.values).first(m));
}

StrictSign sign_quantity_check(const Profile& f) {
    auto d = diagnostics(f);
    const std::size_t m = f.size() - 1;
    std::vector<double> scale(m);
    for (std::size_t i = 0; i < m; ++i) {
        double sh = std::sin(0.5 * f.values[i]);
        scale[i] = std::abs(d.fprime[i]) + std::abs(std::sin(f.values[i]) / f.grid->node(i)) +
                   f.params.r * 2.0 * sh * sh;
    }
    return strict_negative(std::span(d.n_fn).first(m), scale, std::span(f.values).first(m));
}

FitResult decay_fit(const Profile& f) {
    f.validate();
    const auto& g = *f.grid;
    const double hi = 0.9 * g.r_max();
    std::size_t start = f.size();
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f.values[i] < 1e-2) {
            start = i;
            break;
        }
    if (start == f.size() || g.node(start) >= hi)
        throw NumericalError("decay_fit: tail not resolved (f never drops below 1e-2 before 0.9 R_max)");
    std::vector<double> x, y;
    for (std::size_t i = start; i < f.size() && g.node(i) <= hi; ++i) {
        if (!(f.values[i] > 0.0))
            throw NumericalError("decay_fit: non-positive tail value at rho = " + std::to_string(g.node(i)));
        x.push_back(g.node(i));
        y.push_back(std::log(std::sqrt(g.node(i)) * f.values[i]));
    }
    if (x.size() < 3)
        throw NumericalError("decay_fit: fewer than three nodes in the fit window");
    auto fit = fit_line(x, y);
    fit.value = -fit.value;
    return fit;
}

double origin_derivative(const Profile& f) {
    f.validate();
    const auto& g = *f.grid;
    const double limit = 0.1 * 2.0 * f.params.r;
    if (g.size() < 4 || g.node(3) >= limit)
        throw NumericalError("origin_derivative: fewer than 4 nodes below 0.2 r");
    const double pi = Profile::origin_value;
    auto slope = [&](std::size_t a, std::size_t b) {
        double xa = g.node(a), xb = g.node(b);
        double ya = f.values[a] - pi, yb = f.values[b] - pi;
        return (ya * xb * xb - yb * xa * xa) / (xa * xb * (xb - xa));
    };
    // Leading error of each estimate is proportional to x_a x_b.
    double e1 = g.node(0) * g.node(1), e2 = g.node(1) * g.node(3);
    double d1 = slope(0, 1), d2 = slope(1, 3);
    double d = (d1 * e2 - d2 * e1) / (e2 - e1);
    if (!std::isfinite(d))
        throw NumericalError("origin_derivative: non-finite extrapolation");
    return d;
}

double f_identity_discrepancy(const Profile& f) {
    auto d = diagnostics(f);
    const auto& g = *f.grid;
    auto dF = derivative(g, d.f_fn, 0.0);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        double rho = g.node(i);
        double rhs = 2.0 * rho * rho * d.fprime[i] * std::sin(f.values[i]) * d.p_fn[i];
        double e = dF[i] - rhs;
        num += g.weight(i) * e * e;
        den += g.weight(i) * rhs * rhs;
    }
    if (den == 0.0)
        throw NumericalError("f_identity_discrepancy: right-hand side vanishes identically");
    return std::sqrt(num / den);
}

double half_angle_identity_error(const Profile& f) {
    f.validate();
    const double r = f.params.r;
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double rho = f.grid->node(i), v = f.values[i];
        double lhs = 1.0 + std::cos(v) - rho / (2.0 * r) * std::sin(v);
        double sin_half = 2.0 * r / std::sqrt(rho * rho + 4.0 * r * r);
        double th = theta(rho, r);
        double rhs = 2.0 * std::cos(0.5 * v) * std::sin(0.5 * (th - v)) / sin_half;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

} // namespace skyrmion
