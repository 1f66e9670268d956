#include "skyrmion/radial.hpp"

#include "skyrmion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace skyrmion {

namespace {

bool finite(double x) { return std::isfinite(x); }

// Solve a / (e^a - 1) = target for a > 0 by bisection; the left side decreases in a.
double grading_exponent(double target) {
    double lo = 1e-6, hi = 50.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid / std::expm1(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// First spacing times N over R_max for the default rule (R_max 1e-4 at N = 1024).
constexpr double kDefaultSpacingRatio = 1e-4 * 1024;

} // namespace

void ModelParams::validate() const {
    if (!finite(r) || !finite(beta))
        throw ValidationError("model parameters must be finite");
    if (r <= 0.0)
        throw ValidationError("r must be positive, got " + std::to_string(r));
    if (beta < 0.0)
        throw ValidationError("beta must be nonnegative, got " + std::to_string(beta));
}

void ModelParams::require_solvable() const {
    validate();
    if (beta <= 0.0)
        throw ValidationError("beta must be positive to solve (finite-energy class is empty at beta = 0)");
}

HKPoint params_to_hk(const ModelParams& p) {
    p.validate();
    double r2 = p.r * p.r, b2 = p.beta * p.beta;
    return {(b2 + 1.0) / r2, (b2 - 1.0) / r2};
}

ModelParams hk_to_params(const HKPoint& hk, double r0) {
    if (!finite(hk.h) || !finite(hk.k) || !finite(r0))
        throw ValidationError("(h, k, r0) must be finite");
    if (r0 <= 0.0)
        throw ValidationError("r0 must be positive");
    double half = 0.5 * (hk.h - hk.k);
    if (half <= 0.0)
        throw ValidationError("h - k must be positive");
    if (hk.h + hk.k < 0.0)
        throw ValidationError("h + k must be nonnegative");
    // Rescaling x -> x/lambda with lambda^2 = (h-k)/2 sends (h, k) to the normalized pair.
    double lambda = std::sqrt(half);
    ModelParams p{r0 / lambda, std::sqrt((hk.h + hk.k) / (hk.h - hk.k))};
    return p;
}

RadialGrid::RadialGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty())
        throw ValidationError("grid needs at least one node");
    double prev = 0.0;
    for (double x : nodes_) {
        if (!finite(x) || x <= prev)
            throw ValidationError("grid nodes must be finite, positive, strictly increasing");
        prev = x;
    }
    const std::size_t n = nodes_.size();
    weights_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double right = i + 1 < n ? cell_width(i + 1) : 0.0;
        weights_[i] = nodes_[i] * 0.5 * (cell_width(i) + right);
    }
}

double RadialGrid::integrate(std::span<const double> g) const {
    if (g.size() != size())
        throw ValidationError("grid function size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        s += weights_[i] * g[i];
    return s;
}

double default_rmax(double beta) {
    return std::clamp(30.0 / std::max(beta, 0.05), 60.0, 2000.0);
}

GridPtr make_grid(double beta, int n_points, double r, std::optional<double> rmax) {
    if (!finite(beta) || !finite(r) || beta < 0.0 || r <= 0.0)
        throw ValidationError("make_grid: need finite beta >= 0 and r > 0");
    if (n_points < 64)
        throw ValidationError("make_grid: n_points must be at least 64");
    double R = rmax ? *rmax : default_rmax(beta);
    if (!finite(R) || R <= 0.0)
        throw ValidationError("make_grid: rmax must be positive");
    // At large beta the core shrinks to about 2r/(1 + 8 beta^2); keep ~25 nodes across it
    // at N = 1024. Small beta falls back to the plain R_max rule.
    double core = 2.0 * r / (1.0 + 8.0 * beta * beta);
    double ratio = std::min(kDefaultSpacingRatio, 1024.0 * core / (25.0 * R));
    const double a = grading_exponent(ratio);
    const double c = R / std::expm1(a);
    std::vector<double> nodes(n_points);
    for (int i = 1; i <= n_points; ++i)
        nodes[i - 1] = c * std::expm1(a * double(i) / n_points);
    nodes.back() = R;
    return std::make_shared<const RadialGrid>(std::move(nodes));
}

double theta(double rho, double r) {
    if (!(r > 0.0) || !finite(r))
        throw ValidationError("theta: r must be positive");
    if (rho < 0.0 || std::isnan(rho))
        throw ValidationError("theta: rho must be nonnegative");
    if (rho == 0.0)
        return std::numbers::pi;
    // pi - 2 atan(rho/2r) written so the tail keeps full relative precision.
    return 2.0 * std::atan(2.0 * r / rho);
}

double theta_prime(double rho, double r) {
    double d = rho * rho + 4.0 * r * r;
    return -4.0 * r / d;
}

std::vector<double> sample_theta(const RadialGrid& g, double r) {
    std::vector<double> t(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        t[i] = theta(g.node(i), r);
    return t;
}

void Profile::validate() const {
    if (!grid)
        throw ValidationError("profile has no grid");
    if (values.size() != grid->size())
        throw ValidationError("profile size does not match its grid");
    for (double v : values)
        if (!finite(v))
            throw ValidationError("profile values must be finite");
    params.validate();
}

bool Profile::admissible(double slack) const {
    for (std::size_t i = 0; i < values.size(); ++i) {
        double t = theta(grid->node(i), params.r);
        if (values[i] < -slack || values[i] > t + slack)
            return false;
    }
    return true;
}

Profile theta_profile(GridPtr grid, const ModelParams& p) {
    Profile f{grid, sample_theta(*grid, p.r), p};
    return f;
}

double x_norm(const RadialGrid& g, std::span<const double> xi, double origin) {
    if (xi.size() != g.size())
        throw ValidationError("x_norm: grid mismatch");
    double s = 0.0, prev = origin;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        if (!finite(xi[i]))
            throw ValidationError("x_norm: non-finite value");
        double d = xi[i] - prev;
        s += g.cell_mid(i) * d * d / g.cell_width(i);
        double q = xi[i] / g.node(i);
        s += g.weight(i) * q * q;
        prev = xi[i];
    }
    return std::sqrt(s);
}

double x_norm_diff(const Profile& a, std::span<const double> b) {
    if (b.size() != a.size())
        throw ValidationError("x_norm_diff: grid mismatch");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = a.values[i] - b[i];
    return x_norm(*a.grid, d);
}

double interpolate(const Profile& f, double rho) {
    const auto& x = f.grid->nodes();
    if (rho <= 0.0)
        return Profile::origin_value;
    if (rho > x.back())
        return 0.0;
    auto it = std::lower_bound(x.begin(), x.end(), rho);
    std::size_t j = std::size_t(it - x.begin());
    double x1 = x[j], y1 = f.values[j];
    double x0 = j ? x[j - 1] : 0.0, y0 = j ? f.values[j - 1] : Profile::origin_value;
    double t = (rho - x0) / (x1 - x0);
    return y0 + t * (y1 - y0);
}

} // namespace skyrmion
