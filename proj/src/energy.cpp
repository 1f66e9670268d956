#include "skyrmion/energy.hpp"

#include "skyrmion/errors.hpp"

#include <cmath>
#include <numbers>

namespace skyrmion {

namespace discrete {

namespace {

constexpr double kPi = std::numbers::pi;

double one_minus_cos(double f) {
    double s = std::sin(0.5 * f);
    return 2.0 * s * s;
}

double dmi_primitive(double f) { return f - std::sin(f); } // d/df = 1 - cos f

double left_value(std::span<const double> f, std::size_t j) { return j ? f[j - 1] : kPi; }

} // namespace

double robin_kappa(const RadialGrid& g, double beta, std::optional<double> rate) {
    double c = rate ? *rate : std::sqrt(2.0) * beta;
    return c + 0.5 / g.r_max();
}

EnergyBreakdown components(const RadialGrid& g, std::span<const double> f, const ModelParams& p) {
    if (f.size() != g.size())
        throw ValidationError("energy: grid mismatch");
    EnergyBreakdown e;
    for (std::size_t j = 0; j < f.size(); ++j) {
        double fl = left_value(f, j), mid = g.cell_mid(j), h = g.cell_width(j);
        double d = f[j] - fl;
        e.dirichlet += 0.5 * mid * d * d / h;
        e.dmi += mid * (dmi_primitive(f[j]) - dmi_primitive(fl));

        double rho = g.node(j), w = g.weight(j);
        double s = std::sin(f[j]), omc = one_minus_cos(f[j]);
        e.dirichlet += 0.5 * w * s * s / (rho * rho);
        e.dmi -= w * s * omc / rho;
        e.v_minus += 0.5 * w * omc * omc;
        e.v_plus += 0.5 * w * omc * (4.0 - omc); // (1-c)(3+c)/2
    }
    e.total = e.dirichlet + p.r * e.dmi + e.v_minus + p.beta * p.beta * e.v_plus;
    return e;
}

double objective(const RadialGrid& g, std::span<const double> f, const ModelParams& p, double kappa) {
    double fr = f.back();
    return components(g, f, p).total + 0.5 * kappa * g.r_max() * fr * fr;
}

std::vector<double> residual(const RadialGrid& g, std::span<const double> f, const ModelParams& p,
                             double kappa) {
    const std::size_t n = f.size();
    if (n != g.size())
        throw ValidationError("residual: grid mismatch");
    const double r = p.r, b2 = p.beta * p.beta;
    std::vector<double> res(n);
    for (std::size_t i = 0; i < n; ++i) {
        double rho = g.node(i), w = g.weight(i);
        double cl = g.cell_mid(i) / g.cell_width(i);
        double grad = cl * (f[i] - left_value(f, i));
        double dmi_cells;
        if (i + 1 < n) {
            double cr = g.cell_mid(i + 1) / g.cell_width(i + 1);
            grad -= cr * (f[i + 1] - f[i]);
            dmi_cells = -(g.cell_mid(i + 1) - g.cell_mid(i)) / w; // = -1/rho
        } else {
            grad += kappa * g.r_max() * f[i];
            dmi_cells = g.cell_mid(i) / w;
        }
        double s = std::sin(f[i]), c = std::cos(f[i]), omc = one_minus_cos(f[i]);
        double dmi = dmi_cells * omc - (c * omc + s * s) / rho;
        res[i] = grad / w + s * c / (rho * rho) + r * dmi + s * omc + b2 * s * (2.0 - omc);
    }
    return res;
}

SymTridiag hessian(const RadialGrid& g, std::span<const double> f, const ModelParams& p, double kappa) {
    const std::size_t n = f.size();
    const double r = p.r, b2 = p.beta * p.beta;
    SymTridiag m(n);
    for (std::size_t i = 0; i < n; ++i) {
        double rho = g.node(i), w = g.weight(i);
        double cl = g.cell_mid(i) / g.cell_width(i);
        m.diag[i] += cl;
        double dmi_cells;
        if (i + 1 < n) {
            double cr = g.cell_mid(i + 1) / g.cell_width(i + 1);
            m.diag[i] += cr;
            m.off[i] = -cr;
            dmi_cells = -(g.cell_mid(i + 1) - g.cell_mid(i));
        } else {
            m.diag[i] += kappa * g.r_max();
            dmi_cells = g.cell_mid(i);
        }
        double s = std::sin(f[i]), c = std::cos(f[i]), omc = one_minus_cos(f[i]);
        double c2 = c * c - s * s;
        double dmi = dmi_cells * s - w * s * (4.0 * c - 1.0) / rho;
        m.diag[i] += w * (c2 / (rho * rho) + (c * omc + s * s) + b2 * (c + c2)) + r * dmi;
    }
    return m;
}

double scaled_sup(const RadialGrid& g, std::span<const double> res) {
    double m = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        double rho = g.node(i);
        m = std::max(m, std::abs(res[i]) * std::min(1.0, rho * rho));
    }
    return m;
}

double scaled_rms(const RadialGrid& g, std::span<const double> res) {
    double s = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        double rho = g.node(i);
        double v = res[i] * std::min(1.0, rho * rho);
        s += v * v;
    }
    return std::sqrt(s / double(res.size()));
}

} // namespace discrete

double cutoff(double t) {
    if (t <= 1.0)
        return 1.0;
    if (t >= 2.0)
        return 0.0;
    double x = t - 1.0;
    return 1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

Profile truncated_theta(GridPtr grid, const ModelParams& p, double R, double lambda) {
    if (!(R > 0.0) || !(lambda > 0.0))
        throw ValidationError("truncated_theta: R and lambda must be positive");
    Profile f{grid, std::vector<double>(grid->size()), p};
    for (std::size_t i = 0; i < grid->size(); ++i) {
        double x = lambda * grid->node(i);
        f.values[i] = theta(x, p.r) * cutoff(x / R);
    }
    return f;
}

namespace {

void require_settled_tail(const Profile& f) {
    if (std::abs(f.values.back()) > 0.5)
        throw ValidationError("tail not resolved: |f(R_max)| > 0.5");
}

} // namespace

EnergyBreakdown energy(const Profile& f) {
    f.validate();
    require_settled_tail(f);
    return discrete::components(*f.grid, f.values, f.params);
}

std::vector<double> first_variation(const Profile& f) {
    f.validate();
    return discrete::residual(*f.grid, f.values, f.params, discrete::robin_kappa(*f.grid, f.params.beta));
}

double topological_degree(const Profile& f) {
    f.validate();
    require_settled_tail(f);
    // Sign convention: the harmonic-map profile carries degree -1. f(0+) is extrapolated
    // from the first three samples rather than taken from the ghost, so a profile that
    // never leaves 0 has degree 0.
    const auto& g = *f.grid;
    double x0 = g.node(0), x1 = g.node(1), x2 = g.node(2);
    double l0 = x1 * x2 / ((x0 - x1) * (x0 - x2)), l1 = x0 * x2 / ((x1 - x0) * (x1 - x2)),
           l2 = x0 * x1 / ((x2 - x0) * (x2 - x1));
    double origin = l0 * f.values[0] + l1 * f.values[1] + l2 * f.values[2];
    return 0.5 * (std::cos(origin) - std::cos(f.values.back()));
}

double convexity_gap(const Profile& f) {
    f.validate();
    if (!f.admissible())
        throw ValidationError("convexity_gap: profile must satisfy 0 <= f <= theta");
    ModelParams p0{f.params.r, 0.0};
    auto th = sample_theta(*f.grid, f.params.r);
    double dist = x_norm_diff(f, th);
    if (dist < 1e-8)
        throw NumericalError("convexity_gap: ratio ill-conditioned (||f - theta||_X < 1e-8)");
    double e_f = discrete::components(*f.grid, f.values, p0).total;
    double e_t = discrete::components(*f.grid, th, p0).total;
    return (e_f - e_t) / (dist * dist);
}

} // namespace skyrmion
