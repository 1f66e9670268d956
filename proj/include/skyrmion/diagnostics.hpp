#pragma once

#include "skyrmion/fit.hpp"
#include "skyrmion/radial.hpp"

#include <span>
#include <vector>

namespace skyrmion {

// d/drho of a grid function whose value at rho = 0 is `origin`; five-point
// finite-difference weights on the nonuniform grid (fourth order).
std::vector<double> derivative(const RadialGrid& g, std::span<const double> v, double origin);

struct DiagnosticsSeries {
    std::vector<double> fprime;
    std::vector<double> q;     // f' + sin f / rho
    std::vector<double> q_bar; // f' - sin f / rho
    std::vector<double> n_fn;  // q_bar + r (1 - cos f)
    std::vector<double> f_fn;  // rho^2 f'^2 - sin^2 f
    std::vector<double> p_fn;  // 1 - cos f - 2r sin f / rho + beta^2 (1 + cos f)
    double max_q = 0.0;
    double max_n = 0.0;
    double min_f = 0.0;
};

DiagnosticsSeries diagnostics(const Profile& f);

// A continuous strict inequality X < 0 is checked node by node against the local
// size of the terms making up X: X_i < -1e-10 scale_i. Nodes whose value has
// underflowed to zero are skipped; if nothing is left the check fails.
struct StrictSign {
    bool strict = false;
    double max_value = 0.0; // max_i X_i
    double max_ratio = 0.0; // max_i X_i / scale_i
};

constexpr double kStrictMargin = 1e-10;

StrictSign monotonicity_check(const Profile& f);   // X = Q
StrictSign sign_quantity_check(const Profile& f);  // X = N

// Slope of log(sqrt(rho) f) on [first rho with f < 1e-2, 0.9 R_max], negated.
FitResult decay_fit(const Profile& f);

// Right derivative at the origin: one-sided quadratic fits through (0, pi) at two
// node spacings, combined by Richardson extrapolation.
double origin_derivative(const Profile& f);

// || F' - 2 rho^2 f' sin f P ||_{L^2} / || 2 rho^2 f' sin f P ||_{L^2} in rho drho,
// with F' differentiated numerically.
double f_identity_discrepancy(const Profile& f);

// 1 + cos f - (rho/2r) sin f minus 2 cos(f/2) sin((theta - f)/2) / sin(theta/2), max over nodes.
double half_angle_identity_error(const Profile& f);

} // namespace skyrmion
