#pragma once

#include "skyrmion/linalg.hpp"
#include "skyrmion/radial.hpp"

#include <optional>
#include <span>
#include <vector>

namespace skyrmion {

struct EnergyBreakdown {
    double dirichlet = 0.0; // 1/2 int (f'^2 + sin^2 f / rho^2)
    double dmi = 0.0;       // int (f' - sin f/rho)(1 - cos f)
    double v_minus = 0.0;   // 1/2 int (1 - cos f)^2
    double v_plus = 0.0;    // int (2 - (1 + cos f)^2 / 2)
    double total = 0.0;     // dirichlet + r dmi + v_minus + beta^2 v_plus
};

// Discretization shared by the energy, the Euler-Lagrange residual and the Newton
// Jacobian. The gradient term lives on cells, everything else on nodes, and the
// residual is exactly (d E_h / d f_i) / w_i, so minimizing and root-finding agree.
namespace discrete {

// Rate in the far-field condition f' + kappa f = 0; default sqrt(2) beta + 1/(2 R_max).
double robin_kappa(const RadialGrid& g, double beta, std::optional<double> rate = std::nullopt);

EnergyBreakdown components(const RadialGrid& g, std::span<const double> f, const ModelParams& p);

// Energy plus the boundary term kappa R f_N^2 / 2 whose natural condition is the Robin row.
double objective(const RadialGrid& g, std::span<const double> f, const ModelParams& p, double kappa);

std::vector<double> residual(const RadialGrid& g, std::span<const double> f, const ModelParams& p,
                             double kappa);

// Hessian of objective() (not divided by the weights; symmetric).
SymTridiag hessian(const RadialGrid& g, std::span<const double> f, const ModelParams& p, double kappa);

// sup_i |R_i| min(1, rho_i^2): the measure Newton drives below its tolerance. The
// weight hides roundoff from the 1/h^2 stencil at the first nodes.
double scaled_sup(const RadialGrid& g, std::span<const double> res);
double scaled_rms(const RadialGrid& g, std::span<const double> res);

} // namespace discrete

// Smooth cutoff: 1 on [0,1], 0 on [2, inf), C^2 quintic in between.
double cutoff(double t);

// theta(lambda rho) chi(lambda rho / R) sampled on a grid.
Profile truncated_theta(GridPtr grid, const ModelParams& p, double R, double lambda = 1.0);

EnergyBreakdown energy(const Profile& f);
std::vector<double> first_variation(const Profile& f);
double topological_degree(const Profile& f);

// (E_0[f] - E_0[theta]) / ||f - theta||_X^2 with theta sampled on f's grid.
double convexity_gap(const Profile& f);

} // namespace skyrmion
