#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace skyrmion {

struct ModelParams {
    double r = 1.0;    // DMI strength after the (h-k)/2 = 1 normalization
    double beta = 1.0; // beta^2 = (h+k)/(h-k)

    // beta = 0 is fine for evaluation; solvers call require_solvable().
    void validate() const;
    void require_solvable() const;
};

struct HKPoint {
    double h = 0.0;
    double k = 0.0;
};

HKPoint params_to_hk(const ModelParams& p);
ModelParams hk_to_params(const HKPoint& hk, double r0);

/// Graded mesh on (0, R_max] with trapezoidal weights for the measure rho d rho.
/// The origin is an implicit node rho_0 = 0 carrying the boundary value.
class RadialGrid {
  public:
    RadialGrid(std::vector<double> nodes);

    std::size_t size() const { return nodes_.size(); }
    double r_max() const { return nodes_.back(); }
    double node(std::size_t i) const { return nodes_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

    // Cell i spans [rho_{i-1}, rho_i] with rho_{-1} := 0, i = 0..N-1.
    double cell_width(std::size_t i) const { return nodes_[i] - (i ? nodes_[i - 1] : 0.0); }
    double cell_mid(std::size_t i) const { return 0.5 * (nodes_[i] + (i ? nodes_[i - 1] : 0.0)); }

    double integrate(std::span<const double> g) const; // sum w_i g_i

  private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// Truncation radius used when none is given: 30/max(beta, 0.05) clamped to [60, 2000].
double default_rmax(double beta);

/// The grid is rho(s) = c (e^{a s} - 1), s = i/N, with c fixed by rho(1) = R_max and a
/// chosen so the first spacing at N = 1024 is R_max 1e-4, or finer when the core
/// (~2r/(1 + 8 beta^2)) is small. The mapping ignores N, so doubling N nests the grids.
GridPtr make_grid(double beta, int n_points, double r, std::optional<double> rmax = std::nullopt);

double theta(double rho, double r);
double theta_prime(double rho, double r); // = -sin(theta)/rho
std::vector<double> sample_theta(const RadialGrid& g, double r);

struct Profile {
    GridPtr grid;
    std::vector<double> values; // f(rho_i), i = 1..N
    ModelParams params;
    static constexpr double origin_value = 3.14159265358979323846;

    std::size_t size() const { return values.size(); }
    void validate() const; // finite, sizes agree
    bool admissible(double slack = 1e-12) const; // 0 <= f <= theta
};

Profile theta_profile(GridPtr grid, const ModelParams& p);

// X-norm of a grid function xi with xi(0) = origin (0 unless stated):
// int (xi'^2 + xi^2/rho^2) rho drho, gradient on cells, potential at nodes.
double x_norm(const RadialGrid& g, std::span<const double> xi, double origin = 0.0);
double x_norm_diff(const Profile& a, std::span<const double> b); // ||a - b||_X

// Linear interpolation of a profile onto rho, using f(0) = pi; 0 beyond R_max.
double interpolate(const Profile& f, double rho);

} // namespace skyrmion
