#pragma once

#include "skyrmion/fit.hpp"
#include "skyrmion/linalg.hpp"
#include "skyrmion/radial.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace skyrmion {

// Pointwise coefficients of the second variation around a profile f:
//   g1 = cos^2 f/rho^2 - f'^2 - 2r f' - (2r/rho) sin f cos f + cos f (1 - cos f) + beta^2 cos f (1 + cos f)
//   g2 = (cos^2 f - sin^2 f)/rho^2 - (4r/rho) sin f cos f + (1 - beta^2) sin^2 f
//        + cos f (1 - cos f) + beta^2 cos f (1 + cos f)
//   coupling = cos f/rho^2 - r sin f/rho
struct ModePotentials {
    std::vector<double> fprime, g1, g2, coupling;
};

ModePotentials mode_potentials(const Profile& f);

/// Quadratic form of Fourier mode n,
///   int [a'^2 + b'^2 + n^2 (a^2 + b^2)/rho^2 + 4n coupling ab + g1 a^2 + g2 b^2] rho drho,
/// gradient on cells and the rest on nodes. Unknowns are the pairs (a_i, b_i) on nodes
/// 0..N-2; the value at R_max is zero. The origin value is zero too, except in mode 1
/// where it is left free (the translation mode does not vanish there).
class ModeOperator {
  public:
    ModeOperator(int n, const Profile& f);

    int mode() const { return n_; }
    std::size_t size() const { return aa.size(); } // number of (a, b) pairs
    const Profile& profile() const { return profile_; }
    const ModePotentials& potentials() const { return pot_; }

    // Block i is [[aa, ab], [ab, bb]]; pairs i and i+1 couple through -link[i] on each component.
    std::vector<double> aa, bb, ab, link, mass;

    // Quadrature of the integrand for full-length (N) grid samples, boundary values included.
    double form(std::span<const double> a, std::span<const double> b) const;
    // v^T M v for size()-length vectors.
    double matrix_form(std::span<const double> a, std::span<const double> b) const;
    void apply(std::span<const double> a, std::span<const double> b, std::vector<double>& ya,
               std::vector<double>& yb) const;

    SymTridiag a_block() const; // the a-a part (mode 0: A^(0))
    SymTridiag b_block() const;
    std::vector<double> dense() const; // row-major, interleaved (a0, b0, a1, b1, ...)

    std::size_t count_below(double shift) const; // eigenvalues of the pencil (M, diag mass) below shift
    double gershgorin_low() const;
    double gershgorin_high() const;

  private:
    int n_;
    Profile profile_;
    ModePotentials pot_;
};

struct EigenPair {
    double value = 0.0;
    std::vector<double> a, b; // size() entries, mass-normalized
    double residual = 0.0;    // |(M - value W) v|_{W^-1} / |v|_W
};

// Lowest `count` eigenpairs of the pencil. Banded Sturm bisection, then shifted inverse
// iteration; below 600 pairs the dense solver is used instead.
std::vector<EigenPair> min_eigenpairs(const ModeOperator& op, int count);
std::vector<EigenPair> min_eigenpairs_dense(const ModeOperator& op, int count);

// Lowest eigenvalue of a tridiagonal pencil (M, diag mass) by bisection on the inertia.
double min_eigenvalue(const SymTridiag& m, std::span<const double> mass);

// |H^(1)[sin f/rho, -f']| / ||(sin f/rho, -f')||^2 with the lumped mass norm.
double zero_mode_residual(const ModeOperator& mode1);

struct ModeSpectrum {
    int n = 0;
    double lambda_min = 0.0;
    double lambda_second = 0.0;
    double eig_residual = 0.0;
    std::optional<double> lambda_a; // mode 0 only: A^(0) and B^(0) separately
    std::optional<double> lambda_b;
    bool b_near_zero = false; // mode 0: B^(0) has an eigenvalue within the near-zero window
    std::optional<double> zero_mode_residual; // mode 1 only
    EigenPair lowest;
};

ModeSpectrum analyze_mode(const Profile& f, int n);

enum class Verdict { stable, zero_mode_only, unstable };
std::string verdict_name(Verdict v);

// Near-zero window used to classify eigenvalues: min(1e-3, beta^2), below the 2 beta^2
// bottom of the continuous spectrum.
double near_zero_window(double beta);
constexpr double kNegativeThreshold = -1e-6;

struct SpectrumSummary {
    std::vector<ModeSpectrum> modes;
    std::vector<std::string> errors; // per-mode failures, "n: message"
    Verdict verdict = Verdict::stable;
    double lambda_min = 0.0;
};

SpectrumSummary spectrum(const Profile& f, std::span<const int> modes);

// Relative L^2 (rho drho) distance between (A^(0) sin f)/w and -2r f' sin f on nodes 0..N-2.
double operator_identity_error(const Profile& f);

struct FactorizedA0 {
    double matrix_value;    // A^(0)[sin f xi] from the matrix
    double discrete_value;  // sum link (s s)(dxi)^2 + sum xi^2 s (A s): exact ground-state transform
    double continuous_value; // sum over cells/nodes of sin^2 f xi'^2 - 2r sin^2 f f' xi^2
};

// a = sin f xi with xi sampled on the nodes; xi(0) enters the first cell of the continuous sum.
FactorizedA0 factorized_a0(const Profile& f, const std::function<double(double)>& xi);

struct MonotonicityProbe {
    bool pass = false;
    double worst = 0.0;             // min over trials and k of (H^(k+1) - H^(k)) / ||(a,b)||^2
    double difference_defect = 0.0; // max relative mismatch against the explicit difference form
    double coefficient_max = 0.0;   // max |r rho sin f - cos f|
};

MonotonicityProbe mode_monotonicity_probe(const Profile& f, int k_max, int trials, std::uint64_t seed = 42);

struct InstabilityDirection {
    int mode = 0;
    EigenPair pair;
    double form_value = 0.0; // H^(n) of the mass-normalized eigenvector
};

// Most negative eigenpair over modes 0..4; throws NumericalError when none is negative.
InstabilityDirection instability_direction(const Profile& f);

using RadialFunction = std::function<double(double)>;

/// F*F + xi_bar^2/2 + beta^2 with F = d/drho + cos(theta)/rho and xi_bar = xi + 4r/sqrt(rho^2 + 4r^2),
/// Dirichlet at both ends. The F part is a sum of squares over cells, so the matrix is
/// positive definite by construction.
class LinearizedOperator {
  public:
    LinearizedOperator(GridPtr grid, const RadialFunction& xi, double beta, double r);

    const RadialGrid& grid() const { return *grid_; }
    SymTridiag matrix;          // nodes 0..N-2
    std::vector<double> mass;
    std::vector<double> xi;     // sampled on all N nodes
    std::vector<double> xi_bar;
    double beta, r;

    double smallest_ritz() const;
    // u = M^{-1} W g; returns all N nodes (last = 0).
    std::vector<double> solve(std::span<const double> source) const;
    // max over nodes of |coefficient of F*F - (1/rho^2 + W)| rho^2, W = -32 r^2/(rho^2 + 4r^2)^2.
    double splitting_defect() const;

  private:
    GridPtr grid_;
};

// Potential of the alternate splitting: W = -32 r^2/(rho^2 + 4r^2)^2.
double splitting_potential(double rho, double r);

struct ResolventSample {
    double beta;
    double max_ratio; // max over sources of ||u||_X / ||rho^s g||
    std::vector<double> ratios;
    std::vector<double> solution_norms; // ||u||_X per source
    double ritz;
};

struct ResolventResult {
    FitResult fit; // slope of log max_ratio against log(1/beta)
    std::vector<ResolventSample> samples;
};

ResolventResult resolvent_probe(double r, const RadialFunction& xi, std::span<const double> betas, double s,
                                const std::vector<RadialFunction>& sources, int grid_points = 4096);

} // namespace skyrmion
